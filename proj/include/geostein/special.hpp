#pragma once

// Scalar special functions feeding the kernel profiles: signed log-Gamma,
// Pochhammer symbols, and generalized hypergeometric series pFq evaluated by
// Pochhammer-ratio recurrence.  Everything is templated on the scalar so the
// test suite can re-run the ladders in extended precision.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "geostein/errors.hpp"

namespace geostein {

template <class Scalar>
struct SignedLog {
  Scalar logAbs;
  int sign;  // -1, 0, +1
};

// log |Gamma(x)| with the sign of Gamma(x).  Relies on std::lgamma, which is
// accurate to ~1 ulp on the ranges used here; the sign for negative
// non-integer arguments follows from the reflection formula.
template <class Scalar>
SignedLog<Scalar> log_gamma_signed(Scalar x) {
  if (x > Scalar(0)) return {std::lgamma(x), 1};
  if (x == std::floor(x)) {
    return {std::numeric_limits<Scalar>::infinity(), 0};  // pole
  }
  const Scalar s = std::sin(Scalar(3.14159265358979323846264338327950288L) * x);
  return {std::lgamma(x), s > Scalar(0) ? 1 : -1};
}

// Pochhammer symbol (z)_n for integer n >= 0, computed as a direct product.
// Exact at the zeros generated by non-positive-integer z.
template <class Scalar>
Scalar pochhammer_int(Scalar z, int n) {
  Scalar p = Scalar(1);
  for (int i = 0; i < n; ++i) p *= z + Scalar(i);
  return p;
}

// General Pochhammer (z)_nu = Gamma(z + nu) / Gamma(z) via log-Gamma
// differences with sign tracking.  Integer nu up to 64 takes the product
// fast path, which also covers non-positive-integer z.
template <class Scalar>
Scalar pochhammer(Scalar z, Scalar nu) {
  const Scalar r = std::round(nu);
  if (nu >= Scalar(0) && std::abs(nu - r) < Scalar(1e-12) && r <= Scalar(64)) {
    return pochhammer_int(z, static_cast<int>(r));
  }
  const auto num = log_gamma_signed(z + nu);
  const auto den = log_gamma_signed(z);
  if (den.sign == 0) return Scalar(0);  // 1/Gamma(pole) = 0
  if (num.sign == 0) {
    throw std::domain_error("pochhammer: Gamma pole in numerator");
  }
  return Scalar(num.sign * den.sign) * std::exp(num.logAbs - den.logAbs);
}

struct HypergeomSpec {
  std::vector<double> upperParams;
  std::vector<double> lowerParams;
  long maxTerms = 1000000;
  double tol = 1e-13;
};

// Partial sums of pFq(a; b; t) with the term recurrence
//   term_{k+1} = term_k * prod(a_i + k) / prod(b_j + k) * t / (k + 1).
// A non-positive-integer upper parameter terminates the series exactly.
// Non-terminating series are summed to relative tolerance `tol`; exhaustion
// of maxTerms raises SeriesDivergence.  termCount, when given, receives the
// number of terms consumed.
template <class Scalar>
Scalar hypergeometric_series(const std::vector<Scalar>& upper, const std::vector<Scalar>& lower,
                             Scalar t, Scalar tol = Scalar(1e-13), long maxTerms = 1000000,
                             long* termCount = nullptr) {
  if (std::abs(t) > Scalar(1) + Scalar(1e-14)) {
    throw std::domain_error("hypergeometric_series: |t| > 1 unsupported");
  }
  bool terminating = false;
  for (Scalar a : upper) {
    if (a <= Scalar(0) && std::abs(a - std::round(a)) < Scalar(1e-12)) terminating = true;
  }
  if (!terminating && std::abs(std::abs(t) - Scalar(1)) < Scalar(1e-15)) {
    Scalar margin = Scalar(0);
    for (Scalar b : lower) margin += b;
    for (Scalar a : upper) margin -= a;
    if (t > Scalar(0) && margin <= Scalar(0)) {
      throw SeriesDivergence("hypergeometric_series: divergent at t = 1 (Gauss margin <= 0)");
    }
  }

  Scalar sum = Scalar(1);
  Scalar term = Scalar(1);
  int smallStreak = 0;
  for (long k = 0; k < maxTerms; ++k) {
    Scalar num = Scalar(1);
    for (Scalar a : upper) num *= a + Scalar(k);
    if (num == Scalar(0)) {  // exact termination
      if (termCount) *termCount = k + 1;
      return sum;
    }
    Scalar den = Scalar(k + 1);
    for (Scalar b : lower) den *= b + Scalar(k);
    if (den == Scalar(0)) {
      throw std::domain_error("hypergeometric_series: lower-parameter pole before termination");
    }
    term *= num / den * t;
    sum += term;
    if (std::abs(term) <= tol * std::abs(sum)) {
      if (++smallStreak >= 2) {  // two consecutive small terms guard alternation
        if (termCount) *termCount = k + 2;
        return sum;
      }
    } else {
      smallStreak = 0;
    }
  }
  throw SeriesDivergence("hypergeometric_series: maxTerms exhausted without convergence");
}

inline double hypergeom(const HypergeomSpec& spec, double t) {
  return hypergeometric_series<double>(spec.upperParams, spec.lowerParams, t, spec.tol,
                                       spec.maxTerms);
}

}  // namespace geostein
