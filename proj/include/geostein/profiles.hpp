#pragma once

// Radial kernel profiles on the sphere: each kernel is a scalar function
// psi(u) of u = x.y with analytic derivatives psi', .., psi'''' obtained by
// hypergeometric parameter shifting or polynomial differentiation, never by
// differencing the series.
//
// Evaluation convention at u = 1: half-integer powers of (1 - u) contribute
// their limit value 0 at every derivative order.  The Stein kernel assembly
// multiplies the orders whose limits are one-sided infinite by geometric
// coefficients that vanish at u = 1, so the convention yields the correct
// limit of every product that is actually formed.

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "geostein/errors.hpp"
#include "geostein/gauss_legendre.hpp"
#include "geostein/special.hpp"

namespace geostein {

inline constexpr int kMaxProfileDeriv = 4;

class RadialProfile {
 public:
  RadialProfile(std::string name, double alpha, double lambda, bool rateLowerBoundOnly)
      : name_(std::move(name)),
        sobolevOrder_(alpha),
        lengthScale_(lambda),
        rateLowerBoundOnly_(rateLowerBoundOnly) {}
  virtual ~RadialProfile() = default;

  virtual double eval(double u, int deriv) const = 0;

  // Extended-precision profile value; the finite-difference Stein oracle
  // differences this to keep its noise floor below the double ulp of psi.
  virtual long double value_ld(long double u) const {
    return eval(static_cast<double>(u), 0);
  }

  // Same as eval but reports the number of series terms consumed (0 for
  // closed-form profiles).
  virtual double eval_counted(double u, int deriv, long* terms) const {
    if (terms) *terms = 0;
    return eval(u, deriv);
  }

  double operator()(double u, int deriv = 0) const { return eval(u, deriv); }

  const std::string& name() const { return name_; }
  double sobolev_order() const { return sobolevOrder_; }
  double length_scale() const { return lengthScale_; }
  // The convergence-rate prediction derived from sobolev_order() is only a
  // lower bound for kernels whose reproduced space is uncharacterised.
  bool rate_is_lower_bound_only() const { return rateLowerBoundOnly_; }

 protected:
  static void check_deriv(int deriv) {
    if (deriv < 0 || deriv > kMaxProfileDeriv) {
      throw std::invalid_argument("RadialProfile: derivative order must be in 0..4");
    }
  }

 private:
  std::string name_;
  double sobolevOrder_;
  double lengthScale_;
  bool rateLowerBoundOnly_;
};

using ProfilePtr = std::shared_ptr<const RadialProfile>;

namespace detail {

// Power contributions (2 - 2u)^e below this threshold of 2 - 2u are taken in
// the limit sense.  The Stein assembly switches to its coincident-point
// branch far earlier, so the guard only prevents overflow of stray
// evaluations at u == 1.
inline constexpr double kPowerCutoff = 1e-30;

inline double power_term(double s, double exponent) {
  if (s < kPowerCutoff) return 0.0;
  return std::pow(s, exponent);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Kernel 1: hypergeometric 3F2 plus chordal power term,
//   psi(u) = C1 * 3F2[(d/2+1/2-a, d/2-a, d/2+1/2-a); (d/2+1-a, 1+d/2-2a); (1-u)/2]
//          + C2 * (2-2u)^(a-1),
// reproducing W_2^alpha(S^d) for alpha + 1/2 - d/2 a positive integer.
// ---------------------------------------------------------------------------
class K1Profile final : public RadialProfile {
 public:
  K1Profile(double alpha, int d)
      : RadialProfile("k1", alpha, 0.0, false), alpha_(alpha), d_(d) {
    const double m = alpha + 0.5 - 0.5 * d;
    const double mRound = std::round(m);
    if (!(alpha > 0.5 * d) || mRound < 1.0 || std::abs(m - mRound) > 1e-9) {
      throw InvalidSmoothness("profile_k1: requires alpha + 1/2 - d/2 a positive integer and alpha > d/2");
    }
    const int mi = static_cast<int>(mRound);

    c1_ = std::pow(2.0, 2.0 * alpha - 2.0) / (2.0 * alpha - d) *
          std::exp(std::lgamma(0.5 * d + 2.0 * alpha - 2.0) - std::lgamma(0.5 * d) -
                   std::lgamma(d + 2.0 * alpha - 2.0) + std::lgamma(static_cast<double>(d)));
    const double sign = (mi % 2 == 0) ? 1.0 : -1.0;
    c2_ = sign * std::pow(2.0, d - 2.0 * alpha - 1.0) *
          std::exp(std::lgamma(0.5 * (d + 1)) + 2.0 * std::lgamma(m) - 0.5 * std::log(kPiD) -
                   std::lgamma(0.5 * d)) /
          (pochhammer(0.5, m) * pochhammer(0.5 * d, m));

    const long double aL = alpha, dL = d;
    c1L_ = std::pow(2.0L, 2 * aL - 2) / (2 * aL - dL) *
           std::exp(std::lgamma(dL / 2 + 2 * aL - 2) - std::lgamma(dL / 2) -
                    std::lgamma(dL + 2 * aL - 2) + std::lgamma(dL));
    c2L_ = (mi % 2 == 0 ? 1.0L : -1.0L) * std::pow(2.0L, dL - 2 * aL - 1) *
           std::exp(std::lgamma((dL + 1) / 2) + 2 * std::lgamma((long double)m) -
                    0.5L * std::log(3.14159265358979323846264338327950288L) -
                    std::lgamma(dL / 2)) /
           (pochhammer(0.5L, (long double)m) * pochhammer(dL / 2, (long double)m));
    upperL_ = {dL / 2 + 0.5L - aL, dL / 2 - aL, dL / 2 + 0.5L - aL};
    lowerL_ = {dL / 2 + 1 - aL, 1 + dL / 2 - 2 * aL};

    const std::array<double, 3> A = {0.5 * d + 0.5 - alpha, 0.5 * d - alpha,
                                     0.5 * d + 0.5 - alpha};
    const std::array<double, 2> B = {0.5 * d + 1.0 - alpha, 1.0 + 0.5 * d - 2.0 * alpha};
    for (int j = 0; j <= kMaxProfileDeriv; ++j) {
      double num = 1.0, den = 1.0;
      for (double a : A) num *= pochhammer_int(a, j);
      for (double b : B) den *= pochhammer_int(b, j);
      if (num == 0.0) {
        shiftFactor_[j] = 0.0;  // the 3F2 part is a polynomial of lower degree
      } else {
        if (den == 0.0) throw InvalidSmoothness("profile_k1: parameter-shift pole");
        shiftFactor_[j] = num / den;
      }
      shiftedUpper_[j] = {A[0] + j, A[1] + j, A[2] + j};
      shiftedLower_[j] = {B[0] + j, B[1] + j};
    }
    for (int i = 0; i <= kMaxProfileDeriv; ++i) {
      powerFall_[i] = 1.0;
      for (int k = 0; k < i; ++k) powerFall_[i] *= alpha - 1.0 - k;
    }
  }

  double eval(double u, int deriv) const override {
    check_deriv(deriv);
    u = std::clamp(u, -1.0, 1.0);
    double value = 0.0;
    if (shiftFactor_[deriv] != 0.0) {
      const double t = 0.5 * (1.0 - u);
      const double F = hypergeometric_series<double>(shiftedUpper_[deriv], shiftedLower_[deriv], t);
      value += c1_ * std::pow(-0.5, deriv) * shiftFactor_[deriv] * F;
    }
    const double s = 2.0 - 2.0 * u;
    value += c2_ * powerFall_[deriv] * std::pow(-2.0, deriv) *
             detail::power_term(s, alpha_ - 1.0 - deriv);
    return value;
  }

  long double value_ld(long double u) const override {
    u = std::clamp(u, -1.0L, 1.0L);
    const long double F =
        hypergeometric_series<long double>(upperL_, lowerL_, (1 - u) / 2, 1e-18L);
    const long double s = 2 - 2 * u;
    const long double power = s < detail::kPowerCutoff ? 0.0L : std::pow(s, (long double)alpha_ - 1);
    return c1L_ * F + c2L_ * power;
  }

  double constant_c1() const { return c1_; }
  double constant_c2() const { return c2_; }

 private:
  static constexpr double kPiD = 3.14159265358979323846;
  double alpha_;
  int d_;
  double c1_ = 0.0, c2_ = 0.0;
  long double c1L_ = 0.0L, c2L_ = 0.0L;
  std::vector<long double> upperL_, lowerL_;
  std::array<double, kMaxProfileDeriv + 1> shiftFactor_{};
  std::array<double, kMaxProfileDeriv + 1> powerFall_{};
  std::array<std::vector<double>, kMaxProfileDeriv + 1> shiftedUpper_{};
  std::array<std::vector<double>, kMaxProfileDeriv + 1> shiftedLower_{};
};

inline ProfilePtr profile_k1(double alpha, int d = 2) {
  return std::make_shared<K1Profile>(alpha, d);
}

// ---------------------------------------------------------------------------
// Kernel 2: geodesic Gauss hypergeometric profile,
//   psi(u) = Gamma(1/l+1/2+a) Gamma(1/l+a) / (Gamma(2/l+1/2+a) Gamma(a))
//            * 2F1(1/l, 1/l+1/2; 2/l+1/2+a; u).
// The series converges at u = 1 with Gauss margin alpha; derivative shifts
// reduce the margin to alpha - j, so high orders become slow near u = 1 and
// surface SeriesDivergence rather than silently truncating.
// ---------------------------------------------------------------------------
class K2Profile final : public RadialProfile {
 public:
  K2Profile(double alpha, double lambda)
      : RadialProfile("k2", alpha, lambda, /*rateLowerBoundOnly=*/true) {
    if (!(lambda > 0.0) || !(alpha > 0.0)) {
      throw InvalidSmoothness("profile_k2: requires lambda > 0 and alpha > 0");
    }
    a_ = 1.0 / lambda;
    b_ = a_ + 0.5;
    c_ = 2.0 / lambda + 0.5 + alpha;
    prefactor_ = std::exp(std::lgamma(a_ + 0.5 + alpha) + std::lgamma(a_ + alpha) -
                          std::lgamma(c_) - std::lgamma(alpha));
    const long double aL = 1.0L / (long double)lambda, alphaL = alpha;
    prefL_ = std::exp(std::lgamma(aL + 0.5L + alphaL) + std::lgamma(aL + alphaL) -
                      std::lgamma(2 * aL + 0.5L + alphaL) - std::lgamma(alphaL));
    for (int j = 0; j <= kMaxProfileDeriv; ++j) {
      shiftCoef_[j] = prefactor_ * pochhammer_int(a_, j) * pochhammer_int(b_, j) /
                      pochhammer_int(c_, j);
    }
  }

  double eval(double u, int deriv) const override {
    long dummy;
    return eval_counted(u, deriv, &dummy);
  }

  double eval_counted(double u, int deriv, long* terms) const override {
    check_deriv(deriv);
    u = std::clamp(u, -1.0, 1.0);
    const double F = hypergeometric_series<double>({a_ + deriv, b_ + deriv}, {c_ + deriv}, u,
                                                   1e-13, 1000000, terms);
    return shiftCoef_[deriv] * F;
  }

  long double value_ld(long double u) const override {
    u = std::clamp(u, -1.0L, 1.0L);
    return prefL_ * hypergeometric_series<long double>({(long double)a_, (long double)b_},
                                                       {(long double)c_}, u, 1e-17L, 4000000);
  }

 private:
  double a_ = 0.0, b_ = 0.0, c_ = 0.0, prefactor_ = 0.0;
  long double prefL_ = 0.0L;
  std::array<double, kMaxProfileDeriv + 1> shiftCoef_{};
};

inline ProfilePtr profile_k2(double alpha, double lambda) {
  return std::make_shared<K2Profile>(alpha, lambda);
}

// ---------------------------------------------------------------------------
// Kernel 3: compactly supported Wendland profile of R^3 restricted to the
// sphere, psi(u) = phi_{3,j}(sqrt(2-2u)/lambda), normalized to phi(0) = 1.
// With v = (2-2u)/lambda^2 the polynomial splits into integer and
// half-integer powers of v; both are differentiated analytically.
// ---------------------------------------------------------------------------
class K3Profile final : public RadialProfile {
 public:
  K3Profile(int j, double lambda)
      : RadialProfile("k3", j + 1.5, lambda, false), lambda_(lambda) {
    if (j != 2 && j != 3) {
      throw UnsupportedSmoothness("profile_k3: j must be 2 or 3");
    }
    if (!(lambda > 0.0)) throw std::invalid_argument("profile_k3: lambda must be > 0");
    if (j == 2) {
      // (1-r)^6 (35 r^2 + 18 r + 3) / 3
      coeffs_ = {1.0, 0.0, -28.0 / 3.0, 0.0, 70.0, -448.0 / 3.0, 140.0, -64.0, 35.0 / 3.0};
      coeffsL_ = {1.0L, 0.0L, -28.0L / 3.0L, 0.0L, 70.0L, -448.0L / 3.0L, 140.0L, -64.0L,
                  35.0L / 3.0L};
    } else {
      // (1-r)^8 (32 r^3 + 25 r^2 + 8 r + 1)
      coeffs_ = {1.0, 0.0, -11.0, 0.0, 66.0, 0.0, -462.0, 1056.0, -1155.0, 704.0, -231.0, 32.0};
      coeffsL_ = {1.0L, 0.0L, -11.0L, 0.0L, 66.0L, 0.0L, -462.0L, 1056.0L, -1155.0L, 704.0L,
                  -231.0L, 32.0L};
    }
  }

  double eval(double u, int deriv) const override {
    check_deriv(deriv);
    u = std::clamp(u, -1.0, 1.0);
    const double v = (2.0 - 2.0 * u) / (lambda_ * lambda_);
    if (v > 1.0) return 0.0;  // outside the support
    const double dv = -2.0 / (lambda_ * lambda_);
    double sum = 0.0;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
      if (coeffs_[k] == 0.0) continue;
      const double e = 0.5 * k;  // r^k = v^(k/2)
      double fall = 1.0;
      for (int i = 0; i < deriv; ++i) fall *= e - i;
      if (fall == 0.0) continue;
      double ve;
      if (k % 2 == 0) {
        const int ip = k / 2 - deriv;  // integer exponent
        ve = ip < 0 ? 0.0 : std::pow(v, ip);
        if (ip == 0) ve = 1.0;
      } else {
        ve = detail::power_term(v, e - deriv);
      }
      sum += coeffs_[k] * fall * ve;
    }
    double scale = 1.0;
    for (int i = 0; i < deriv; ++i) scale *= dv;
    return sum * scale;
  }

  long double value_ld(long double u) const override {
    u = std::clamp(u, -1.0L, 1.0L);
    const long double r = std::sqrt(2 - 2 * u) / (long double)lambda_;
    if (r > 1.0L) return 0.0L;
    long double acc = 0.0L;
    for (std::size_t k = coeffsL_.size(); k-- > 0;) {
      acc = acc * r + coeffsL_[k];
    }
    return acc;
  }

 private:
  double lambda_;
  std::vector<double> coeffs_;       // phi_{3,j} coefficients in r
  std::vector<long double> coeffsL_;
};

inline ProfilePtr profile_k3(int j, double lambda) {
  return std::make_shared<K3Profile>(j, lambda);
}

// ---------------------------------------------------------------------------
// Schoenberg diagnostic: Legendre expansion coefficients of psi for d = 2,
//   psi(u) = sum_n b_n P_n(u),   b_n = (2n+1)/2 Int psi(u) P_n(u) du,
// computed with Gauss-Legendre quadrature of order >= 4N.
// ---------------------------------------------------------------------------
struct SchoenbergDiagnostic {
  std::vector<double> coefficients;  // b_0 .. b_N
  int dimension = 2;
};

inline SchoenbergDiagnostic schoenberg_coefficients(const RadialProfile& profile, int N) {
  if (N < 0 || N > 200) throw std::invalid_argument("schoenberg_coefficients: need 0 <= N <= 200");
  const int m = std::max(4 * N, 64);
  const auto rule = gauss_legendre(m);
  std::vector<double> psi(m);
  for (int i = 0; i < m; ++i) psi[i] = profile.eval(rule.nodes[i], 0);

  SchoenbergDiagnostic diag;
  diag.coefficients.resize(N + 1, 0.0);
  std::vector<double> pPrev(m, 1.0), pCur(m);
  for (int i = 0; i < m; ++i) pCur[i] = rule.nodes[i];
  for (int n = 0; n <= N; ++n) {
    const std::vector<double>& pn = (n == 0) ? pPrev : pCur;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += rule.weights[i] * psi[i] * pn[i];
    diag.coefficients[n] = 0.5 * (2.0 * n + 1.0) * acc;
    if (n >= 1) {  // advance recurrence to P_{n+1}
      for (int i = 0; i < m; ++i) {
        const double next =
            ((2.0 * n + 1.0) * rule.nodes[i] * pCur[i] - n * pPrev[i]) / (n + 1.0);
        pPrev[i] = pCur[i];
        pCur[i] = next;
      }
    }
  }
  return diag;
}

}  // namespace geostein
