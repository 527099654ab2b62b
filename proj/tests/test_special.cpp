#include <doctest.h>

#include <cmath>

#include "geostein/special.hpp"

using namespace geostein;

namespace {

// Plain term-by-term summation used as the independent route: terms are
// formed from explicit Pochhammer products rather than the ratio recurrence.
double direct_series_2f1(double a, double b, double c, double t, int nTerms) {
  double sum = 0.0;
  for (int k = 0; k < nTerms; ++k) {
    double term = pochhammer_int(a, k) * pochhammer_int(b, k) / pochhammer_int(c, k);
    for (int i = 1; i <= k; ++i) term *= t / i;
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("pFq at t = 0 is 1") {
  CHECK(hypergeometric_series<double>({0.3, 1.7}, {2.2}, 0.0) == doctest::Approx(1.0));
  CHECK(hypergeom({{0.3, 1.7}, {2.2}}, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("terminating 3F2 with upper parameter -2") {
  long terms = 0;
  const double t = 0.37;
  const double v =
      hypergeometric_series<double>({-2.0, 0.5, 1.3}, {1.1, 2.7}, t, 1e-13, 100, &terms);
  CHECK(terms == 3);  // degree-2 polynomial: exactly three nonzero terms
  // direct polynomial evaluation
  const double expected = 1.0 + (-2.0 * 0.5 * 1.3) / (1.1 * 2.7) * t +
                          (-2.0 * -1.0) * (0.5 * 1.5) * (1.3 * 2.3) /
                              ((1.1 * 2.1) * (2.7 * 3.7) * 2.0) * t * t;
  CHECK(v == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("2F1(1,1;2;t) = -log(1-t)/t") {
  const double t = 0.5;
  const double v = hypergeometric_series<double>({1.0, 1.0}, {2.0}, t);
  CHECK(v == doctest::Approx(-std::log(1.0 - t) / t).epsilon(1e-13));
  CHECK(v == doctest::Approx(direct_series_2f1(1.0, 1.0, 2.0, t, 200)).epsilon(1e-13));
}

TEST_CASE("extended-precision route agrees with double route") {
  const long double tl = 0.73L;
  const long double vl =
      hypergeometric_series<long double>({0.4L, 1.9L}, {2.3L}, tl, 1e-17L, 2000000);
  const double vd = hypergeometric_series<double>({0.4, 1.9}, {2.3}, 0.73);
  CHECK(static_cast<double>(vl) == doctest::Approx(vd).epsilon(1e-12));
}

TEST_CASE("divergence and domain guards") {
  // Gauss margin c - a - b = -0.5 <= 0: divergent at t = 1
  CHECK_THROWS_AS(hypergeometric_series<double>({1.0, 1.5}, {2.0}, 1.0), SeriesDivergence);
  // slow convergence exhausts maxTerms
  CHECK_THROWS_AS(hypergeometric_series<double>({1.0, 1.0}, {2.5}, 0.999999, 1e-13, 50),
                  SeriesDivergence);
  CHECK_THROWS_AS(hypergeometric_series<double>({1.0}, {2.0}, 1.5), std::domain_error);
}

TEST_CASE("signed log gamma") {
  CHECK(log_gamma_signed(4.5).sign == 1);
  CHECK(std::exp(log_gamma_signed(4.5).logAbs) == doctest::Approx(std::tgamma(4.5)).epsilon(1e-13));
  // Gamma(-0.5) = -2 sqrt(pi)
  const auto g = log_gamma_signed(-0.5);
  CHECK(g.sign == -1);
  CHECK(std::exp(g.logAbs) == doctest::Approx(2.0 * std::sqrt(M_PI)).epsilon(1e-12));
  // Gamma(-1.5) = 4 sqrt(pi)/3 > 0
  CHECK(log_gamma_signed(-1.5).sign == 1);
  CHECK(log_gamma_signed(-2.0).sign == 0);
}

TEST_CASE("pochhammer") {
  CHECK(pochhammer_int(-2.0, 3) == doctest::Approx(0.0));
  CHECK(pochhammer_int(0.5, 3) == doctest::Approx(0.5 * 1.5 * 2.5).epsilon(1e-15));
  CHECK(pochhammer(0.5, 3.0) == doctest::Approx(0.5 * 1.5 * 2.5).epsilon(1e-13));
  // (1)_5 / (2)_5 = 120/720
  CHECK(pochhammer(1.0, 5.0) / pochhammer(2.0, 5.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  // half-integer order: (1/2)_{2.5} = Gamma(3)/Gamma(1/2)
  CHECK(pochhammer(0.5, 2.5) ==
        doctest::Approx(std::tgamma(3.0) / std::tgamma(0.5)).epsilon(1e-12));
}
