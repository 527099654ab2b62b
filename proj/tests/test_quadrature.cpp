#include <doctest.h>

#include <cmath>

#include "geostein/quadrature.hpp"
#include "geostein/targets.hpp"

using namespace geostein;

namespace {

double double_factorial(int n) {
  double v = 1.0;
  for (int k = n; k > 1; k -= 2) v *= k;
  return v;
}

// Int over S^2 of x1^a x2^b x3^c: zero for any odd exponent, otherwise
// 4 pi (a-1)!!(b-1)!!(c-1)!!/(a+b+c+1)!!.
double monomial_integral(int a, int b, int c) {
  if (a % 2 || b % 2 || c % 2) return 0.0;
  return 4.0 * kPi * double_factorial(a - 1) * double_factorial(b - 1) *
         double_factorial(c - 1) / double_factorial(a + b + c + 1);
}

}  // namespace

TEST_CASE("reference integral basics") {
  CHECK(reference_integral([](const UnitVector3&) { return 1.0; }, 16) ==
        doctest::Approx(4.0 * kPi).epsilon(1e-13));
  CHECK(std::abs(reference_integral([](const UnitVector3& x) { return x.x3(); }, 16)) < 1e-12);
  CHECK(reference_integral([](const UnitVector3& x) { return x.x3() * x.x3(); }, 16) ==
        doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-10));
}

TEST_CASE("grid integrates monomials of degree <= 7 exactly at m = 8") {
  for (int a = 0; a <= 7; ++a) {
    for (int b = 0; a + b <= 7; ++b) {
      for (int c = 0; a + b + c <= 7; ++c) {
        const double got = reference_integral(
            [a, b, c](const UnitVector3& x) {
              return std::pow(x.x1(), a) * std::pow(x.x2(), b) * std::pow(x.x3(), c);
            },
            8);
        CHECK(std::abs(got - monomial_integral(a, b, c)) < 1e-12);
      }
    }
  }
}

TEST_CASE("doubling the resolution leaves smooth integrals fixed") {
  auto smooth = [](const UnitVector3& x) {
    return std::exp(x.x3()) + std::sin(3.0 * x.x1()) * std::cos(2.0 * x.x2());
  };
  const double a = reference_integral(smooth, 200);
  const double b = reference_integral(smooth, 400);
  CHECK(std::abs(a - b) < 1e-10);
}

TEST_CASE("reference expectation") {
  const auto t = vmf_target(Vec3(0, 0, 2));
  CHECK(reference_expectation(t, [](const UnitVector3&) { return 1.0; }, 64) ==
        doctest::Approx(1.0).epsilon(1e-14));
  // E[c.x/kappa] = coth(2) - 1/2
  CHECK(reference_expectation(t, [](const UnitVector3& x) { return x.x3(); }, 200) ==
        doctest::Approx(0.5373147207275481).epsilon(1e-10));
  CHECK(std::abs(reference_expectation(t, [](const UnitVector3& x) { return x.x1(); }, 200)) <
        1e-10);
  // cross-check against the closed-form normalizer
  const double byNormalizer =
      reference_integral(
          [](const UnitVector3& x) { return x.x3() * std::exp(2.0 * x.x3()); }, 200) *
      vmf_normalizer(2.0);
  CHECK(reference_expectation(t, [](const UnitVector3& x) { return x.x3(); }, 200) ==
        doctest::Approx(byNormalizer).epsilon(1e-12));
}

TEST_CASE("vmf normalizer limits") {
  CHECK(vmf_normalizer(0.0) == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-9));
  CHECK(vmf_normalizer(2.0) == doctest::Approx(2.0 / (4.0 * kPi * std::sinh(2.0))).epsilon(1e-14));
}
