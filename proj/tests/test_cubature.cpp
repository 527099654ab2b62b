#include <doctest.h>

#include <cmath>
#include <random>

#include "geostein/cubature.hpp"
#include "geostein/point_sets.hpp"

using namespace geostein;

namespace {

SteinOperatorConfig vmf_cfg(const Vec3& c) {
  SteinOperatorConfig cfg;
  cfg.target = vmf_target(c);
  return cfg;
}

}  // namespace

TEST_CASE("solve_weights on tiny systems") {
  const auto cfg = vmf_cfg(Vec3(0, 0, 2));
  const K1Profile k1(3.5, 2);
  SUBCASE("n = 1: unit weight, ksd = sqrt(k_P(x,x))") {
    const UnitVector3 x = from_chart({0.9, 1.2});
    const auto K = assemble_KP(cfg, k1, {x});
    const auto r = solve_weights(K);
    CHECK(r.weights[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.ksd == doctest::Approx(std::sqrt(K.matrix()(0, 0))).epsilon(1e-12));
  }
  SUBCASE("antipodal pair has equal diagonal and half weights") {
    const UnitVector3 x = from_chart({0.9, 1.2});
    const UnitVector3 xOpp{Vec3(-x.vec())};
    const auto K = assemble_KP(cfg, k1, {x, xOpp});
    CHECK(K.matrix()(0, 0) == doctest::Approx(K.matrix()(1, 1)).epsilon(1e-12));
    const auto r = solve_weights(K);
    CHECK(r.weights[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(r.weights[1] == doctest::Approx(0.5).epsilon(1e-10));
  }
}

TEST_CASE("ksd equals the quadratic form of the optimal weights") {
  const auto cfg = vmf_cfg(Vec3(0, 0, 2));
  const K1Profile k1(3.5, 2);
  const auto X = fibonacci_points(100);
  const auto K = assemble_KP(cfg, k1, X);
  const auto r = solve_weights(K);
  CHECK(r.weights.sum() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(ksd_of_weights(K, r.weights) == doctest::Approx(r.ksd).epsilon(1e-8));
}

TEST_CASE("optimal weights minimize the ksd over zero-sum perturbations") {
  const auto cfg = vmf_cfg(Vec3(0, 0, 2));
  const K1Profile k1(3.5, 2);
  const auto X = fibonacci_points(40);
  const auto K = assemble_KP(cfg, k1, X);
  const auto r = solve_weights(K);
  const double base = ksd_of_weights(K, r.weights);
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd delta(40);
    for (int i = 0; i < 40; ++i) delta[i] = g(rng);
    delta.array() -= delta.mean();  // zero-sum keeps the constraint
    delta *= 1e-3 / delta.norm();
    CHECK(ksd_of_weights(K, r.weights + delta) >= base - 1e-12);
  }
}

TEST_CASE("uniform weights on mcmc points are suboptimal") {
  const auto cfg = vmf_cfg(Vec3(0, 0, 2));
  const K1Profile k1(3.5, 2);
  const auto [X, diag] = mh_chain(cfg.target, 100, 10, {4});
  const auto K = assemble_KP(cfg, k1, X);
  const auto r = solve_weights(K);
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(100, 0.01);
  const double ksdUniform = ksd_of_weights(K, uniform);
  CHECK(std::isfinite(ksdUniform));
  CHECK(ksdUniform > r.ksd);
}

TEST_CASE("ksd is monotone under nested point sets") {
  const auto cfg = vmf_cfg(Vec3(0, 0, 2));
  const K1Profile k1(3.5, 2);
  const auto big = fibonacci_points(100);
  const std::vector<UnitVector3> small(big.begin(), big.begin() + 50);
  const double ksdSmall = solve_weights(assemble_KP(cfg, k1, small)).ksd;
  const double ksdBig = solve_weights(assemble_KP(cfg, k1, big)).ksd;
  CHECK(ksdBig <= ksdSmall + 1e-12);
}

TEST_CASE("integrate") {
  const auto cfg = vmf_cfg(Vec3(0, 0, 2));
  const K1Profile k1(3.5, 2);
  const auto X = fibonacci_points(50);
  const auto K = assemble_KP(cfg, k1, X);
  const auto r = solve_weights(K);
  SUBCASE("constants are exact") {
    const Eigen::VectorXd f = Eigen::VectorXd::Constant(50, 7.0);
    CHECK(integrate(r, f) == doctest::Approx(7.0).epsilon(1e-9));
  }
  SUBCASE("length mismatch is rejected") {
    CHECK_THROWS_AS(integrate(r, Eigen::VectorXd::Ones(49)), LengthMismatch);
  }
  SUBCASE("worst-case bound holds for centered integrands") {
    // |I_X(f) - xi| <= ksd * |f - xi|_{H(k_P)} with the RKHS norm surrogate
    // sqrt(g^T K_P^{-1} g), g = f - I_X(f) 1
    Eigen::VectorXd f(50);
    for (int i = 0; i < 50; ++i) f[i] = std::sin(2.0 * X[i].x1()) + X[i].x3() * X[i].x3();
    const double est = integrate(r, f);
    const Eigen::VectorXd g = f - est * Eigen::VectorXd::Ones(50);
    const double norm = std::sqrt(std::max(0.0, g.dot(K.solve(g))));
    const double truth = reference_expectation(
        cfg.target,
        [](const UnitVector3& x) { return std::sin(2.0 * x.x1()) + x.x3() * x.x3(); }, 200);
    CHECK(std::abs(est - truth) <= r.ksd * norm + 1e-12);
  }
}

TEST_CASE("integrate_sigma: scalar Woodbury case") {
  const auto cfg = vmf_cfg(Vec3(0, 0, 2));
  const K1Profile k1(3.5, 2);
  const UnitVector3 x = from_chart({0.9, 1.2});
  const auto K = assemble_KP(cfg, k1, {x});
  Eigen::VectorXd f(1);
  f[0] = 2.5;
  CHECK(integrate_sigma(K, {1.0}, f) ==
        doctest::Approx(f[0] / (1.0 + K.matrix()(0, 0))).epsilon(1e-12));
  CHECK(integrate_sigma(K, {1.0}, Eigen::VectorXd::Zero(1)) == doctest::Approx(0.0));
}

TEST_CASE("integrate_sigma converges to the limit estimator at rate 1/sigma^2") {
  const auto cfg = vmf_cfg(Vec3(0, 0, 2));
  const K1Profile k1(3.5, 2);
  const auto X = fibonacci_points(100);
  const auto K = assemble_KP(cfg, k1, X);
  const auto r = solve_weights(K);
  Eigen::VectorXd f(100);
  for (int i = 0; i < 100; ++i) f[i] = X[i].x3();
  const double limit = integrate(r, f);
  const double d3 = std::abs(integrate_sigma(K, {1e3}, f) - limit) * 1e6;
  const double d4 = std::abs(integrate_sigma(K, {1e4}, f) - limit) * 1e8;
  CHECK(d3 / d4 > 80.0 / 100.0);
  CHECK(d3 / d4 < 120.0 / 100.0);
}
