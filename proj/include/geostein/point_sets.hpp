#pragma once

// Point-set generators for the three experimental regimes: quasi-uniform
// (Riesz-energy descent from a jittered Fibonacci start), i.i.d. uniform, and
// a Metropolis-Hastings independence sampler targeting p.  All stochastic
// generators are reproducible from a 64-bit seed.

#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "geostein/sphere.hpp"
#include "geostein/targets.hpp"

namespace geostein {

struct RngSeed {
  std::uint64_t seed = 0;
};

struct ChainDiagnostics {
  double acceptanceRate = 0.0;
  long chainLength = 0;
  long burnIn = 0;
};

inline std::vector<UnitVector3> iid_uniform(int n, RngSeed seed) {
  if (n < 1) throw std::invalid_argument("iid_uniform: n must be >= 1");
  std::mt19937_64 rng(seed.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<UnitVector3> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double a = normal(rng), b = normal(rng), c = normal(rng);
    pts.emplace_back(a, b, c);
  }
  return pts;
}

namespace detail {

inline double riesz_energy(const std::vector<Vec3>& x, double s) {
  double e = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      e += 2.0 * std::pow((x[i] - x[j]).norm(), -s);
    }
  }
  return e;
}

inline std::vector<Vec3> riesz_gradient(const std::vector<Vec3>& x, double s) {
  std::vector<Vec3> g(x.size(), Vec3::Zero());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const Vec3 d = x[i] - x[j];
      const double r = d.norm();
      const Vec3 gij = -2.0 * s * std::pow(r, -s - 2.0) * d;
      g[i] += gij;
      g[j] -= gij;
    }
  }
  return g;
}

// Unit vector orthogonal to x, direction seeded by rng.
inline Vec3 random_tangent(const Vec3& x, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    Vec3 t(normal(rng), normal(rng), normal(rng));
    t -= t.dot(x) * x;
    const double n = t.norm();
    if (n > 1e-8) return t / n;
  }
}

}  // namespace detail

// Projected gradient descent on the Riesz energy sum_{i != j} |xi - xj|^{-s},
// initialized at jittered Fibonacci points.  Backtracking keeps the energy
// non-increasing at every accepted step.
inline std::vector<UnitVector3> riesz_minimize(int n, double sRiesz = 1.0, int iters = 500,
                                               RngSeed seed = {}) {
  if (n < 2) throw std::invalid_argument("riesz_minimize: n must be >= 2");
  if (!(sRiesz > 0.0)) throw std::invalid_argument("riesz_minimize: sRiesz must be > 0");
  if (iters < 1) throw std::invalid_argument("riesz_minimize: iters must be >= 1");

  std::mt19937_64 rng(seed.seed);
  std::vector<Vec3> x;
  x.reserve(static_cast<std::size_t>(n));
  for (const auto& p : fibonacci_points(n)) {
    const Vec3 t = detail::random_tangent(p.vec(), rng);
    x.push_back((p.vec() + 1e-2 * t).normalized());
  }

  double energy = detail::riesz_energy(x, sRiesz);
  double step = 1.0 / (n * n);  // grows on acceptance, shrinks on backtracking
  for (int it = 0; it < iters; ++it) {
    const auto grad = detail::riesz_gradient(x, sRiesz);
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      std::vector<Vec3> trial(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        trial[i] = (x[i] - step * grad[i]).normalized();
      }
      const double trialEnergy = detail::riesz_energy(trial, sRiesz);
      if (trialEnergy <= energy) {
        x = std::move(trial);
        energy = trialEnergy;
        step *= 1.5;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent direction left at representable steps
  }

  std::vector<UnitVector3> out;
  out.reserve(x.size());
  for (const auto& p : x) out.emplace_back(p);
  return out;
}

// Metropolis-Hastings independence sampler with the normalized volume
// measure as the proposal: accept y ~ Uniform(S^2) with probability
// min(1, p(y)/p(x)).  Rejections duplicate the current state; duplicate runs
// are collapsed by perturbing each repeat along a seeded random tangent
// direction with geodesic steps of k * 1e-7, keeping the empirical measure
// intact while making the points pairwise distinct.
inline std::pair<std::vector<UnitVector3>, ChainDiagnostics> mh_chain(const TargetDensity& target,
                                                                      int n, int burnIn,
                                                                      RngSeed seed) {
  if (n < 1) throw std::invalid_argument("mh_chain: n must be >= 1");
  if (burnIn < 0) throw std::invalid_argument("mh_chain: burnIn must be >= 0");
  std::mt19937_64 rng(seed.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto propose = [&]() {
    for (;;) {
      const Vec3 v(normal(rng), normal(rng), normal(rng));
      if (v.norm() > 1e-12) return UnitVector3(v);
    }
  };

  UnitVector3 state = propose();
  double logp = target.log_density(state);
  long accepted = 0;
  const long total = static_cast<long>(burnIn) + n;
  std::vector<UnitVector3> kept;
  kept.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < total; ++i) {
    const UnitVector3 cand = propose();
    const double logpCand = target.log_density(cand);
    if (std::log(unif(rng)) < logpCand - logp) {
      state = cand;
      logp = logpCand;
      ++accepted;
    }
    if (i >= burnIn) kept.push_back(state);
  }

  // collapse duplicate runs produced by rejections
  std::size_t runStart = 0;
  for (std::size_t i = 1; i < kept.size(); ++i) {
    if ((kept[i].vec() - kept[runStart].vec()).norm() > 0.0) {
      runStart = i;
      continue;
    }
    const double k = static_cast<double>(i - runStart);
    const Vec3 t = detail::random_tangent(kept[runStart].vec(), rng);
    const double step = k * 1e-7;
    kept[i] = UnitVector3(Vec3(std::cos(step) * kept[runStart].vec() + std::sin(step) * t));
  }

  ChainDiagnostics diag;
  diag.acceptanceRate = static_cast<double>(accepted) / static_cast<double>(total);
  diag.chainLength = n;
  diag.burnIn = burnIn;
  return {std::move(kept), diag};
}

}  // namespace geostein
