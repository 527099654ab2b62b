#pragma once

// Cubature weights, integral estimators and kernel Stein discrepancy.  All
// sigma values are served by the single K_P factorization through the
// Woodbury identity; K_{P,sigma} is never formed.

#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "geostein/errors.hpp"
#include "geostein/stein.hpp"

namespace geostein {

struct CubatureResult {
  Eigen::VectorXd weights;
  double ksd = 0.0;
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double jitterApplied = 0.0;
  Eigen::Index n = 0;
};

struct SigmaEstimatorConfig {
  double sigma = 1.0;

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw std::invalid_argument("SigmaEstimatorConfig: sigma must be finite and positive");
    }
  }
};

// Optimal constrained weights w = K_P^{-1} 1 / (1^T K_P^{-1} 1) and
// KSD = (1^T K_P^{-1} 1)^{-1/2}.
inline CubatureResult solve_weights(const SteinKernelMatrix& K) {
  const Eigen::Index n = K.size();
  const Eigen::VectorXd v = K.solve(Eigen::VectorXd::Ones(n));
  const double s = v.sum();
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DegenerateSystem("solve_weights: 1^T K_P^{-1} 1 is not positive");
  }
  CubatureResult r;
  r.weights = v / s;
  r.ksd = 1.0 / std::sqrt(s);
  r.jitterApplied = K.jitter_applied();
  r.n = n;
  return r;
}

inline double integrate(const CubatureResult& result, const Eigen::VectorXd& fValues) {
  if (fValues.size() != result.weights.size()) {
    throw LengthMismatch("integrate: value vector length mismatch");
  }
  return result.weights.dot(fValues);
}

// sigma-regularized estimator via the Woodbury form
//   I_X(f) = 1^T K_P^{-1} f / (sigma^{-2} + 1^T K_P^{-1} 1);
// converges to integrate() as sigma -> infinity.
inline double integrate_sigma(const SteinKernelMatrix& K, const SigmaEstimatorConfig& cfg,
                              const Eigen::VectorXd& fValues) {
  cfg.validate();
  if (fValues.size() != K.size()) {
    throw LengthMismatch("integrate_sigma: value vector length mismatch");
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(K.size());
  const Eigen::VectorXd v1 = K.solve(ones);
  const double s = v1.sum();
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DegenerateSystem("integrate_sigma: 1^T K_P^{-1} 1 is not positive");
  }
  const double t = K.solve(fValues).sum();
  return t / (1.0 / (cfg.sigma * cfg.sigma) + s);
}

// KSD of arbitrary weights, sqrt(w^T K_P w); negative round-off clamps to 0.
inline double ksd_of_weights(const SteinKernelMatrix& K, const Eigen::VectorXd& w) {
  if (w.size() != K.size()) throw LengthMismatch("ksd_of_weights: weight length mismatch");
  const double q = w.dot(K.matrix() * w);
  return std::sqrt(std::max(0.0, q));
}

}  // namespace geostein
