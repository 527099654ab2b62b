#pragma once

// Unnormalized target densities on S^2.  A target exposes the gradient of a
// smooth ambient extension of log p; tangential projection is performed by
// the Stein operator.  The von Mises-Fisher family log p(x) = c.x (constant
// dropped) has constant extension gradient c, which the closed-form Stein
// kernel path requires.

#include <cmath>
#include <functional>
#include <optional>
#include <utility>

#include <Eigen/Core>

#include "geostein/quadrature.hpp"
#include "geostein/sphere.hpp"

namespace geostein {

struct TargetDensity {
  std::function<double(const UnitVector3&)> log_density;   // unnormalized log p
  std::function<Vec3(const UnitVector3&)> grad_log;        // ambient extension gradient
  int smoothness_order = 4;                                // declared C^{s+1} class
  // Set when log p(x) = linear_coeff . x; enables the closed-form Stein path.
  std::optional<Vec3> linear_coeff;
};

inline TargetDensity vmf_target(const Vec3& c) {
  TargetDensity t;
  t.log_density = [c](const UnitVector3& x) { return c.dot(x.vec()); };
  t.grad_log = [c](const UnitVector3&) { return c; };
  t.smoothness_order = 100;  // entire function
  t.linear_coeff = c;
  return t;
}

inline TargetDensity uniform_target() { return vmf_target(Vec3::Zero()); }

// Normalizing constant kappa / (4 pi sinh kappa) of the vMF density with
// respect to V; oracle use only.  Series form near kappa = 0.
inline double vmf_normalizer(double kappa) {
  if (kappa < 1e-6) {
    return 1.0 / (4.0 * kPi * (1.0 + kappa * kappa / 6.0));
  }
  return kappa / (4.0 * kPi * std::sinh(kappa));
}

// Rotated target t'(x) = t(R^T x); used to move chart-based computations away
// from the excluded set while leaving all intrinsic quantities unchanged.
inline TargetDensity rotated_target(const TargetDensity& t, const Eigen::Matrix3d& R) {
  TargetDensity out;
  const Eigen::Matrix3d Rt = R.transpose();
  auto logd = t.log_density;
  auto grad = t.grad_log;
  out.log_density = [logd, Rt](const UnitVector3& x) { return logd(UnitVector3(Vec3(Rt * x.vec()))); };
  out.grad_log = [grad, R, Rt](const UnitVector3& x) {
    return Vec3(R * grad(UnitVector3(Vec3(Rt * x.vec()))));
  };
  out.smoothness_order = t.smoothness_order;
  if (t.linear_coeff) out.linear_coeff = Vec3(R * (*t.linear_coeff));
  return out;
}

struct ChartPartials {
  double dq1 = 0, dq2 = 0;        // first order
  double dq1q1 = 0, dq1q2 = 0, dq2q2 = 0;  // second order (order == 2 only)
};

// Partial derivatives of log p composed with the chart, by the chain rule
// through the ambient extension.  Second order assumes the extension gradient
// is constant (vMF family: the ambient Hessian is zero), which is the only
// case the shipped targets need.
inline ChartPartials chart_log_density_partials(const TargetDensity& t, const ChartPoint& q,
                                                int order) {
  if (order != 1 && order != 2) {
    throw std::invalid_argument("chart_log_density_partials: order must be 1 or 2");
  }
  const UnitVector3 x = from_chart(q);
  const Vec3 g = t.grad_log(x);
  ChartPartials p;
  p.dq1 = g.dot(chart_d1(q));
  p.dq2 = g.dot(chart_d2(q));
  if (order == 2) {
    if (!t.linear_coeff) {
      throw UnsupportedTarget(
          "chart_log_density_partials: second order requires a constant extension gradient");
    }
    p.dq1q1 = g.dot(chart_d11(q));
    p.dq1q2 = g.dot(chart_d12(q));
    p.dq2q2 = g.dot(chart_d22(q));
  }
  return p;
}

// Int (v.x) dP for the vMF target with parameter c, by the reference
// quadrature grid (not a baked-in closed form).
inline double vmf_expected_linear(const Vec3& c, const Vec3& v, int m = 200) {
  if (c.norm() == 0.0) return 0.0;
  return reference_expectation_logp(
      [&c](const UnitVector3& x) { return c.dot(x.vec()); },
      [&v](const UnitVector3& x) { return v.dot(x.vec()); }, m);
}

inline double reference_expectation(const TargetDensity& t, const AmbientFn& f, int m) {
  return reference_expectation_logp(t.log_density, f, m);
}

}  // namespace geostein
