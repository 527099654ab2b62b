#pragma once

// The Riemannian-Stein operator tau h = div(p grad h)/p on S^2 and the Stein
// kernel k_P(x,y) = tau' tau k(x,y).
//
// Two computation paths are kept permanently:
//   - a closed form in u = x.y for targets with constant ambient-extension
//     gradient (vMF family), derived by applying the sphere identities
//     grad_y u = x - u y, grad_y b = c - b y, Delta(linear) = -2 linear to
//     G(u, b) = tau_x psi, and
//   - a finite-difference oracle that applies the chart-coordinate operator
//     formula twice with nested central differences.
// The closed form is gated on the oracle in the test suite.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "geostein/errors.hpp"
#include "geostein/profiles.hpp"
#include "geostein/sphere.hpp"
#include "geostein/targets.hpp"

namespace geostein {

enum class SteinVariant {
  DivergenceForm,    // tau h = div(p grad h) / p
  GradientWeightForm  // reserved: integrand-weighted variant, not implemented
};

struct SteinOperatorConfig {
  TargetDensity target;
  SteinVariant variant = SteinVariant::DivergenceForm;
  double fdStep = 1e-4;

  void validate() const {
    if (variant != SteinVariant::DivergenceForm) {
      throw UnsupportedTarget("SteinOperatorConfig: only the divergence-form operator is implemented");
    }
    if (!(fdStep >= 1e-6 && fdStep <= 1e-2)) {
      throw std::invalid_argument("SteinOperatorConfig: fdStep must lie in [1e-6, 1e-2]");
    }
  }
};

// A scalar field with chart-coordinate partials up to second order (only the
// diagonal second derivatives enter the operator).
struct ChartField {
  std::function<double(const ChartPoint&)> value;
  std::function<Eigen::Vector2d(const ChartPoint&)> grad;       // (d/dq1, d/dq2)
  std::function<Eigen::Vector2d(const ChartPoint&)> diag_hess;  // (d2/dq1^2, d2/dq2^2)
};

// Chart field from analytic ambient data of a smooth extension h: R^3 -> R.
inline ChartField chart_field_from_ambient(std::function<double(const Vec3&)> value,
                                           std::function<Vec3(const Vec3&)> grad,
                                           std::function<Eigen::Matrix3d(const Vec3&)> hess) {
  ChartField f;
  f.value = [value](const ChartPoint& q) { return value(from_chart(q).vec()); };
  f.grad = [grad](const ChartPoint& q) {
    const Vec3 g = grad(from_chart(q).vec());
    return Eigen::Vector2d(g.dot(chart_d1(q)), g.dot(chart_d2(q)));
  };
  f.diag_hess = [grad, hess](const ChartPoint& q) {
    const Vec3 x = from_chart(q).vec();
    const Vec3 g = grad(x);
    const Eigen::Matrix3d H = hess(x);
    const Vec3 d1 = chart_d1(q), d2 = chart_d2(q);
    const double h11 = d1.dot(H * d1) + g.dot(chart_d11(q));
    const double h22 = d2.dot(H * d2) + g.dot(chart_d22(q));
    return Eigen::Vector2d(h11, h22);
  };
  return f;
}

// Chart field with partials by central differences of an ambient function.
inline ChartField chart_field_fd(std::function<double(const Vec3&)> value, double step = 1e-5) {
  ChartField f;
  auto at = [value](double q1, double q2) {
    return value(from_chart({q1, q2}).vec());
  };
  f.value = [at](const ChartPoint& q) { return at(q.q1, q.q2); };
  f.grad = [at, step](const ChartPoint& q) {
    return Eigen::Vector2d((at(q.q1 + step, q.q2) - at(q.q1 - step, q.q2)) / (2 * step),
                           (at(q.q1, q.q2 + step) - at(q.q1, q.q2 - step)) / (2 * step));
  };
  f.diag_hess = [at, step](const ChartPoint& q) {
    const double c = at(q.q1, q.q2);
    return Eigen::Vector2d(
        (at(q.q1 + step, q.q2) - 2 * c + at(q.q1 - step, q.q2)) / (step * step),
        (at(q.q1, q.q2 + step) - 2 * c + at(q.q1, q.q2 - step)) / (step * step));
  };
  return f;
}

// tau h at q, by the chart-coordinate formula
//   tau h = (cos q2/sin q2) h_q2
//         + (1/sin^2 q2) [ (dlogp/dq1) h_q1 + h_q1q1 ]
//         + (dlogp/dq2) h_q2 + h_q2q2.
inline double apply_tau_chart(const SteinOperatorConfig& cfg, const ChartField& h,
                              const ChartPoint& q) {
  cfg.validate();
  const UnitVector3 x = from_chart(q);
  if (excluded_set_distance(x) <= kPoleTol) {
    throw ChartDomainError("apply_tau_chart: point too close to the excluded set");
  }
  const double s = std::sin(q.q2);
  const Eigen::Vector2d g = h.grad(q);
  const Eigen::Vector2d hd = h.diag_hess(q);
  const ChartPartials lp = chart_log_density_partials(cfg.target, q, 1);
  return (std::cos(q.q2) / s) * g.y() + (lp.dq1 * g.x() + hd.x()) / (s * s) +
         (lp.dq2 * g.y() + hd.y());
}

namespace detail {

inline Vec3 require_linear_coeff(const SteinOperatorConfig& cfg) {
  if (!cfg.target.linear_coeff) {
    throw UnsupportedTarget(
        "stein closed form requires a target with constant ambient-extension gradient; "
        "use the finite-difference path instead");
  }
  return *cfg.target.linear_coeff;
}

// Switch to the coincident-point limit once 1 - u drops below this.
inline constexpr double kCoincidentTol = 1e-10;

}  // namespace detail

// tau applied to the first kernel argument:
//   tau_x psi(x.y) = (1-u^2) psi''(u) - 2u psi'(u) + (c.y - u c.x) psi'(u).
inline double tau_x_kernel(const SteinOperatorConfig& cfg, const RadialProfile& profile,
                           const UnitVector3& x, const UnitVector3& y) {
  cfg.validate();
  const Vec3 c = detail::require_linear_coeff(cfg);
  const double u = std::clamp(dot(x, y), -1.0, 1.0);
  const double a = c.dot(x.vec());
  const double b = c.dot(y.vec());
  const double p1 = profile.eval(u, 1);
  const double p2 = profile.eval(u, 2);
  return (1.0 - u * u) * p2 + (b - u * a - 2.0 * u) * p1;
}

// Closed-form Stein kernel k_P(x,y) = tau' tau k(x,y) for targets with
// constant extension gradient c.  With a = c.x, b = c.y:
//   k_P = (1-u^2)^2 psi''''
//       + (1-u^2) [ (a+b)(1-u) - 8u ] psi'''
//       + [ ab(1+u^2) - u(a^2+b^2) + 4u(u-1)(a+b) + 14u^2 - 6 ] psi''
//       + [ |c|^2 - a^2 - b^2 + u ab + 2(u-1)(a+b) + 4u ] psi'.
// Near u = 1 the psi''' and psi'''' products vanish in the limit and are
// dropped; their factors would otherwise be 0 * inf for profiles whose high
// derivatives blow up at coincidence.
inline double stein_kernel(const SteinOperatorConfig& cfg, const RadialProfile& profile,
                           const UnitVector3& x, const UnitVector3& y) {
  cfg.validate();
  const Vec3 c = detail::require_linear_coeff(cfg);
  const double u = std::clamp(dot(x, y), -1.0, 1.0);
  const double a = c.dot(x.vec());
  const double b = c.dot(y.vec());
  const double cc = c.squaredNorm();
  const double omu2 = 1.0 - u * u;

  const double coef2 =
      a * b * (1.0 + u * u) - u * (a * a + b * b) + 4.0 * u * (u - 1.0) * (a + b) +
      14.0 * u * u - 6.0;
  const double coef1 =
      cc - a * a - b * b + u * a * b + 2.0 * (u - 1.0) * (a + b) + 4.0 * u;

  const double p1 = profile.eval(u, 1);
  const double p2 = profile.eval(u, 2);
  if (1.0 - u < detail::kCoincidentTol) {
    return coef2 * p2 + coef1 * p1;
  }
  const double p3 = profile.eval(u, 3);
  const double p4 = profile.eval(u, 4);
  return omu2 * omu2 * p4 + omu2 * ((a + b) * (1.0 - u) - 8.0 * u) * p3 + coef2 * p2 +
         coef1 * p1;
}

namespace detail {

struct Vec3L {
  long double x, y, z;
};

inline Vec3L from_chart_l(long double q1, long double q2) {
  const long double s = std::sin(q2);
  return {std::cos(q1) * s, std::sin(q1) * s, std::cos(q2)};
}

inline long double dot_l(const Vec3L& a, const Vec3L& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

}  // namespace detail

// Finite-difference oracle for k_P: the chart-coordinate operator formula is
// applied in x and then in y with nested central differences of step h,
// Richardson-extrapolated once (evaluations at h and h/2).  Frames are
// rotated so both points sit well inside the chart (the 1/sin^2 q2 factors
// would otherwise amplify the differencing noise), and the profile is
// evaluated in extended precision because the nested second differences
// divide its rounding error by h^4.
inline double stein_kernel_fd(const SteinOperatorConfig& cfg, const RadialProfile& profile,
                              const UnitVector3& x, const UnitVector3& y) {
  cfg.validate();
  const long double h0 = cfg.fdStep;
  const double margin = std::max(0.25, 16.0 * cfg.fdStep);
  const Eigen::Matrix3d R = find_safe_rotation(x, y, margin);
  const UnitVector3 xr{Vec3(R * x.vec())};
  const UnitVector3 yr{Vec3(R * y.vec())};
  const TargetDensity target = rotated_target(cfg.target, R);
  const ChartPoint qxd = to_chart(xr);
  const ChartPoint qyd = to_chart(yr);
  const long double qx1 = qxd.q1, qx2 = qxd.q2, qy1 = qyd.q1, qy2 = qyd.q2;

  using detail::from_chart_l;
  using LD = long double;
  auto lp_partials = [&](LD q1, LD q2) {
    const detail::Vec3L p = from_chart_l(q1, q2);
    const Vec3 g = target.grad_log(UnitVector3(static_cast<double>(p.x), static_cast<double>(p.y),
                                               static_cast<double>(p.z)));
    const detail::Vec3L d1{-std::sin(q1) * std::sin(q2), std::cos(q1) * std::sin(q2), 0.0L};
    const detail::Vec3L d2{std::cos(q1) * std::cos(q2), std::sin(q1) * std::cos(q2),
                           -std::sin(q2)};
    return std::pair<LD, LD>{g.x() * d1.x + g.y() * d1.y + g.z() * d1.z,
                             g.x() * d2.x + g.y() * d2.y + g.z() * d2.z};
  };
  auto tau_fd = [&](const std::function<LD(LD, LD)>& f, LD q1, LD q2, LD h) -> LD {
    const LD c0 = f(q1, q2);
    const LD fp1 = f(q1 + h, q2), fm1 = f(q1 - h, q2);
    const LD fp2 = f(q1, q2 + h), fm2 = f(q1, q2 - h);
    const LD d1 = (fp1 - fm1) / (2 * h);
    const LD d2 = (fp2 - fm2) / (2 * h);
    const LD d11 = (fp1 - 2 * c0 + fm1) / (h * h);
    const LD d22 = (fp2 - 2 * c0 + fm2) / (h * h);
    const auto lp = lp_partials(q1, q2);
    const LD s = std::sin(q2);
    return (std::cos(q2) / s) * d2 + (lp.first * d1 + d11) / (s * s) + (lp.second * d2 + d22);
  };
  auto nested = [&](LD h) -> LD {
    std::function<LD(LD, LD)> inner = [&](LD b1, LD b2) -> LD {
      const detail::Vec3L yb = from_chart_l(b1, b2);
      std::function<LD(LD, LD)> slice = [&](LD a1, LD a2) -> LD {
        return profile.value_ld(detail::dot_l(from_chart_l(a1, a2), yb));
      };
      return tau_fd(slice, qx1, qx2, h);
    };
    return tau_fd(inner, qy1, qy2, h);
  };
  const LD coarse = nested(h0);
  const LD fine = nested(h0 / 2);
  return static_cast<double>((4 * fine - coarse) / 3);
}

// --- Stein kernel matrix ----------------------------------------------------

class SteinKernelMatrix {
 public:
  SteinKernelMatrix(Eigen::MatrixXd kp, double jitter, Eigen::LLT<Eigen::MatrixXd> llt)
      : kp_(std::move(kp)), jitter_(jitter), llt_(std::move(llt)) {}

  // Operative matrix: entries of k_P plus any diagonal jitter.
  const Eigen::MatrixXd& matrix() const { return kp_; }
  double jitter_applied() const { return jitter_; }
  Eigen::Index size() const { return kp_.rows(); }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    if (rhs.size() != kp_.rows()) throw LengthMismatch("SteinKernelMatrix::solve: size mismatch");
    return llt_.solve(rhs);
  }

 private:
  Eigen::MatrixXd kp_;
  double jitter_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Assembles K_P over the point set and attaches an SPD factorization.  On
// factorization failure, diagonal jitter eps * mean(diag) is added with eps
// starting at 1e-10 and doubling at most 20 times.
inline SteinKernelMatrix assemble_KP(const SteinOperatorConfig& cfg, const RadialProfile& profile,
                                     const std::vector<UnitVector3>& X) {
  cfg.validate();
  const Eigen::Index n = static_cast<Eigen::Index>(X.size());
  if (n == 0) throw EmptyPointSet("assemble_KP: empty point set");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (geodesic_distance(X[i], X[j]) <= 1e-8) {
        throw DuplicatePoints("assemble_KP: points must be pairwise distinct");
      }
    }
  }
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = stein_kernel(cfg, profile, X[i], X[j]);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  const double meanDiag = K.diagonal().mean();
  double jitter = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) {
    double eps = 1e-10;
    for (int attempt = 0; attempt < 20; ++attempt, eps *= 2.0) {
      jitter = eps * meanDiag;
      llt.compute(K + jitter * Eigen::MatrixXd::Identity(n, n));
      if (llt.info() == Eigen::Success) {
        K.diagonal().array() += jitter;
        return SteinKernelMatrix(std::move(K), jitter, std::move(llt));
      }
    }
    throw FactorizationFailure("assemble_KP: factorization failed after jitter cap");
  }
  return SteinKernelMatrix(std::move(K), 0.0, std::move(llt));
}

// |Int tau h dP| / Int |tau h| dP evaluated on the reference grid; measures
// how far the operator is from integrating to zero under P.
inline double stein_identity_residual(const SteinOperatorConfig& cfg, const ChartField& h,
                                      int m) {
  cfg.validate();
  const ProductGrid grid(m);
  const std::size_t n = grid.nodes.size();
  std::vector<double> lp(n);
  double lpMax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    lp[i] = cfg.target.log_density(grid.nodes[i]);
    lpMax = std::max(lpMax, lp[i]);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double tauh = apply_tau_chart(cfg, h, to_chart(grid.nodes[i]));
    const double w = grid.weights[i] * std::exp(lp[i] - lpMax);
    num += w * tauh;
    den += w * std::abs(tauh);
  }
  if (den == 0.0) return 0.0;
  return std::abs(num) / den;
}

}  // namespace geostein
