#pragma once

// Geometry of the unit sphere S^2 embedded in R^3: the spherical coordinate
// patch (q1, q2) -> (cos q1 sin q2, sin q1 sin q2, cos q2), its metric frame,
// geodesic distances and fill-distance estimation.
//
// Ambient unit vectors are the canonical representation; chart coordinates
// are derived on demand and exclude the half great circle through both poles
// and (1,0,0).

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "geostein/errors.hpp"

namespace geostein {

using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kPoleTol = 1e-9;  // chordal margin to the excluded set

class UnitVector3 {
 public:
  UnitVector3() : v_(0, 0, 1) {}
  explicit UnitVector3(const Vec3& v) : v_(v) {
    const double n = v_.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw std::invalid_argument("UnitVector3: cannot normalize zero or non-finite vector");
    }
    v_ /= n;
  }
  UnitVector3(double x1, double x2, double x3) : UnitVector3(Vec3(x1, x2, x3)) {}

  const Vec3& vec() const { return v_; }
  operator const Vec3&() const { return v_; }
  double x1() const { return v_.x(); }
  double x2() const { return v_.y(); }
  double x3() const { return v_.z(); }

 private:
  Vec3 v_;
};

inline double dot(const UnitVector3& a, const UnitVector3& b) {
  return a.vec().dot(b.vec());
}

struct ChartPoint {
  double q1 = 0.0;  // in (0, 2*pi)
  double q2 = 0.0;  // in (0, pi)
};

struct ChartFrame {
  Eigen::Matrix2d G;    // diag(sin^2 q2, 1)
  double sqrtDetG = 0;  // sin q2
};

// Chordal distance from x to the excluded half great circle
// { (sin s, 0, cos s) : s in [0, pi] }.  For x1 >= 0 the closest point is the
// meridian projection, otherwise one of the poles.
inline double excluded_set_distance(const UnitVector3& p) {
  const Vec3& x = p.vec();
  double best;
  if (x.x() >= 0.0) {
    best = std::sqrt(std::max(0.0, 1.0 - x.y() * x.y()));
  } else {
    best = std::abs(x.z());
  }
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * best));
}

inline ChartPoint to_chart(const UnitVector3& p) {
  if (excluded_set_distance(p) <= kPoleTol) {
    throw ChartDomainError("to_chart: point lies on or near the excluded half great circle");
  }
  const Vec3& x = p.vec();
  ChartPoint q;
  q.q2 = std::acos(std::clamp(x.z(), -1.0, 1.0));
  q.q1 = std::atan2(x.y(), x.x());
  if (q.q1 <= 0.0) q.q1 += 2.0 * kPi;
  return q;
}

inline UnitVector3 from_chart(const ChartPoint& q) {
  const double s2 = std::sin(q.q2);
  return UnitVector3(std::cos(q.q1) * s2, std::sin(q.q1) * s2, std::cos(q.q2));
}

inline double geodesic_distance(const UnitVector3& a, const UnitVector3& b) {
  return std::acos(std::clamp(dot(a, b), -1.0, 1.0));
}

inline double chordal_distance(const UnitVector3& a, const UnitVector3& b) {
  return (a.vec() - b.vec()).norm();
}

inline ChartFrame chart_frame(const ChartPoint& q) {
  ChartFrame f;
  const double s = std::sin(q.q2);
  f.G << s * s, 0.0, 0.0, 1.0;
  f.sqrtDetG = s;
  return f;
}

// Tangent basis and its derivatives for the coordinate patch.
inline Vec3 chart_d1(const ChartPoint& q) {  // d(phi^-1)/dq1
  return Vec3(-std::sin(q.q1) * std::sin(q.q2), std::cos(q.q1) * std::sin(q.q2), 0.0);
}
inline Vec3 chart_d2(const ChartPoint& q) {  // d(phi^-1)/dq2
  return Vec3(std::cos(q.q1) * std::cos(q.q2), std::sin(q.q1) * std::cos(q.q2), -std::sin(q.q2));
}
inline Vec3 chart_d11(const ChartPoint& q) {
  return Vec3(-std::cos(q.q1) * std::sin(q.q2), -std::sin(q.q1) * std::sin(q.q2), 0.0);
}
inline Vec3 chart_d12(const ChartPoint& q) {
  return Vec3(-std::sin(q.q1) * std::cos(q.q2), std::cos(q.q1) * std::cos(q.q2), 0.0);
}
inline Vec3 chart_d22(const ChartPoint& q) {
  return -from_chart(q).vec();
}

// Deterministic spherical Fibonacci lattice; doubles as the probe grid.
inline std::vector<UnitVector3> fibonacci_points(int n) {
  if (n < 1) throw std::invalid_argument("fibonacci_points: n must be >= 1");
  std::vector<UnitVector3> pts;
  pts.reserve(static_cast<std::size_t>(n));
  const double golden = kPi * (std::sqrt(5.0) + 1.0);
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double theta = golden * i;
    pts.emplace_back(r * std::cos(theta), r * std::sin(theta), z);
  }
  return pts;
}

// Lower bound on the fill distance h_X = sup_x min_i d(x, x_i), evaluated on
// an nProbe-point Fibonacci probe grid.
inline double estimate_fill_distance(const std::vector<UnitVector3>& X, int nProbe) {
  if (X.empty()) throw EmptyPointSet("estimate_fill_distance: empty point set");
  if (nProbe < static_cast<int>(X.size())) {
    throw std::invalid_argument("estimate_fill_distance: nProbe must be >= |X|");
  }
  const auto probes = fibonacci_points(nProbe);
  double h = 0.0;
  for (const auto& p : probes) {
    double best = -1.0;  // track max dot = min distance
    for (const auto& x : X) best = std::max(best, dot(p, x));
    h = std::max(h, std::acos(std::clamp(best, -1.0, 1.0)));
  }
  return h;
}

// Rotation taking both points a safe chordal margin away from the excluded
// set; used by chart-based finite differencing.  Tries the identity first,
// then a fixed cycle of rotations.
inline Eigen::Matrix3d find_safe_rotation(const UnitVector3& x, const UnitVector3& y,
                                          double margin) {
  auto ok = [&](const Eigen::Matrix3d& R) {
    return excluded_set_distance(UnitVector3(Vec3(R * x.vec()))) > margin &&
           excluded_set_distance(UnitVector3(Vec3(R * y.vec()))) > margin;
  };
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  if (ok(R)) return R;
  for (int i = 1; i <= 64; ++i) {
    const double ang1 = 0.61803398874989484 * i;  // golden-ratio sweep
    const double ang2 = 0.41421356237309515 * i;
    R = (Eigen::AngleAxisd(ang1, Vec3::UnitZ()) * Eigen::AngleAxisd(ang2, Vec3::UnitX()))
            .toRotationMatrix();
    if (ok(R)) return R;
  }
  throw ChartDomainError("find_safe_rotation: no safe rotation found");
}

// --- point-set file format --------------------------------------------------
// Header line "# unit-vectors d=3 n=<count>", then one point per line with
// three space-separated decimal floats.

inline void write_point_set(const std::filesystem::path& path,
                            const std::vector<UnitVector3>& X) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_point_set: cannot open " + path.string());
  out << "# unit-vectors d=3 n=" << X.size() << "\n";
  out.precision(17);
  for (const auto& p : X) {
    out << p.x1() << " " << p.x2() << " " << p.x3() << "\n";
  }
}

inline std::vector<UnitVector3> read_point_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_point_set: cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  std::size_t n = 0;
  if (header.rfind("# unit-vectors d=3 n=", 0) == 0) {
    n = std::stoul(header.substr(std::string("# unit-vectors d=3 n=").size()));
  } else {
    throw std::runtime_error("read_point_set: bad header in " + path.string());
  }
  std::vector<UnitVector3> X;
  X.reserve(n);
  double a, b, c;
  while (in >> a >> b >> c) X.emplace_back(a, b, c);
  if (X.size() != n) throw std::runtime_error("read_point_set: count mismatch in " + path.string());
  return X;
}

}  // namespace geostein
