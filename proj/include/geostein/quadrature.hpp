#pragma once

// Reference integration on S^2, independent of the Stein machinery: a
// product rule with Gauss-Legendre nodes in cos q2 and equispaced longitudes.
// The rule integrates spherical harmonics up to degree 2m-1 exactly.

#include <cmath>
#include <functional>
#include <vector>

#include "geostein/gauss_legendre.hpp"
#include "geostein/sphere.hpp"

namespace geostein {

using AmbientFn = std::function<double(const UnitVector3&)>;

struct ProductGrid {
  explicit ProductGrid(int m) : resolution(m) {
    if (m < 4) throw std::invalid_argument("ProductGrid: m must be >= 4");
    const auto rule = gauss_legendre(m);
    const int nPhi = 2 * m;
    const double wPhi = 2.0 * kPi / nPhi;
    nodes.reserve(static_cast<std::size_t>(m) * nPhi);
    weights.reserve(nodes.capacity());
    for (int i = 0; i < m; ++i) {
      const double t = rule.nodes[i];  // t = cos q2
      const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
      for (int j = 0; j < nPhi; ++j) {
        const double phi = wPhi * (j + 0.5);
        nodes.emplace_back(s * std::cos(phi), s * std::sin(phi), t);
        weights.push_back(rule.weights[i] * wPhi);
      }
    }
  }

  std::vector<UnitVector3> nodes;
  std::vector<double> weights;
  int resolution;
};

// Integral of f with respect to the volume measure V.
inline double reference_integral(const AmbientFn& f, int m) {
  const ProductGrid grid(m);
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    acc += grid.weights[i] * f(grid.nodes[i]);
  }
  return acc;
}

// Expectation of f under the distribution with unnormalized log-density
// logp: reference_integral(f * p) / reference_integral(p).  The density is
// shifted by its grid maximum before exponentiation.
inline double reference_expectation_logp(const AmbientFn& logp, const AmbientFn& f, int m) {
  const ProductGrid grid(m);
  const std::size_t n = grid.nodes.size();
  std::vector<double> lp(n);
  double lpMax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    lp[i] = logp(grid.nodes[i]);
    lpMax = std::max(lpMax, lp[i]);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = grid.weights[i] * std::exp(lp[i] - lpMax);
    num += w * f(grid.nodes[i]);
    den += w;
  }
  return num / den;
}

}  // namespace geostein
