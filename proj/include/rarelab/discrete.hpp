#pragma once
/// Midpoint-rule norms and central differences on uniform cell-centered data.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "rarelab/errors.hpp"

namespace rarelab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool valid_norm_exponent(double p) { return p == 1.0 || p == 2.0 || p == kInf; }

inline double lp_norm(std::span<const double> f, double dx, double p) {
  if (!valid_norm_exponent(p)) throw ContractError("lp_norm: p must be 1, 2 or inf");
  if (p == kInf) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  if (p == 1.0) {
    for (double v : f) s += std::abs(v);
    return s * dx;
  }
  for (double v : f) s += v * v;
  return std::sqrt(s * dx);
}

/// Midpoint integral.
inline double integrate(std::span<const double> f, double dx) {
  double s = 0.0;
  for (double v : f) s += v;
  return s * dx;
}

/// Half-width of the central stencil for derivative `order`.
inline std::size_t stencil_half_width(int order) {
  switch (order) {
    case 0: return 0;
    case 1:
    case 2: return 1;
    case 3: return 2;
    default: throw ContractError("central_difference: order must be 0..3");
  }
}

/// Second-order central difference of `order` 0..3. Cells within the stencil
/// half-width of either end are dropped, so the result is shorter than `f`.
inline std::vector<double> central_difference(std::span<const double> f, double dx, int order) {
  const std::size_t w = stencil_half_width(order);
  if (f.size() < 2 * w + 1) throw ContractError("central_difference: field shorter than stencil");
  std::vector<double> d(f.size() - 2 * w);
  for (std::size_t i = w; i + w < f.size(); ++i) {
    double v = 0.0;
    switch (order) {
      case 0: v = f[i]; break;
      case 1: v = (f[i + 1] - f[i - 1]) / (2.0 * dx); break;
      case 2: v = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (dx * dx); break;
      case 3: v = (f[i + 2] - 2.0 * f[i + 1] + 2.0 * f[i - 1] - f[i - 2]) / (2.0 * dx * dx * dx); break;
    }
    d[i - w] = v;
  }
  return d;
}

}  // namespace rarelab
