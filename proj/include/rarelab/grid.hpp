#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "rarelab/errors.hpp"

namespace rarelab {

/// Uniform cell-centered grid on [x_left, x_right].
struct Grid1D {
  double x_left = -1.0;
  double x_right = 1.0;
  std::size_t n = 0;

  double dx() const { return (x_right - x_left) / static_cast<double>(n); }
  double center(std::size_t i) const { return x_left + (static_cast<double>(i) + 0.5) * dx(); }
  double length() const { return x_right - x_left; }

  std::vector<double> centers() const {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = center(i);
    return x;
  }

  void validate() const {
    if (!(x_left < x_right)) throw ContractError("grid: requires x_left < x_right");
    if (n == 0) throw ContractError("grid: requires at least one cell");
  }

  /// Smallest uniform grid on [xl, xr] with dx <= max_dx.
  static Grid1D covering(double xl, double xr, double max_dx) {
    if (!(xl < xr) || !(max_dx > 0.0)) throw ContractError("grid: bad covering request");
    const auto n = static_cast<std::size_t>(std::ceil((xr - xl) / max_dx - 1e-9));
    return {xl, xr, n == 0 ? 1 : n};
  }

  bool operator==(const Grid1D&) const = default;
};

}  // namespace rarelab
