#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "rarelab/errors.hpp"

namespace rarelab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< root-mean-square of y - (slope x + intercept)
};

/// Ordinary least squares y = slope x + intercept. Needs two distinct xs.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw FitError("linear_fit: need at least two paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("linear_fit: abscissae are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    r2 += r * r;
  }
  f.residual = std::sqrt(r2 / n);
  return f;
}

/// Fit log(measured) against log(predicted). All values must be positive.
inline LinearFit log_log_fit(std::span<const double> predicted, std::span<const double> measured) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!(predicted[i] > 0.0) || !(measured[i] > 0.0))
      throw FitError("log_log_fit: non-positive sample");
    lx.push_back(std::log(predicted[i]));
    ly.push_back(std::log(measured[i]));
  }
  return linear_fit(lx, ly);
}

}  // namespace rarelab
