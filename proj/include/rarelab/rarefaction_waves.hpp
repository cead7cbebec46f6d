#pragma once
/// The exact 3-rarefaction fan and its Burgers-smoothed approximation.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rarelab/errors.hpp"
#include "rarelab/gas_dynamics.hpp"
#include "rarelab/grid.hpp"
#include "rarelab/jet.hpp"
#include "rarelab/discrete.hpp"
#include "rarelab/textio.hpp"

namespace rarelab {

/// Left and right states of a single 3-rarefaction. `connected` is set only by
/// make_riemann_data or after check_connected succeeds.
struct RiemannData {
  PrimitiveState left;
  PrimitiveState right;
  bool connected = false;
};

/// Right state on the 3-rarefaction curve through `left` with velocity v1_plus.
inline PrimitiveState connect_right_state(const GasModel& gas, const PrimitiveState& left, double v1_plus) {
  detail::require_positive(left.rho, left.theta, "connect_right_state");
  if (v1_plus < left.v1) throw NotARarefactionError("connect_right_state: v1_plus must not be below v1_minus");
  const double c_minus = sound_speed(gas, left.rho, left.theta);
  const double c_plus = c_minus + 0.5 * (gas.gamma - 1.0) * (v1_plus - left.v1);
  const double theta = c_plus * c_plus / (gas.gamma * gas.R);
  const double rho = left.rho * std::pow(theta / left.theta, 1.0 / (gas.gamma - 1.0));
  return {rho, v1_plus, 0.0, theta};
}

/// Throws ContractError unless both 3-invariants agree within 1e-10 and the
/// third eigenvalue does not decrease across the wave.
inline void check_connected(const GasModel& gas, RiemannData& data) {
  const auto a = riemann_invariants_3(gas, data.left);
  const auto b = riemann_invariants_3(gas, data.right);
  if (std::abs(a.sigma1 - b.sigma1) > 1e-10 || std::abs(a.sigma2 - b.sigma2) > 1e-10)
    throw ContractError("riemann data: end states do not share 3-Riemann invariants");
  if (eigenvalues(gas, data.right)[2] < eigenvalues(gas, data.left)[2])
    throw NotARarefactionError("riemann data: third eigenvalue decreases across the wave");
  data.connected = true;
}

inline RiemannData make_riemann_data(const GasModel& gas, const PrimitiveState& left, double v1_plus) {
  RiemannData d{left, connect_right_state(gas, left, v1_plus), false};
  d.left.v2 = 0.0;
  check_connected(gas, d);
  return d;
}

inline double fan_b_minus(const GasModel& gas, const RiemannData& d) { return eigenvalues(gas, d.left)[2]; }
inline double fan_b_plus(const GasModel& gas, const RiemannData& d) { return eigenvalues(gas, d.right)[2]; }

template <class T>
struct WaveState {
  T rho, v1, theta;
};

/// The state on the wave curve whose third eigenvalue equals `lambda3`.
/// Generic so that jets seeded with derivatives of lambda3 return the
/// matching derivatives of (rho, v1, theta).
template <class T>
WaveState<T> state_on_wave(const GasModel& gas, const RiemannData& d, const T& lambda3) {
  using std::pow;
  const double g = gas.gamma;
  const double sigma = d.left.v1 - 2.0 * std::sqrt(g * gas.R * d.left.theta) / (g - 1.0);
  const T c = (g - 1.0) / (g + 1.0) * (lambda3 - sigma);
  const T theta = c * c / (g * gas.R);
  const T rho = d.left.rho * pow(theta / d.left.theta, 1.0 / (g - 1.0));
  return {rho, lambda3 - c, theta};
}

inline PrimitiveState exact_fan(const GasModel& gas, const RiemannData& d, double t, double x1) {
  if (!(t > 0.0)) throw DomainError("exact_fan: requires t > 0");
  if (!d.connected) throw ContractError("exact_fan: riemann data not connected");
  const double bm = fan_b_minus(gas, d), bp = fan_b_plus(gas, d);
  if (x1 <= bm * t) return d.left;
  if (x1 >= bp * t) return d.right;
  const auto w = state_on_wave(gas, d, x1 / t);
  return {w.rho, w.v1, 0.0, w.theta};
}

/// Burgers initial data (B+ + B-)/2 + (B+ - B-)/2 tanh(x1 / delta).
struct SmoothFanParams {
  double b_minus = 0.0;
  double b_plus = 1.0;
  double delta = 0.1;

  /// B- == B+ is accepted as the degenerate zero-strength wave.
  void validate() const {
    if (!(b_minus <= b_plus)) throw ConfigError("fan.b_minus", "requires b_minus <= b_plus");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("fan.delta", "must be positive");
  }

  double mean() const { return 0.5 * (b_plus + b_minus); }
  double half_jump() const { return 0.5 * (b_plus - b_minus); }

  static double delta_rule(double eps, double b) {
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps", "delta rule requires 0 < eps < 1");
    return std::pow(eps, b) * std::abs(std::log(eps));
  }

  static SmoothFanParams for_wave(const GasModel& gas, const RiemannData& d, double delta) {
    SmoothFanParams p{fan_b_minus(gas, d), fan_b_plus(gas, d), delta};
    p.validate();
    return p;
  }
};

struct BurgersSample {
  double B, Bx, Bxx, Bxxx;
};

/// B0 and its first three derivatives at x0.
inline BurgersSample burgers_initial_derivs(const SmoothFanParams& p, double x0) {
  const double u = x0 / p.delta;
  const double th = std::tanh(u);
  const double sech = 1.0 / std::cosh(u);  // avoids 1 - th^2 cancellation in the tails
  const double s2 = sech * sech;
  const double b = p.half_jump(), d = p.delta;
  return {p.mean() + b * th, b / d * s2, -2.0 * b / (d * d) * s2 * th, -2.0 * b / (d * d * d) * s2 * (s2 - 2.0 * th * th)};
}

inline double burgers_initial(const SmoothFanParams& p, double x1) { return burgers_initial_derivs(p, x1).B; }

/// Foot x0 of the characteristic through (t, x1): x1 = x0 + t B0(x0).
/// The residual tolerance is 1e-13 relative to max(1, |x1|), the scale at
/// which the residual itself can be evaluated.
inline double characteristic_foot(const SmoothFanParams& p, double t, double x1) {
  if (t == 0.0) return x1;
  double lo = x1 - p.b_plus * t, hi = x1 - p.b_minus * t;
  if (lo == hi) return lo;
  const double scale = std::max(1.0, std::abs(x1));
  const double tol = 1e-13 * scale;
  double x0 = std::clamp(x1 - p.mean() * t, lo, hi);
  double last_f = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    const auto g = burgers_initial_derivs(p, x0);
    const double f = x0 + t * g.B - x1;
    if (std::abs(f) <= tol) return x0;
    if (f < 0.0)
      lo = x0;
    else
      hi = x0;
    // Newton oscillates across the tanh inflection for steep data; fall back
    // to bisection whenever a step fails to halve the residual.
    const bool newton_ok = std::abs(f) <= 0.5 * last_f;
    last_f = std::abs(f);
    double next = x0 - f / (1.0 + t * g.Bx);
    if (!newton_ok || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x0 || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * scale) return next;
    x0 = next;
  }
  throw RootFindError("characteristic_foot: no convergence");
}

/// Classical solution of B_t + B B_x = 0 and its x1-derivatives by implicit
/// differentiation along the characteristic. D = 1 + t B0'(x0) >= 1.
inline BurgersSample burgers_smooth(const SmoothFanParams& p, double t, double x1) {
  if (t < 0.0) throw DomainError("burgers_smooth: requires t >= 0");
  const double x0 = characteristic_foot(p, t, x1);
  const auto g = burgers_initial_derivs(p, x0);
  const double D = 1.0 + t * g.Bx;
  const double D2 = D * D, D3 = D2 * D, D4 = D3 * D;
  return {g.B, g.Bx / D, g.Bxx / D3, g.Bxxx / D4 - 3.0 * t * g.Bxx * g.Bxx / (D4 * D)};
}

/// (rho, v1, theta) at a point with x1-derivatives up to order 3. `B` is the
/// value of the third eigenvalue there.
struct ProfileSample {
  PrimitiveState state;
  double B = 0.0;
  std::array<double, 3> d1{}, d2{}, d3{};
  int order = 0;  ///< highest derivative order filled in
};

/// Profile at a point from an already evaluated Burgers sample.
inline ProfileSample profile_from_burgers(const GasModel& gas, const RiemannData& d, const BurgersSample& b) {
  if (!d.connected) throw ContractError("smooth_rarefaction: riemann data not connected");
  const auto w = state_on_wave(gas, d, third_order_jet(b.B, b.Bx, b.Bxx, b.Bxxx));
  auto unpack = [](const Jet3& j, double& f, double& f1, double& f2, double& f3) {
    f = j.val.val.val;
    f1 = j.der.val.val;
    f2 = j.der.der.val;
    f3 = j.der.der.der;
  };
  ProfileSample s;
  s.B = b.B;
  s.order = 3;
  unpack(w.rho, s.state.rho, s.d1[0], s.d2[0], s.d3[0]);
  unpack(w.v1, s.state.v1, s.d1[1], s.d2[1], s.d3[1]);
  unpack(w.theta, s.state.theta, s.d1[2], s.d2[2], s.d3[2]);
  return s;
}

inline ProfileSample smooth_rarefaction(const GasModel& gas, const RiemannData& d, const SmoothFanParams& p, double t,
                                        double x1) {
  return profile_from_burgers(gas, d, burgers_smooth(p, t, x1));
}

inline std::vector<ProfileSample> sample_profile(const GasModel& gas, const RiemannData& d, const SmoothFanParams& p,
                                                 double t, const Grid1D& grid) {
  std::vector<ProfileSample> out(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) out[i] = smooth_rarefaction(gas, d, p, t, grid.center(i));
  return out;
}

/// Constant of the density slope: rho_x / (rho^((3-gamma)/2) v1_x).
inline double density_slope_ratio(const GasModel& gas, const ProfileSample& s) {
  return s.d1[0] / (std::pow(s.state.rho, 0.5 * (3.0 - gas.gamma)) * s.d1[1]);
}

/// [B- t - 10 delta - 1, B+ t + 10 delta + 1] at `cells_per_delta` resolution.
inline Grid1D norm_grid(const SmoothFanParams& p, double t, double cells_per_delta = 16.0, double tail_widths = 10.0) {
  const double xl = p.b_minus * t - tail_widths * p.delta - 1.0;
  const double xr = p.b_plus * t + tail_widths * p.delta + 1.0;
  return Grid1D::covering(xl, xr, p.delta / cells_per_delta);
}

inline void require_resolved(const Grid1D& grid, double delta, double cells_per_delta, const char* where) {
  if (grid.dx() > delta / cells_per_delta * (1.0 + 1e-12))
    throw ResolutionError(std::string(where) + ": grid spacing exceeds delta / " + format_double(cells_per_delta));
}

/// Predicted scale of the order-k derivative norm in L^p.
inline double derivative_norm_scale(int order, double p, double delta, double t) {
  const double ip = p == kInf ? 0.0 : 1.0 / p;
  switch (order) {
    case 1: return std::pow(delta + t, -1.0 + ip);
    case 2: return std::pow(delta + t, -1.0) * std::pow(delta, -1.0 + ip);
    case 3: return std::pow(delta + t, -1.0) * std::pow(delta, -2.0 + ip);
    default: throw ContractError("derivative_norm_scale: order must be 1, 2 or 3");
  }
}

struct NormEntry {
  int order;
  double p;
  double value;
  double predicted_scale;
};

struct NormTable {
  double t = 0.0;
  double delta = 0.0;
  std::vector<NormEntry> entries;

  const NormEntry& at(int order, double p) const {
    for (const auto& e : entries)
      if (e.order == order && e.p == p) return e;
    throw ContractError("NormTable: no entry for requested order and p");
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "order,p,value,predicted_scale\n";
    for (const auto& e : entries)
      os << e.order << ',' << format_double(e.p) << ',' << format_double(e.value) << ','
         << format_double(e.predicted_scale) << '\n';
    return os.str();
  }
};

/// L^p norms of the pointwise Euclidean magnitude of the order-k derivative
/// triple (rho, v1, theta), k = 1, 2, 3, for each p in `ps`.
inline NormTable profile_derivative_norms(const GasModel& gas, const RiemannData& d, const SmoothFanParams& p, double t,
                               std::span<const double> ps, const Grid1D& grid) {
  grid.validate();
  require_resolved(grid, p.delta, 16.0, "profile_derivative_norms");
  const auto prof = sample_profile(gas, d, p, t, grid);
  std::array<std::vector<double>, 3> mag;
  for (auto& m : mag) m.resize(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const std::array<const std::array<double, 3>*, 3> ders{&prof[i].d1, &prof[i].d2, &prof[i].d3};
    for (int k = 0; k < 3; ++k) {
      const auto& v = *ders[k];
      mag[k][i] = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    }
  }
  NormTable table{t, p.delta, {}};
  for (double pp : ps) {
    if (!valid_norm_exponent(pp)) throw ContractError("profile_derivative_norms: p must be 1, 2 or inf");
    for (int k = 1; k <= 3; ++k)
      table.entries.push_back({k, pp, lp_norm(mag[k - 1], grid.dx(), pp), derivative_norm_scale(k, pp, p.delta, t)});
  }
  return table;
}

inline NormTable profile_derivative_norms(const GasModel& gas, const RiemannData& d, const SmoothFanParams& p, double t, double pp,
                               const Grid1D& grid) {
  const double ps[] = {pp};
  return profile_derivative_norms(gas, d, p, t, ps, grid);
}

/// Componentwise sup distance between the smoothed profile and the exact fan.
inline double fan_distance(const GasModel& gas, const RiemannData& d, const SmoothFanParams& p, double t,
                           const Grid1D& grid) {
  if (!(t > 0.0)) throw DomainError("fan_distance: requires t > 0");
  double m = 0.0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.center(i);
    const auto s = smooth_rarefaction(gas, d, p, t, x).state;
    const auto f = exact_fan(gas, d, t, x);
    m = std::max({m, std::abs(s.rho - f.rho), std::abs(s.v1 - f.v1), std::abs(s.theta - f.theta)});
  }
  return m;
}

/// Envelope delta (ln(1 + t) + |ln delta|) / t.
inline double fan_distance_envelope(double delta, double t) {
  return delta * (std::log1p(t) + std::abs(std::log(delta))) / t;
}

}  // namespace rarelab
