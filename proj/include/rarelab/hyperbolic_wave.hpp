#pragma once
/// The hyperbolic correction wave: the linearization of the Euler system
/// around the smooth rarefaction, forced by the eps-scaled dissipation of the
/// profile, solved in characteristic coordinates Z = L z.

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rarelab/discrete.hpp"
#include "rarelab/errors.hpp"
#include "rarelab/fitting.hpp"
#include "rarelab/gas_dynamics.hpp"
#include "rarelab/grid.hpp"
#include "rarelab/jet.hpp"
#include "rarelab/rarefaction_waves.hpp"
#include "rarelab/textio.hpp"

namespace rarelab {

/// Right-hand side of the z system: (0, s2, s3).
struct HwSource {
  double s2 = 0.0;  ///< (2 mu + lambda) eps v1_xx
  double s3 = 0.0;  ///< kappa eps theta_xx + (2 mu + lambda) eps (v1 v1_x)_x
};

inline HwSource hw_source(const GasModel& gas, const ProfileSample& s, double eps) {
  if (s.order < 2) throw ContractError("hw_source: profile sample lacks second derivatives");
  const double nu = gas.planar_viscosity();
  const double v = s.state.v1, vx = s.d1[1], vxx = s.d2[1];
  return {nu * eps * vxx, gas.kappa * eps * s.d2[2] + nu * eps * (vx * vx + v * vxx)};
}

/// Coefficients of the diagonal system at one point:
///   Z_t + (lambda_j Z_j)_x = (L S)_j + sum_{k<3} M_jk Z_k,
///   M_jk = (l_j,x . r_k)(lambda_k - lambda_3).
/// The k = 3 column vanishes because L_t = -lambda_3 L_x on the wave.
struct HwCoefficients {
  Mat3 L, R;
  Vec3 lambda{};
  Vec3 forcing{};  ///< L S
  std::array<std::array<double, 2>, 3> M{};
  double v1x = 0.0;
  ProfileSample profile;
};

namespace detail {

/// L(B), R(B) and dL/dB by forward differentiation through the wave curve.
struct EigenJet {
  Matrix3<Jet<double>> L, R;
};

inline EigenJet eigen_jet(const GasModel& gas, const RiemannData& d, double B) {
  const auto w = state_on_wave(gas, d, Jet<double>::variable(B));
  EigenJet e;
  e.R = right_eigenvectors(gas, w.rho, w.v1, w.theta);
  e.L = inverse(e.R);
  return e;
}

inline Mat3 values(const Matrix3<Jet<double>>& m) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = m(i, j).val;
  return r;
}

inline Mat3 derivatives(const Matrix3<Jet<double>>& m) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = m(i, j).der;
  return r;
}

}  // namespace detail

inline HwCoefficients hw_coefficients(const GasModel& gas, const RiemannData& d, const SmoothFanParams& p, double eps,
                                      double t, double x1) {
  const auto b = burgers_smooth(p, t, x1);
  HwCoefficients c;
  c.profile = profile_from_burgers(gas, d, b);
  const auto e = detail::eigen_jet(gas, d, b.B);
  c.L = detail::values(e.L);
  c.R = detail::values(e.R);
  const Mat3 dLdB = detail::derivatives(e.L);
  const double cs = sound_speed(gas, c.profile.state.rho, c.profile.state.theta);
  const double v = c.profile.state.v1;
  c.lambda = {v - cs, v, v + cs};
  const auto src = hw_source(gas, c.profile, eps);
  c.forcing = c.L * Vec3{0.0, src.s2, src.s3};
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 2; ++k) {
      double lr = 0.0;
      for (int i = 0; i < 3; ++i) lr += dLdB(j, i) * b.Bx * c.R(i, k);
      c.M[j][k] = lr * (c.lambda[k] - c.lambda[2]);
    }
  c.v1x = c.profile.d1[1];
  return c;
}

/// Inverse matrix of right eigenvectors along the smooth profile at (t, x1).
inline Mat3 profile_left_eigenvectors(const GasModel& gas, const RiemannData& d, const SmoothFanParams& p, double t,
                                      double x1) {
  const auto s = smooth_rarefaction(gas, d, p, t, x1).state;
  return inverse(right_eigenvectors<double>(gas, s.rho, s.v1, s.theta));
}

/// max |L_t + lambda_3 L_x| over the grid and matrix entries, both
/// derivatives by central differences with step grid.dx().
inline double verify_structure_relation(const GasModel& gas, const RiemannData& d, const SmoothFanParams& p, double t,
                                        const Grid1D& grid) {
  grid.validate();
  require_resolved(grid, p.delta, 16.0, "verify_structure_relation");
  const double h = grid.dx();
  if (t < h) throw ContractError("verify_structure_relation: t must exceed the grid step");
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.center(i);
    const Mat3 tp = profile_left_eigenvectors(gas, d, p, t + h, x), tm = profile_left_eigenvectors(gas, d, p, t - h, x);
    const Mat3 xp = profile_left_eigenvectors(gas, d, p, t, x + h), xm = profile_left_eigenvectors(gas, d, p, t, x - h);
    const double lam3 = burgers_smooth(p, t, x).B;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        const double lt = (tp(r, c) - tm(r, c)) / (2.0 * h);
        const double lx = (xp(r, c) - xm(r, c)) / (2.0 * h);
        worst = std::max(worst, std::abs(lt + lam3 * lx));
      }
  }
  return worst;
}

struct HwSnapshot {
  double t = 0.0;
  std::vector<Vec3> Z;
  std::vector<Vec3> z;
  double energy = 0.0;       ///< integral of |Z|^2
  double dissipation = 0.0;  ///< time integral of the integral of v1_x |Z|^2
};

struct HyperbolicWaveField {
  Grid1D grid;
  double eps = 0.0;
  double delta = 0.0;
  std::vector<HwSnapshot> snapshots;
  std::size_t steps = 0;

  const HwSnapshot& final() const { return snapshots.back(); }

  /// One component of z (c = 0, 1, 2) or Z (c = 3, 4, 5) at a snapshot.
  std::vector<double> component(std::size_t snap, int c) const {
    const auto& s = snapshots.at(snap);
    std::vector<double> out(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) out[i] = c < 3 ? s.z[i][c] : s.Z[i][c - 3];
    return out;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "t,x1,z1,z2,z3,Z1,Z2,Z3\n";
    for (const auto& s : snapshots)
      for (std::size_t i = 0; i < grid.n; ++i) {
        os << format_double(s.t) << ',' << format_double(grid.center(i));
        for (int c = 0; c < 3; ++c) os << ',' << format_double(s.z[i][c]);
        for (int c = 0; c < 3; ++c) os << ',' << format_double(s.Z[i][c]);
        os << '\n';
      }
    return os.str();
  }
};

struct HwOptions {
  double cfl = 0.45;
  /// Snapshot times in (0, T]; T is always added. t = 0 is always stored.
  std::vector<double> output_times;
  /// Optional nonzero initial Z (used to exercise the decoupling).
  std::vector<Vec3> initial_Z;
  double cells_per_delta_min = 16.0;
};

/// First-order upwind transport of each Z_j with flux splitting by the sign
/// of lambda_j, explicit Euler for forcing and coupling, outflow ghosts.
/// Each step advances (Z1, Z2) from their own values and then Z3 from the
/// same old (Z1, Z2), which is the decoupled order of the system.
inline HyperbolicWaveField solve_hyperbolic_wave(const GasModel& gas, const RiemannData& d, const SmoothFanParams& p,
                                                 double eps, double T, const Grid1D& grid, const HwOptions& opt = {}) {
  grid.validate();
  p.validate();
  if (!(opt.cfl > 0.0 && opt.cfl <= 1.0)) throw ConfigError("hyperbolic_wave.cfl", "must lie in (0, 1]");
  if (!(T >= 0.0)) throw ConfigError("hyperbolic_wave.T", "must be non-negative");
  if (eps < 0.0) throw ConfigError("eps", "must be non-negative");
  require_resolved(grid, p.delta, opt.cells_per_delta_min, "solve_hyperbolic_wave");
  const std::size_t n = grid.n;
  const double dx = grid.dx();

  std::vector<double> outs;
  for (double t : opt.output_times)
    if (t > 0.0 && t < T) outs.push_back(t);
  if (T > 0.0) outs.push_back(T);
  std::sort(outs.begin(), outs.end());
  outs.erase(std::unique(outs.begin(), outs.end()), outs.end());

  std::vector<Vec3> Z(n, Vec3{0.0, 0.0, 0.0});
  if (!opt.initial_Z.empty()) {
    if (opt.initial_Z.size() != n) throw ContractError("solve_hyperbolic_wave: initial_Z size mismatch");
    Z = opt.initial_Z;
  }

  HyperbolicWaveField field{grid, eps, p.delta, {}, 0};
  std::vector<HwCoefficients> coef(n);
  auto evaluate = [&](double t) {
    for (std::size_t i = 0; i < n; ++i) coef[i] = hw_coefficients(gas, d, p, eps, t, grid.center(i));
  };
  auto snapshot = [&](double t, double dissipation) {
    HwSnapshot s{t, Z, std::vector<Vec3>(n), 0.0, dissipation};
    for (std::size_t i = 0; i < n; ++i) {
      s.z[i] = coef[i].R * Z[i];
      s.energy += (Z[i][0] * Z[i][0] + Z[i][1] * Z[i][1] + Z[i][2] * Z[i][2]) * dx;
    }
    field.snapshots.push_back(std::move(s));
  };

  double t = 0.0, dissipation = 0.0;
  evaluate(t);
  snapshot(t, 0.0);
  std::vector<Vec3> next(n);
  std::size_t out_idx = 0;
  while (out_idx < outs.size()) {
    double max_speed = 0.0;
    for (const auto& c : coef)
      for (double l : c.lambda) max_speed = std::max(max_speed, std::abs(l));
    double dt = max_speed > 0.0 ? opt.cfl * dx / max_speed : outs[out_idx] - t;
    bool hit = false;
    if (t + dt >= outs[out_idx] * (1.0 - 1e-14)) {
      dt = outs[out_idx] - t;
      hit = true;
    }
    double weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i) weighted += coef[i].v1x * (Z[i][0] * Z[i][0] + Z[i][1] * Z[i][1] + Z[i][2] * Z[i][2]);
    dissipation += dt * weighted * dx;

    const double r = dt / dx;
    for (int j = 0; j < 3; ++j) {
      auto face_flux = [&](std::size_t left, std::size_t right) {
        return std::max(coef[left].lambda[j], 0.0) * Z[left][j] + std::min(coef[right].lambda[j], 0.0) * Z[right][j];
      };
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t im = i == 0 ? 0 : i - 1, ip = i + 1 == n ? n - 1 : i + 1;
        const double coupling = coef[i].M[j][0] * Z[i][0] + coef[i].M[j][1] * Z[i][1];
        next[i][j] = Z[i][j] - r * (face_flux(i, ip) - face_flux(im, i)) + dt * (coef[i].forcing[j] + coupling);
      }
    }
    Z.swap(next);
    t = hit ? outs[out_idx] : t + dt;
    ++field.steps;
    for (const auto& v : Z)
      if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2]))
        throw DivergenceError(t, "solve_hyperbolic_wave: non-finite Z");
    evaluate(t);
    if (hit) {
      snapshot(t, dissipation);
      ++out_idx;
    }
  }
  return field;
}

/// Domain of the hyperbolic wave: the norm grid of the smooth profile at T.
inline Grid1D hw_grid(const SmoothFanParams& p, double T, double cells_per_delta = 16.0) {
  return norm_grid(p, T, cells_per_delta);
}

/// L^p norm of the k-th x1-derivative of z (which = 0) or Z (which = 1) at a
/// snapshot, pointwise Euclidean over components, one-sided ends excluded.
inline double hw_derivative_norm(const HyperbolicWaveField& f, std::size_t snap, int which, int k, double p) {
  std::vector<double> mag;
  for (int c = 0; c < 3; ++c) {
    const auto comp = f.component(snap, which == 0 ? c : c + 3);
    const auto dk = central_difference(comp, f.grid.dx(), k);
    if (mag.empty()) mag.assign(dk.size(), 0.0);
    for (std::size_t i = 0; i < dk.size(); ++i) mag[i] += dk[i] * dk[i];
  }
  for (auto& m : mag) m = std::sqrt(m);
  return lp_norm(mag, f.grid.dx(), p);
}

struct ScalingRow {
  double eps = 0.0;
  double delta = 0.0;
  std::array<double, 4> l2_z{}, l2_Z{};    ///< ||d^k z(T)||, k = 0..3
  std::array<double, 3> sup_z{}, sup_Z{};  ///< sup_t ||d^k z(t)||_inf, k = 0..2
  double energy_ratio = 0.0;                ///< (int |Z|^2 + dissipation)(T) / (eps/delta)^2
};

struct ScalingFitEntry {
  int k = 0;
  std::string norm;  ///< "L2" or "sup"
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};

struct ScalingFit {
  std::vector<ScalingRow> rows;
  std::vector<ScalingFitEntry> fits;

  const ScalingFitEntry& at(int k, const std::string& norm) const {
    for (const auto& f : fits)
      if (f.k == k && f.norm == norm) return f;
    throw ContractError("ScalingFit: no such fit");
  }

  nlohmann::json to_json() const {
    auto a = nlohmann::json::array();
    for (const auto& f : fits)
      a.push_back({{"k", f.k}, {"norm", f.norm}, {"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}});
    return a;
  }
};

struct ScalingOptions {
  double T = 1.0;
  int k_max = 2;
  double cells_per_delta = 16.0;
  double snapshots_per_unit_time = 20.0;
};

/// Solve the wave for each eps with delta = eps^b |ln eps| and fit the
/// derivative norms against eps / delta^(k+1) (L2 at T) and
/// eps / delta^(3/2+k) (sup over the window).
inline ScalingFit wave_scaling_sweep(const GasModel& gas, const RiemannData& d, std::span<const double> eps_list, double b,
                                  const ScalingOptions& opt = {}) {
  if (eps_list.size() < 3) throw FitError("wave_scaling_sweep: need at least 3 eps values");
  if (std::all_of(eps_list.begin(), eps_list.end(), [](double e) { return e == 0.0; }))
    throw FitError("wave_scaling_sweep: every eps is zero, all norms vanish and the fit is degenerate");
  if (opt.k_max < 0 || opt.k_max > 3) throw ConfigError("k_max", "must lie in 0..3");
  ScalingFit out;
  for (double eps : eps_list) {
    const double delta = SmoothFanParams::delta_rule(eps, b);
    const auto p = SmoothFanParams::for_wave(gas, d, delta);
    HwOptions ho;
    const int m = std::max(1, static_cast<int>(std::round(opt.T * opt.snapshots_per_unit_time)));
    for (int i = 1; i < m; ++i) ho.output_times.push_back(opt.T * i / m);
    const auto f = solve_hyperbolic_wave(gas, d, p, eps, opt.T, hw_grid(p, opt.T, opt.cells_per_delta), ho);
    ScalingRow row{eps, delta, {}, {}, {}, {}, 0.0};
    const std::size_t last = f.snapshots.size() - 1;
    for (int k = 0; k <= opt.k_max; ++k) {
      row.l2_z[k] = hw_derivative_norm(f, last, 0, k, 2.0);
      row.l2_Z[k] = hw_derivative_norm(f, last, 1, k, 2.0);
    }
    for (int k = 0; k <= std::min(opt.k_max, 2); ++k)
      for (std::size_t s = 0; s < f.snapshots.size(); ++s) {
        row.sup_z[k] = std::max(row.sup_z[k], hw_derivative_norm(f, s, 0, k, kInf));
        row.sup_Z[k] = std::max(row.sup_Z[k], hw_derivative_norm(f, s, 1, k, kInf));
      }
    row.energy_ratio = (f.final().energy + f.final().dissipation) / std::pow(eps / delta, 2);
    out.rows.push_back(row);
  }
  for (int k = 0; k <= opt.k_max; ++k) {
    std::vector<double> pred, meas;
    for (const auto& r : out.rows) {
      pred.push_back(r.eps / std::pow(r.delta, k + 1));
      meas.push_back(r.l2_z[k]);
    }
    if (std::all_of(meas.begin(), meas.end(), [](double v) { return v == 0.0; }))
      throw FitError("wave_scaling_sweep: all norms vanish, fit is degenerate");
    const auto lf = log_log_fit(pred, meas);
    out.fits.push_back({k, "L2", lf.slope, lf.intercept, lf.residual});
  }
  for (int k = 0; k <= std::min(opt.k_max, 2); ++k) {
    std::vector<double> pred, meas;
    for (const auto& r : out.rows) {
      pred.push_back(r.eps / std::pow(r.delta, 1.5 + k));
      meas.push_back(r.sup_z[k]);
    }
    const auto lf = log_log_fit(pred, meas);
    out.fits.push_back({k, "sup", lf.slope, lf.intercept, lf.residual});
  }
  return out;
}

}  // namespace rarelab
