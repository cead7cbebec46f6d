#pragma once
/// Property suites with measured values. Each acceptance criterion maps to
/// one suite; `verify` routes a selector to suites.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "rarelab/experiment_harness.hpp"

namespace rarelab {

struct PropertyResult {
  std::string suite;
  std::string name;
  bool pass = false;
  nlohmann::json measured;
};

struct VerifyReport {
  std::vector<PropertyResult> results;

  bool all_pass() const {
    for (const auto& r : results)
      if (!r.pass) return false;
    return true;
  }

  void add(const std::string& suite, const std::string& name, bool pass, nlohmann::json measured) {
    results.push_back({suite, name, pass, std::move(measured)});
  }

  void append(const VerifyReport& o) { results.insert(results.end(), o.results.begin(), o.results.end()); }

  /// One JSON object per line.
  std::string to_jsonl() const {
    std::string out;
    for (const auto& r : results)
      out += nlohmann::json{{"suite", r.suite}, {"property", r.name}, {"pass", r.pass}, {"measured", r.measured}}.dump() +
             "\n";
    return out;
  }
};

struct VerifyOptions {
  GasModel gas;
  PrimitiveState left{1.0, 0.0, 0.0, 1.0};
  double v1_plus = 1.0;
  std::size_t workers = 1;
};

namespace detail {

inline Vec3 flux_from_conserved(const GasModel& g, const Vec3& u) {
  const double rho = u[0], v = u[1] / u[0];
  const double p = (g.gamma - 1.0) * (u[2] - 0.5 * rho * v * v);
  return {rho * v, rho * v * v + p, (u[2] + p) * v};
}

inline Mat3 difference_jacobian(const GasModel& g, const Vec3& u, double h) {
  Mat3 j;
  for (int k = 0; k < 3; ++k) {
    Vec3 up = u, um = u;
    const double step = h * std::max(1.0, std::abs(u[k]));
    up[k] += step;
    um[k] -= step;
    const auto fp = flux_from_conserved(g, up), fm = flux_from_conserved(g, um);
    for (int i = 0; i < 3; ++i) j(i, k) = (fp[i] - fm[i]) / (2.0 * step);
  }
  return j;
}

// Manufactured periodic solution along x - t.
using MmsJet = Jet<Jet<double>>;
struct MmsFields {
  MmsJet rho, u, theta;
};

inline MmsFields mms_fields(double xi) {
  const MmsJet x = second_order_jet(xi, 1.0, 0.0);
  return {2.0 + sin(x), 1.0 + 0.5 * cos(x), 3.0 + cos(x)};
}

inline Vec4 mms_source(const GasModel& gas, double eps, double t, double x) {
  const auto f = mms_fields(x - t);
  const double g = gas.gamma, R = gas.R, nu = gas.planar_viscosity();
  const MmsJet m = f.rho * f.u;
  const MmsJet E = f.rho * (R / (g - 1.0) * f.theta + 0.5 * f.u * f.u);
  const MmsJet p = R * f.rho * f.theta;
  const MmsJet flux[3] = {m, m * f.u + p, f.u * (E + p)};
  const MmsJet cons[3] = {f.rho, m, E};
  const double ux = f.u.val.der, uxx = f.u.der.der, txx = f.theta.der.der;
  const double visc[3] = {0.0, nu * eps * uxx, nu * eps * (ux * ux + f.u.val.val * uxx) + gas.kappa * eps * txx};
  Vec4 s{};
  const int slot[3] = {0, 1, 3};
  for (int k = 0; k < 3; ++k) s[slot[k]] = -cons[k].val.der + flux[k].val.der - visc[k];
  return s;
}

inline double mms_error(const GasModel& gas, Limiter lim, std::size_t n, double eps) {
  SolverConfig c;
  c.gas = gas;
  c.eps = eps;
  c.grid = {0.0, 2.0 * std::numbers::pi, n};
  c.boundary = Boundary::periodic;
  c.limiter = lim;
  c.T = 0.5;
  c.initial = [](double x, double) {
    const auto f = mms_fields(x);
    return PrimitiveState{f.rho.val.val, f.u.val.val, 0.0, f.theta.val.val};
  };
  c.source = [gas, eps](double t, double x) { return mms_source(gas, eps, t, x); };
  const auto tr = run_1d(c);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = mms_fields(c.grid.center(i) - c.T).rho.val.val;
    err += std::pow(tr.primitive(1, i).rho - exact, 2) * c.grid.dx();
  }
  return std::sqrt(err);
}

inline double l2(const std::vector<double>& f, double dx) { return lp_norm(f, dx, 2.0); }

}  // namespace detail

/// Eigensystem identities on random states and the flux Jacobian order.
inline VerifyReport verify_gas(const VerifyOptions& o) {
  VerifyReport rep;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> rho(0.5, 3.0), v(-3.0, 3.0), th(0.5, 3.0);
  double worst_lar = 0.0, worst_lr = 0.0, worst_order = kInf;
  for (int i = 0; i < 1000; ++i) {
    const PrimitiveState s{rho(rng), v(rng), 0.0, th(rng)};
    const auto u = prim_to_cons(o.gas, s);
    const auto e = eigendecompose_jacobian(o.gas, u);
    const Mat3 A = conservative_jacobian(o.gas, u);
    Mat3 diag{};
    for (int k = 0; k < 3; ++k) diag(k, k) = e.lambda[k];
    worst_lar = std::max(worst_lar, max_abs_diff(e.L * A * e.R, diag));
    worst_lr = std::max(worst_lr, max_abs_diff(e.L * e.R, Mat3::identity()));
    if (i < 50) {
      const Vec3 uv{u.rho, u.m1, u.energy};
      const double e1 = max_abs_diff(A, detail::difference_jacobian(o.gas, uv, 1e-2));
      const double e2 = max_abs_diff(A, detail::difference_jacobian(o.gas, uv, 5e-3));
      worst_order = std::min(worst_order, std::log2(e1 / e2));
    }
  }
  rep.add("gas", "LAR_diagonal", worst_lar <= 1e-10, {{"max_error", worst_lar}, {"tol", 1e-10}});
  rep.add("gas", "LR_identity", worst_lr <= 1e-10, {{"max_error", worst_lr}, {"tol", 1e-10}});
  rep.add("gas", "jacobian_fd_order", worst_order >= 1.9, {{"min_order", worst_order}, {"required", 1.9}});
  return rep;
}

/// Derivative norms of the smoothed fan against their predicted scales and
/// the distance to the exact fan.
inline VerifyReport verify_fan(const VerifyOptions& o) {
  VerifyReport rep;
  const auto d = make_riemann_data(o.gas, o.left, o.v1_plus);
  const double ps[] = {1.0, 2.0, kInf};
  for (double t : {0.0, 1.0}) {
    std::vector<NormTable> tabs;
    for (int k = 0; k < 4; ++k) {
      const auto p = SmoothFanParams::for_wave(o.gas, d, 0.1 / (1 << k));
      tabs.push_back(profile_derivative_norms(o.gas, d, p, t, ps, norm_grid(p, t, 32.0)));
    }
    for (int order = 1; order <= 3; ++order)
      for (double pp : ps) {
        std::vector<double> pred, meas, ratio;
        for (const auto& tb : tabs) {
          pred.push_back(tb.at(order, pp).predicted_scale);
          meas.push_back(tb.at(order, pp).value);
          ratio.push_back(meas.back() / pred.back());
        }
        const double spread = std::abs(std::log(pred.front() / pred.back()));
        const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
        nlohmann::json m{{"t", t}, {"order", order}, {"p", pp == kInf ? "inf" : format_double(pp)},
                         {"scale_spread", spread}, {"ratio_band", *hi / *lo}};
        bool pass;
        if (spread >= std::log(2.0)) {
          const double slope = log_log_fit(pred, meas).slope;
          m["slope"] = slope;
          pass = std::abs(slope - 1.0) <= 0.1;
        } else {
          // The predicted scale barely moves with delta; a slope is not identifiable.
          if (spread > 0.0) m["slope_unidentifiable"] = log_log_fit(pred, meas).slope;
          pass = *hi / *lo <= 2.0;
        }
        rep.add("fan", "derivative_norm_scaling", pass, m);
      }
  }
  std::vector<double> ratio;
  for (double delta : {0.1, 0.05, 0.025}) {
    const auto p = SmoothFanParams::for_wave(o.gas, d, delta);
    const double dist = fan_distance(o.gas, d, p, 1.0, norm_grid(p, 1.0, 32.0));
    const double env = fan_distance_envelope(delta, 1.0);
    ratio.push_back(dist / env);
  }
  const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
  rep.add("fan", "fan_distance_envelope", *hi / *lo <= 2.0, {{"ratios", ratio}, {"band", *hi / *lo}});
  return rep;
}

/// Scaling of the hyperbolic wave along the delta rule, and the zero-eps case.
inline VerifyReport verify_wave(const VerifyOptions& o) {
  VerifyReport rep;
  const auto d = make_riemann_data(o.gas, o.left, o.v1_plus);
  const std::vector<double> eps{1e-2, 3e-3, 1e-3, 3e-4};
  const auto fit = wave_scaling_sweep(o.gas, d, eps, 1.0 / 6.0);
  for (int k = 0; k <= 2; ++k) {
    const double slope = fit.at(k, "L2").slope;
    rep.add("wave", "l2_derivative_k" + std::to_string(k), std::abs(slope - 1.0) <= 0.15,
            {{"slope", slope}, {"tol", 0.15}});
  }
  const auto p = SmoothFanParams::for_wave(o.gas, d, 0.5);
  const auto zero = solve_hyperbolic_wave(o.gas, d, p, 0.0, 1.0, hw_grid(p, 1.0));
  double m = 0.0;
  for (const auto& s : zero.snapshots)
    for (const auto& v : s.z) m = std::max({m, std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
  rep.add("wave", "zero_eps_is_zero", m == 0.0, {{"max_abs", m}});
  return rep;
}

/// Dual forms of the residuals, their sweep scaling and the system residual order.
inline VerifyReport verify_residual(const VerifyOptions& o) {
  VerifyReport rep;
  const auto d = make_riemann_data(o.gas, o.left, o.v1_plus);
  {
    const auto p = SmoothFanParams::for_wave(o.gas, d, 0.3);
    const auto prof = build_composite(o.gas, d, p, 0.02, 0.5, hw_grid(p, 0.5));
    double w1 = 0.0, w2 = 0.0;
    for (std::size_t s = 0; s < prof.times.size(); ++s)
      for (std::size_t i = 0; i < prof.grid.n; ++i) {
        w1 = std::max(w1, std::abs(residual_Q1(prof, s, i) - residual_Q1_flux(prof, s, i)));
        w2 = std::max(w2, std::abs(residual_Q2(prof, s, i) - residual_Q2_flux(prof, s, i)));
      }
    rep.add("residual", "dual_forms", w1 <= 1e-9 && w2 <= 1e-9, {{"Q1", w1}, {"Q2", w2}, {"tol", 1e-9}});
  }
  {
    std::vector<double> pred, meas;
    for (double eps : {1e-2, 3e-3, 1e-3, 3e-4}) {
      const double delta = SmoothFanParams::delta_rule(eps, 1.0 / 6.0);
      const auto p = SmoothFanParams::for_wave(o.gas, d, delta);
      const auto prof = build_composite(o.gas, d, p, eps, 1.0, hw_grid(p, 1.0));
      pred.push_back(eps * eps / std::pow(delta, 3.5));
      meas.push_back(detail::l2(residual_fields(prof, prof.times.size() - 1).Q1, prof.grid.dx()));
    }
    const double slope = log_log_fit(pred, meas).slope;
    rep.add("residual", "q1_sweep_slope", std::abs(slope - 1.0) <= 0.2, {{"slope", slope}, {"tol", 0.2}});
  }
  {
    std::vector<SystemResidual> r;
    for (int level = 0; level < 3; ++level) {
      const double ht = 0.04 / (1 << level), cpd = 16.0 * (1 << level);
      const auto p = SmoothFanParams::for_wave(o.gas, d, 0.5);
      const auto prof =
          build_composite(o.gas, d, p, 0.01, 0.5 + ht, hw_grid(p, 0.5 + ht, cpd), {0.5 - ht, 0.5});
      r.push_back(profile_system_residual(prof, 1));
    }
    double worst = kInf;
    for (int l = 0; l < 2; ++l)
      worst = std::min({worst, std::log2(r[l].mass / r[l + 1].mass), std::log2(r[l].momentum / r[l + 1].momentum),
                        std::log2(r[l].energy / r[l + 1].energy)});
    rep.add("residual", "system_residual_order", worst >= 0.9, {{"min_order", worst}, {"required", 0.9}});
  }
  return rep;
}

/// Fixed point, conservation, manufactured-solution order and slab symmetry.
inline VerifyReport verify_solver(const VerifyOptions& o) {
  VerifyReport rep;
  const auto d = make_riemann_data(o.gas, o.left, o.v1_plus);
  {
    double worst = 0.0;
    for (double eps : {0.0, 0.1}) {
      SolverConfig c;
      c.gas = o.gas;
      c.eps = eps;
      c.grid = {-10.0, 10.0, 200};
      c.T = 0.2;
      c.left = c.right = o.left;
      c.initial = constant_initial(o.left);
      const auto tr = run_1d(c);
      const auto u0 = prim_to_cons(o.gas, o.left);
      for (const auto& u : tr.final().U)
        worst = std::max({worst, std::abs(u.rho - u0.rho), std::abs(u.m1 - u0.m1), std::abs(u.energy - u0.energy)});
    }
    rep.add("solver", "constant_fixed_point", worst <= 1e-15, {{"max_deviation", worst}});
  }
  {
    const auto p = SmoothFanParams::for_wave(o.gas, d, SmoothFanParams::delta_rule(0.01, 1.0 / 6.0));
    SolverConfig c;
    c.gas = o.gas;
    c.eps = 0.01;
    c.grid = solver_grid(o.gas, d, p, 1.0);
    c.left = d.left;
    c.right = d.right;
    c.initial = smooth_initial(o.gas, d, p);
    const auto tr = run_1d(c);
    const double err = tr.conservation_error(tr.snapshots.size() - 1, 0);
    rep.add("solver", "mass_conservation", err <= 1e-12, {{"relative_error", err}, {"tol", 1e-12}});
  }
  {
    std::vector<double> e;
    for (std::size_t n : {64u, 128u, 256u}) e.push_back(detail::mms_error(o.gas, Limiter::unlimited, n, 0.05));
    const double order = std::min(std::log2(e[0] / e[1]), std::log2(e[1] / e[2]));
    rep.add("solver", "manufactured_order", order >= 1.8, {{"errors", e}, {"min_order", order}, {"required", 1.8}});
  }
  {
    SolverConfig c;
    c.gas = o.gas;
    c.eps = 0.02;
    c.T = 0.5;
    c.grid = {-3.0, 5.0, 200};
    c.left = d.left;
    c.right = d.right;
    c.initial = riemann_initial(d);
    const auto one = run_1d(c);
    c.n2 = 6;
    const auto two = run_2d_slab(c);
    double worst = 0.0;
    for (std::size_t j = 0; j < c.n2; ++j)
      for (std::size_t i = 0; i < c.grid.n; ++i) {
        const auto a = one.final().U[i], b = two.final().U[j * c.grid.n + i];
        worst = std::max({worst, std::abs(a.rho - b.rho), std::abs(a.m1 - b.m1), std::abs(a.m2 - b.m2),
                          std::abs(a.energy - b.energy)});
      }
    rep.add("solver", "planar_symmetry", worst <= 1e-11, {{"max_deviation", worst}, {"tol", 1e-11}});
  }
  return rep;
}

/// The default sweep shared by the rate, envelope and entropy suites.
inline ConvergenceReport default_sweep(const VerifyOptions& o) {
  SweepSpec s;
  s.solver.gas = o.gas;
  s.left = o.left;
  s.v1_plus = o.v1_plus;
  s.workers = o.workers;
  return epsilon_sweep(s);
}

inline VerifyReport verify_rate(const ConvergenceReport& sweep) {
  VerifyReport rep;
  const auto& rows = sweep.rows;
  bool all_ok = !rows.empty();
  for (const auto& r : rows) all_ok = all_ok && r.ok();
  std::vector<double> errs;
  for (const auto& r : rows) errs.push_back(r.sup_error);
  bool decreasing = all_ok;
  for (std::size_t k = 1; k < rows.size(); ++k) decreasing = decreasing && errs[k] < errs[k - 1];
  rep.add("rate", "sup_error_decreasing", decreasing, {{"eps", sweep.manifest["eps_list"]}, {"sup_error", errs}});
  auto env = [](double e) { return std::pow(e, 1.0 / 6.0) * std::pow(std::log(e), 2); };
  bool below = all_ok;
  double C = 0.0, worst = 0.0;
  if (all_ok) {
    C = errs.front() / env(rows.front().eps);
    for (const auto& r : rows) {
      worst = std::max(worst, r.sup_error / (C * env(r.eps)));
      below = below && r.sup_error <= C * env(r.eps) * (1.0 + 1e-12);
    }
  }
  rep.add("rate", "below_calibrated_envelope", below, {{"C", C}, {"max_ratio", worst}});
  const auto it = sweep.fits.find("sup_error");
  nlohmann::json fit = nullptr;
  if (it != sweep.fits.end()) fit = {{"alpha", it->second.alpha}, {"beta", it->second.beta}, {"C", it->second.C}};
  // Reported only; the fitted exponent is not an acceptance condition.
  rep.add("rate", "fitted_alpha_reported", it != sweep.fits.end(), fit);
  return rep;
}

inline VerifyReport verify_envelope(const ConvergenceReport& sweep) {
  VerifyReport rep;
  for (const auto& r : sweep.rows)
    rep.add("envelope", "a_priori_envelope", r.ok() && r.pa_first <= 1.0 && r.pa_second <= 1.0,
            {{"eps", r.eps}, {"status", r.status}, {"first_ratio", r.pa_first}, {"second_ratio", r.pa_second}});
  return rep;
}

inline VerifyReport verify_entropy(const ConvergenceReport& sweep, const VerifyOptions& o) {
  VerifyReport rep;
  for (const auto& r : sweep.rows) {
    rep.add("entropy", "nonnegative", r.ok() && r.eta_min >= 0.0, {{"eps", r.eps}, {"min_eta", r.eta_min}});
    rep.add("entropy", "decays_over_window", r.ok() && r.eta_T < r.eta_h,
            {{"eps", r.eps}, {"integral_h", r.eta_h}, {"integral_T", r.eta_T}});
  }
  const auto band = equivalence_band(o.gas, {1.0, 0.0, 0.0, 1.0}, 0.1, 1000, 11);
  const auto fine = equivalence_band(o.gas, {1.0, 0.0, 0.0, 1.0}, 0.05, 1000, 12);
  const bool stable = band.c0() / fine.c0() <= 2.0 && fine.c0() / band.c0() <= 2.0;
  rep.add("entropy", "quadratic_equivalence", band.lo > 0.0 && std::isfinite(band.hi) && stable,
          {{"lo", band.lo}, {"hi", band.hi}, {"C0", band.c0()}, {"C0_half_radius", fine.c0()}});
  return rep;
}

inline const std::vector<std::string>& verify_selectors() {
  static const std::vector<std::string> s{"gas",      "fan",     "wave",     "residual", "solver",
                                          "rate",     "envelope", "entropy", "all"};
  return s;
}

inline bool is_selector(const std::string& s) {
  const auto& all = verify_selectors();
  return std::find(all.begin(), all.end(), s) != all.end();
}

/// Run the suites named by `selector`; unknown selectors raise ConfigError.
inline VerifyReport verify(const std::string& selector, const VerifyOptions& o = {}) {
  if (!is_selector(selector)) throw ConfigError("selector", "unknown suite '" + selector + "'");
  const bool all = selector == "all";
  VerifyReport rep;
  if (all || selector == "gas") rep.append(verify_gas(o));
  if (all || selector == "fan") rep.append(verify_fan(o));
  if (all || selector == "wave") rep.append(verify_wave(o));
  if (all || selector == "residual") rep.append(verify_residual(o));
  if (all || selector == "solver") rep.append(verify_solver(o));
  if (all || selector == "rate" || selector == "envelope" || selector == "entropy") {
    const auto sweep = default_sweep(o);
    if (all || selector == "rate") rep.append(verify_rate(sweep));
    if (all || selector == "envelope") rep.append(verify_envelope(sweep));
    if (all || selector == "entropy") rep.append(verify_entropy(sweep, o));
  }
  return rep;
}

}  // namespace rarelab
