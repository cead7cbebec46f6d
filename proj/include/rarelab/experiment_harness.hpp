#pragma once
/// Epsilon sweeps with the coupled delta rule, rate fits and report output.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "rarelab/diagnostics.hpp"
#include "rarelab/fitting.hpp"
#include "rarelab/textio.hpp"

namespace rarelab {

/// Exponents of the a priori envelope and the delta rule.
struct ExponentLedger {
  double a1 = 0.75;
  double a2 = 0.25;
  double b = 1.0 / 6.0;

  void validate() const {
    if (a2 < 0.25) throw ConfigError("ledger.a2", "violates a2 >= 1/4");
    if (!(b > 0.0)) throw ConfigError("ledger.b", "must be positive");
    if (b > (2.0 - 2.0 * a2) / 9.0 + 1e-15) throw ConfigError("ledger.b", "violates b <= (2 - 2 a2) / 9");
    if (2.0 * a1 < 3.0 - 6.0 * a2 - 1e-15) throw ConfigError("ledger.a1", "violates 2 a1 >= 3 - 6 a2");
  }
};

struct SweepSpec {
  std::vector<double> eps_list{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  ExponentLedger ledger;
  double T = 1.0;
  double h = 0.1;
  double cells_per_delta = 24.0;
  double snapshots_per_unit = 20.0;
  PrimitiveState left{1.0, 0.0, 0.0, 1.0};
  double v1_plus = 1.0;
  SolverConfig solver;  ///< gas, flux, limiter and cfl are taken from here
  std::size_t workers = 1;
  bool scheme_check = true;  ///< rerun at 2 dx to estimate the scheme error
  std::optional<PerturbationSpec> perturbation;  ///< scale and seed; eps, delta, center are set per row

  void validate() const {
    ledger.validate();
    if (eps_list.empty()) throw ConfigError("sweep.eps_list", "must not be empty");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
      if (!(eps_list[k] > 0.0 && eps_list[k] < 1.0)) throw ConfigError("sweep.eps_list", "entries must lie in (0, 1)");
      if (k > 0 && !(eps_list[k] < eps_list[k - 1])) throw ConfigError("sweep.eps_list", "must be strictly decreasing");
    }
    if (!(T > 0.0)) throw ConfigError("sweep.T", "must be positive");
    if (!(h > 0.0 && h < T)) throw ConfigError("sweep.h", "requires 0 < h < T");
    if (!(cells_per_delta >= 16.0)) throw ConfigError("sweep.cells_per_delta", "must be at least 16");
    if (!(snapshots_per_unit > 0.0)) throw ConfigError("sweep.snapshots_per_unit", "must be positive");
    if (workers == 0) throw ConfigError("sweep.workers", "must be at least 1");
  }

  /// Snapshot times: a uniform cadence plus h, all in (0, T).
  std::vector<double> output_times() const {
    std::vector<double> t{h};
    const auto n = static_cast<std::size_t>(std::ceil(snapshots_per_unit * T - 1e-9));
    for (std::size_t k = 1; k < n; ++k) t.push_back(T * static_cast<double>(k) / static_cast<double>(n));
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), t.end());
    return t;
  }
};

struct SweepRow {
  double eps = 0.0, delta = 0.0;
  std::string status = "ok";  ///< "ok" or a failure tag
  double sup_error = 0.0;
  double scheme_error = 0.0;  ///< |sup error at dx - sup error at 2 dx|, 0 when not measured
  bool scheme_flag = false;   ///< scheme error above 20% of the measured value
  double pert_sup = 0.0;      ///< sup over [0, T] of the L-infinity perturbation
  std::array<double, 3> pert_sq{};  ///< sup over [0, T] of ||grad^i(phi, psi, xi)||^2
  double pa_first = 0.0, pa_second = 0.0;
  double eta_min = 0.0, eta_h = 0.0, eta_T = 0.0;
  double q1_l2 = 0.0, f1_l2 = 0.0, hw_z_l2 = 0.0;
  std::size_t cells = 0, steps = 0;

  bool ok() const { return status == "ok"; }
};

struct RateFit {
  double alpha = 0.0, beta = 0.0, C = 0.0, residual = 0.0;
  std::size_t samples = 0;
  double model(double eps) const { return C * std::pow(eps, alpha) * std::pow(std::abs(std::log(eps)), beta); }
};

/// Least squares for y = C eps^alpha |ln eps|^beta with beta fixed.
inline RateFit fit_rate(std::span<const double> eps, std::span<const double> ys, double beta) {
  if (eps.size() != ys.size() || eps.size() < 3) throw FitError("fit_rate: need at least three paired samples");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0 && eps[i] < 1.0)) throw FitError("fit_rate: eps must lie in (0, 1)");
    if (!(ys[i] > 0.0)) throw FitError("fit_rate: non-positive sample");
    lx.push_back(std::log(eps[i]));
    ly.push_back(std::log(ys[i]) - beta * std::log(std::abs(std::log(eps[i]))));
  }
  const auto f = linear_fit(lx, ly);
  return {f.slope, beta, std::exp(f.intercept), f.residual, eps.size()};
}

/// Quantity, log-power used in its fit and how to read it from a row.
struct FitTarget {
  const char* name;
  double beta;
  double (*get)(const SweepRow&);
};

inline const std::vector<FitTarget>& fit_targets() {
  static const std::vector<FitTarget> t{
      {"sup_error", 2.0, [](const SweepRow& r) { return r.sup_error; }},
      {"pert_sup", -17.0 / 4.0, [](const SweepRow& r) { return r.pert_sup; }},
      {"pert_h0_sq", -7.0, [](const SweepRow& r) { return r.pert_sq[0]; }},
      {"q1_l2", -3.5, [](const SweepRow& r) { return r.q1_l2; }},
      {"f1_l2", -3.0, [](const SweepRow& r) { return r.f1_l2; }},
      {"hw_z_l2", -1.0, [](const SweepRow& r) { return r.hw_z_l2; }},
  };
  return t;
}

struct ConvergenceReport {
  std::vector<SweepRow> rows;
  std::map<std::string, RateFit> fits;
  nlohmann::json manifest;
};

namespace detail {

inline SolverConfig row_config(const SweepSpec& spec, const RiemannData& d, const SmoothFanParams& p, double eps,
                               const Grid1D& grid) {
  SolverConfig c = spec.solver;
  c.eps = eps;
  c.T = spec.T;
  c.grid = grid;
  c.n2 = 1;
  c.boundary = Boundary::far_field;
  c.left = d.left;
  c.right = d.right;
  c.output_times = spec.output_times();
  c.initial = smooth_initial(c.gas, d, p);
  if (spec.perturbation) {
    auto ps = *spec.perturbation;
    ps.eps = eps;
    ps.delta = p.delta;
    ps.center = 0.0;
    c.initial = with_perturbation(c.initial, ps);
  }
  return c;
}

inline double l2_of(const std::vector<double>& f, double dx) { return lp_norm(f, dx, 2.0); }

inline SweepRow run_row(const SweepSpec& spec, double eps) {
  SweepRow row;
  row.eps = eps;
  const GasModel& gas = spec.solver.gas;
  try {
    const auto d = make_riemann_data(gas, spec.left, spec.v1_plus);
    row.delta = SmoothFanParams::delta_rule(eps, spec.ledger.b);
    const auto p = SmoothFanParams::for_wave(gas, d, row.delta);
    const auto grid = solver_grid(gas, d, p, spec.T, spec.cells_per_delta);
    const auto cfg = row_config(spec, d, p, eps, grid);
    row.cells = grid.n;
    const auto tr = run_1d(cfg);
    row.steps = tr.steps;
    const auto prof = build_composite(gas, d, p, eps, spec.T, grid, cfg.output_times);
    const std::size_t last = tr.snapshots.size() - 1;

    row.sup_error = sup_error_vs_fan(gas, tr, d, spec.h, spec.T);
    const int orders[] = {0, 1, 2};
    const auto series = perturbation_norms(gas, tr, prof, orders);
    for (std::size_t o = 0; o < 3; ++o) row.pert_sq[o] = series.sup_energy(o);
    const PaEnvelope env{spec.ledger.a1, spec.ledger.a2};
    row.eta_min = kInf;
    for (std::size_t s = 0; s < tr.snapshots.size(); ++s) {
      row.pa_first = std::max(row.pa_first, std::sqrt(series.energy[1][s]) / env.first(eps));
      row.pa_second = std::max(row.pa_second, std::sqrt(series.energy[2][s]) / env.second(eps));
      const auto pf = perturbation_field(tr, prof, s);
      for (const auto* f : pf.components()) row.pert_sup = std::max(row.pert_sup, lp_norm(*f, 1.0, kInf));
      const auto eta = relative_entropy(gas, tr, prof, s);
      row.eta_min = std::min(row.eta_min, *std::min_element(eta.eta_star.begin(), eta.eta_star.end()));
      if (std::abs(tr.snapshots[s].t - spec.h) < 1e-12) row.eta_h = eta.integral;
      if (s == last) row.eta_T = eta.integral;
    }
    const auto res = residual_fields(prof, last);
    row.q1_l2 = l2_of(res.Q1, grid.dx());
    row.f1_l2 = l2_of(res.F1, grid.dx());
    std::vector<double> zn(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
      const auto& z = prof.at(last, i).z;
      zn[i] = std::sqrt(d0(z[0]) * d0(z[0]) + d0(z[1]) * d0(z[1]) + d0(z[2]) * d0(z[2]));
    }
    row.hw_z_l2 = l2_of(zn, grid.dx());

    if (spec.scheme_check) {
      Grid1D coarse = grid;
      coarse.n = std::max<std::size_t>(64, grid.n / 2);
      const auto tc = run_1d(row_config(spec, d, p, eps, coarse));
      row.scheme_error = std::abs(row.sup_error - sup_error_vs_fan(gas, tc, d, spec.h, spec.T));
      row.scheme_flag = row.scheme_error > 0.2 * row.sup_error;
    }
  } catch (const DivergenceError& e) {
    row.status = "divergence@t=" + format_double(e.time());
  } catch (const ProfileBoundError&) {
    row.status = "profile_bound";
  } catch (const ResolutionError&) {
    row.status = "resolution";
  }
  return row;
}

}  // namespace detail

inline nlohmann::json sweep_manifest(const SweepSpec& spec) {
  nlohmann::json j;
  j["eps_list"] = spec.eps_list;
  j["ledger"] = {{"a1", spec.ledger.a1}, {"a2", spec.ledger.a2}, {"b", spec.ledger.b}};
  j["T"] = spec.T;
  j["h"] = spec.h;
  j["cells_per_delta"] = spec.cells_per_delta;
  j["snapshots_per_unit"] = spec.snapshots_per_unit;
  j["left"] = {spec.left.rho, spec.left.v1, spec.left.v2, spec.left.theta};
  j["v1_plus"] = spec.v1_plus;
  const auto& s = spec.solver;
  j["gas"] = {{"gamma", s.gas.gamma}, {"R", s.gas.R}, {"mu", s.gas.mu}, {"lambda", s.gas.lambda}, {"kappa", s.gas.kappa}};
  j["scheme"] = {{"flux", name_of(s.flux)}, {"limiter", name_of(s.limiter)}, {"cfl", s.cfl}};
  j["scheme_check"] = spec.scheme_check;
  if (spec.perturbation) j["perturbation"] = {{"scale", spec.perturbation->scale}, {"seed", spec.perturbation->seed}};
  return j;
}

/// Runs rows on up to `workers` threads. Row results depend only on the
/// spec, so the report does not depend on scheduling.
inline ConvergenceReport epsilon_sweep(const SweepSpec& spec) {
  spec.validate();
  ConvergenceReport rep;
  rep.rows.resize(spec.eps_list.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next++) < spec.eps_list.size();) rep.rows[k] = detail::run_row(spec, spec.eps_list[k]);
  };
  const std::size_t n = std::min(spec.workers, spec.eps_list.size());
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  pool.clear();

  std::vector<double> eps;
  for (const auto& r : rep.rows)
    if (r.ok()) eps.push_back(r.eps);
  if (eps.size() >= 3)
    for (const auto& t : fit_targets()) {
      std::vector<double> ys;
      for (const auto& r : rep.rows)
        if (r.ok()) ys.push_back(t.get(r));
      try {
        rep.fits[t.name] = fit_rate(eps, ys, t.beta);
      } catch (const FitError&) {
        // a zero quantity (eps-free profile, exact data) has no rate
      }
    }
  rep.manifest = sweep_manifest(spec);
  return rep;
}

inline const char* kReportHeader =
    "eps,delta,status,sup_error,scheme_error,scheme_flag,pert_sup,pert_h0_sq,pert_h1_sq,pert_h2_sq,pa_first,"
    "pa_second,eta_min,eta_h,eta_T,q1_l2,f1_l2,hw_z_l2,cells,steps";

inline std::string report_csv(const ConvergenceReport& rep) {
  std::ostringstream os;
  os << kReportHeader << '\n';
  for (const auto& r : rep.rows) {
    const double v[] = {r.sup_error, r.scheme_error};
    os << format_double(r.eps) << ',' << format_double(r.delta) << ',' << r.status << ',' << format_double(v[0])
       << ',' << format_double(v[1]) << ',' << (r.scheme_flag ? 1 : 0) << ',' << format_double(r.pert_sup);
    for (double q : r.pert_sq) os << ',' << format_double(q);
    for (double q : {r.pa_first, r.pa_second, r.eta_min, r.eta_h, r.eta_T, r.q1_l2, r.f1_l2, r.hw_z_l2})
      os << ',' << format_double(q);
    os << ',' << r.cells << ',' << r.steps << '\n';
  }
  return os.str();
}

/// Inverse of report_csv for the row table.
inline std::vector<SweepRow> parse_report_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  if (line != kReportHeader) throw ContractError("parse_report_csv: unexpected header");
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 20) throw ContractError("parse_report_csv: wrong field count");
    SweepRow r;
    std::size_t k = 0;
    auto num = [&] { return parse_double(f[k++]); };
    r.eps = num();
    r.delta = num();
    r.status = f[k++];
    r.sup_error = num();
    r.scheme_error = num();
    r.scheme_flag = f[k++] == "1";
    r.pert_sup = num();
    for (double& q : r.pert_sq) q = num();
    for (double* q : {&r.pa_first, &r.pa_second, &r.eta_min, &r.eta_h, &r.eta_T, &r.q1_l2, &r.f1_l2, &r.hw_z_l2})
      *q = num();
    r.cells = static_cast<std::size_t>(num());
    r.steps = static_cast<std::size_t>(num());
    rows.push_back(r);
  }
  return rows;
}

inline nlohmann::json fits_json(const ConvergenceReport& rep) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, f] : rep.fits)
    j[name] = {{"alpha", f.alpha}, {"beta", f.beta}, {"C", f.C}, {"residual", f.residual}, {"samples", f.samples}};
  return j;
}

/// Plot data: log eps, log value and log of the fitted envelope.
inline std::string plot_data(const ConvergenceReport& rep, const FitTarget& t) {
  std::ostringstream os;
  os << "# log_eps log_value log_envelope\n";
  const auto it = rep.fits.find(t.name);
  for (const auto& r : rep.rows) {
    if (!r.ok() || !(t.get(r) > 0.0)) continue;
    os << format_double(std::log(r.eps)) << ' ' << format_double(std::log(t.get(r))) << ' '
       << (it == rep.fits.end() ? std::string("nan") : format_double(std::log(it->second.model(r.eps)))) << '\n';
  }
  return os.str();
}

/// Writes report.csv, fits.json, manifest.json and plots/*.dat; returns the paths.
inline std::vector<std::string> emit_report(const ConvergenceReport& rep, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "plots", ec);
  if (ec) throw Error("emit_report: cannot create " + out_dir + ": " + ec.message());
  std::vector<std::string> paths;
  auto put = [&](const fs::path& p, const std::string& s) {
    write_text_file(p.string(), s);
    paths.push_back(p.string());
  };
  put(fs::path(out_dir) / "report.csv", report_csv(rep));
  put(fs::path(out_dir) / "fits.json", fits_json(rep).dump(2) + "\n");
  put(fs::path(out_dir) / "manifest.json", rep.manifest.dump(2) + "\n");
  for (const auto& t : fit_targets()) put(fs::path(out_dir) / "plots" / (std::string(t.name) + ".dat"), plot_data(rep, t));
  return paths;
}

}  // namespace rarelab
