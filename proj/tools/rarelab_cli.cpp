// rarelab: profile | simulate | sweep | verify.
// Exit codes: 0 success, 1 property failure, 2 config or usage error,
// 3 runtime divergence.

#include <chrono>
#include <filesystem>
#include <ctime>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rarelab/rarelab.hpp"

namespace fs = std::filesystem;
using namespace rarelab;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kPropertyFailure = 1, kUsage = 2, kDivergence = 3 };

struct Options {
  std::string config_path;
  std::string out = "out";
  std::vector<std::string> sets;
  std::size_t workers = 1;
  std::optional<std::int64_t> seed;
  std::string selector = "all";
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Written before any work starts and rewritten with status "complete" at the
/// end, so an interrupted command leaves a manifest that says so.
class RunManifest {
 public:
  RunManifest(const Options& o, const std::string& command, const Json& cfg) : path_(fs::path(o.out) / "run.json") {
    fs::create_directories(o.out);
    const auto cfg_path = fs::path(o.out) / "config.json";
    const std::string bytes = cfg.dump();
    write_text_file(cfg_path.string(), bytes);
    j_ = {{"command", command},
          {"config_path", o.config_path.empty() ? nullptr : Json(o.config_path)},
          {"resolved_config", cfg_path.string()},
          {"config_hash", fnv1a_hex(bytes)},
          {"version", kVersion},
          {"start", utc_now()},
          {"end", nullptr},
          {"status", "running"},
          {"outputs", Json::array()}};
    flush();
  }

  std::string hash() const { return j_["config_hash"]; }

  void add(const std::vector<std::string>& paths) {
    for (const auto& p : paths) j_["outputs"].push_back(p);
  }
  void add(const std::string& path) { j_["outputs"].push_back(path); }

  void finish(const std::string& status, int code, const std::string& message = {}) {
    j_["end"] = utc_now();
    j_["status"] = status;
    j_["exit_code"] = code;
    if (!message.empty()) j_["message"] = message;
    flush();
  }

 private:
  void flush() const { write_text_file(path_.string(), j_.dump(2) + "\n"); }

  fs::path path_;
  Json j_;
};

Json resolve_config(const Options& o) {
  std::vector<std::string> sets = o.sets;
  if (o.seed) sets.push_back("perturbation.seed=" + std::to_string(*o.seed));
  std::optional<std::string> path;
  if (!o.config_path.empty()) path = o.config_path;
  return load_config(path, sets);
}

std::string put(const fs::path& dir, const std::string& name, const std::string& text) {
  const auto p = (dir / name).string();
  write_text_file(p, text);
  return p;
}

int cmd_profile(const RunConfig& c, RunManifest& m, const fs::path& out) {
  const auto d = c.riemann();
  const auto p = c.fan();
  const auto prof = build_composite(c.gas, d, p, c.eps, c.T, hw_grid(p, c.T, c.cells_per_delta), c.output_times());

  std::ostringstream os;
  os << "t,x1,rho,v1,theta,rho_bar,v1_bar,theta_bar\n";
  for (std::size_t s = 0; s < prof.times.size(); ++s)
    for (std::size_t i = 0; i < prof.grid.n; ++i) {
      const auto& q = prof.at(s, i);
      os << format_double(prof.times[s]) << ',' << format_double(prof.grid.center(i)) << ','
         << format_double(d0(q.rho)) << ',' << format_double(d0(q.v1)) << ',' << format_double(d0(q.theta)) << ','
         << format_double(q.bar.state.rho) << ',' << format_double(q.bar.state.v1) << ','
         << format_double(q.bar.state.theta) << '\n';
    }
  m.add(put(out, "profile.csv", os.str()));

  HwOptions ho;
  ho.output_times = c.output_times();
  const auto hw = solve_hyperbolic_wave(c.gas, d, p, c.eps, c.T, prof.grid, ho);
  m.add(put(out, "hyperbolic_wave.csv", hw.to_csv()));
  m.add(put(out, "residuals.csv", residuals_csv(prof)));

  std::ostringstream norms;
  norms << "t,order,p,value,predicted_scale\n";
  const double ps[] = {1.0, 2.0, kInf};
  for (double t : {0.0, c.h, c.T}) {
    const auto tab = profile_derivative_norms(c.gas, d, p, t, ps, norm_grid(p, t, c.cells_per_delta));
    for (const auto& e : tab.entries)
      norms << format_double(t) << ',' << e.order << ',' << format_double(e.p) << ',' << format_double(e.value)
            << ',' << format_double(e.predicted_scale) << '\n';
  }
  m.add(put(out, "derivative_norms.csv", norms.str()));

  const auto b = check_profile_bounds(prof, d);
  const Json bounds{{"rho_min", b.rho_min}, {"rho_max", b.rho_max}, {"theta_min", b.theta_min},
                    {"theta_max", b.theta_max}, {"sup_z", b.sup_z}, {"holds", b.holds}};
  m.add(put(out, "profile_bounds.json", bounds.dump(2) + "\n"));
  return kOk;
}

int cmd_simulate(const RunConfig& c, RunManifest& m, const fs::path& out) {
  if (c.h >= c.T) throw ConfigError("h", "must be below T, otherwise the diagnostic window is empty");
  const auto d = c.riemann();
  const auto sc = c.solver();
  const auto tr = run(sc);
  m.add(write_trajectory(tr, (out / "trajectory").string(), m.hash()));

  std::optional<CompositeProfile> prof;
  if (c.ic == "smooth") {
    try {
      prof = build_composite(c.gas, d, c.fan(), c.eps, c.T, sc.grid, sc.output_times);
    } catch (const ResolutionError& e) {
      std::cerr << "perturbation diagnostics skipped: " << e.what() << "\n";
    }
  }
  const auto rows = diagnostic_rows(c.gas, tr, d, prof ? &*prof : nullptr);
  m.add(put(out, "timeseries.csv", time_series_csv(rows)));
  return kOk;
}

int cmd_sweep(const RunConfig& c, RunManifest& m, const fs::path& out, std::size_t workers) {
  const auto rep = epsilon_sweep(c.sweep(workers));
  m.add(emit_report(rep, out.string()));
  std::size_t ok = 0;
  for (const auto& r : rep.rows) {
    ok += r.ok();
    if (!r.ok()) std::cerr << "eps=" << format_double(r.eps) << ": " << r.status << "\n";
  }
  return ok == 0 ? kDivergence : kOk;
}

int cmd_verify(const RunConfig& c, RunManifest& m, const fs::path& out, const Options& o) {
  VerifyOptions vo;
  vo.gas = c.gas;
  vo.left = c.left;
  vo.v1_plus = c.v1_plus;
  vo.workers = o.workers;
  const auto rep = verify(o.selector, vo);
  const auto lines = rep.to_jsonl();
  std::cout << lines;
  m.add(put(out, "verify.jsonl", lines));
  return rep.all_pass() ? kOk : kPropertyFailure;
}

int dispatch(const std::string& command, const Options& o) {
  if (command == "verify" && !is_selector(o.selector)) throw ConfigError("selector", "unknown suite '" + o.selector + "'");
  const Json cfg = resolve_config(o);
  const RunConfig c = parse_run_config(cfg);
  RunManifest m(o, command, cfg);
  const fs::path out(o.out);
  int code = kOk;
  try {
    if (command == "profile") code = cmd_profile(c, m, out);
    else if (command == "simulate") code = cmd_simulate(c, m, out);
    else if (command == "sweep") code = cmd_sweep(c, m, out, o.workers);
    else code = cmd_verify(c, m, out, o);
  } catch (const DivergenceError& e) {
    m.finish("diverged", kDivergence, e.what());
    throw;
  } catch (const std::exception& e) {
    m.finish("failed", kUsage, e.what());
    throw;
  }
  m.finish(code == kOk ? "complete" : "complete_with_failures", code);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smoothed rarefaction waves for the compressible Navier-Stokes-Fourier system"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;
  for (const char* name : {"profile", "simulate", "sweep", "verify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--set", o.sets, "Override a key, e.g. --set eps=0.003")->allow_extra_args(false);
    sub->add_option("--workers", o.workers, "Concurrent sweep rows")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Seed of the perturbation injector")->check(CLI::NonNegativeNumber);
    if (std::string(name) == "verify")
      sub->add_option("selector", o.selector, "gas, fan, wave, residual, solver, rate, envelope, entropy or all");
  }
  app.get_subcommand("profile")->description("Smoothed fan, hyperbolic wave, composite profile and residuals");
  app.get_subcommand("simulate")->description("Run the solver from the configured data and report diagnostics");
  app.get_subcommand("sweep")->description("Epsilon sweep with rate fits");
  app.get_subcommand("verify")->description("Run property suites; prints one JSON line per property");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return dispatch(command, o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
