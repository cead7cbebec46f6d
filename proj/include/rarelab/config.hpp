#pragma once
/// Layered run configuration: built-in defaults < JSON file < key=value
/// overrides. Every key must already exist in the defaults.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rarelab/experiment_harness.hpp"
#include "rarelab/textio.hpp"

namespace rarelab {

using Json = nlohmann::json;

inline Json default_config() {
  return Json::parse(R"({
    "gas": {"gamma": 1.4, "R": 1.0, "A": 1.0, "mu": 1.0, "lambda": 0.0, "kappa": 1.0},
    "wave": {"left": {"rho": 1.0, "v1": 0.0, "theta": 1.0}, "v1_plus": 1.0},
    "eps": 0.01,
    "delta": 0.0,
    "T": 1.0,
    "h": 0.1,
    "ledger": {"a1": 0.75, "a2": 0.25, "b": 0.16666666666666666},
    "solver": {
      "flux": "hllc", "limiter": "van_leer", "cfl": 0.45, "ic": "smooth",
      "n_cells": 0, "cells_per_delta": 24.0, "n2": 1, "period2": 1.0
    },
    "output": {"snapshots_per_unit": 20.0},
    "perturbation": {"scale": 0.0, "seed": 0, "transverse": false},
    "sweep": {"eps_list": [0.1, 0.03, 0.01, 0.003, 0.001], "scheme_check": true}
  })");
}

/// 64-bit FNV-1a as 16 hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline bool same_kind(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

inline void overlay(Json& base, const Json& patch, const std::string& path) {
  if (!patch.is_object()) throw ConfigError(path.empty() ? "config" : path, "expected an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw ConfigError(here, "unknown key");
    Json& slot = base[key];
    if (slot.is_object()) {
      overlay(slot, value, here);
    } else {
      if (!same_kind(slot, value)) throw ConfigError(here, "wrong type");
      slot = value;
    }
  }
}

}  // namespace detail

/// Apply "a.b.c=value". The value is read as JSON when it parses, else as a string.
inline void apply_override(Json& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) throw ConfigError("--set", "expected key=value");
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  Json patch = value;
  const auto parts = split(key, '.');
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = Json{{*it, patch}};
  detail::overlay(cfg, patch, "");
}

inline Json load_config(const std::optional<std::string>& path, std::span<const std::string> overrides) {
  Json cfg = default_config();
  if (path) {
    std::string text;
    try {
      text = read_text_file(*path);
    } catch (const Error& e) {
      throw ConfigError("--config", e.what());
    }
    const Json file = Json::parse(text, nullptr, false);
    if (file.is_discarded()) throw ConfigError("--config", "not valid JSON: " + *path);
    detail::overlay(cfg, file, "");
  }
  for (const auto& o : overrides) apply_override(cfg, o);
  return cfg;
}

inline std::string config_hash(const Json& cfg) { return fnv1a_hex(cfg.dump()); }

/// Typed view of a merged configuration.
struct RunConfig {
  GasModel gas;
  PrimitiveState left;
  double v1_plus = 1.0;
  double eps = 0.01;
  double delta = 0.0;  ///< 0 selects the delta rule
  double T = 1.0, h = 0.1;
  ExponentLedger ledger;
  FluxKind flux = FluxKind::hllc;
  Limiter limiter = Limiter::van_leer;
  double cfl = 0.45;
  std::string ic = "smooth";
  std::size_t n_cells = 0;  ///< 0 selects the cells-per-delta rule
  double cells_per_delta = 24.0;
  std::size_t n2 = 1;
  double period2 = 1.0;
  double snapshots_per_unit = 20.0;
  double perturbation_scale = 0.0;
  std::uint64_t seed = 0;
  bool transverse = false;
  std::vector<double> eps_list;
  bool scheme_check = true;

  RiemannData riemann() const { return make_riemann_data(gas, left, v1_plus); }

  double smoothing_width() const {
    if (delta > 0.0) return delta;
    if (eps > 0.0) return SmoothFanParams::delta_rule(eps, ledger.b);
    throw ConfigError("delta", "eps = 0 needs an explicit delta");
  }

  SmoothFanParams fan() const { return SmoothFanParams::for_wave(gas, riemann(), smoothing_width()); }

  std::vector<double> output_times() const {
    std::vector<double> t;
    const auto n = static_cast<std::size_t>(std::ceil(snapshots_per_unit * T - 1e-9));
    for (std::size_t k = 1; k < n; ++k) t.push_back(T * static_cast<double>(k) / static_cast<double>(n));
    if (h > 0.0 && h < T) t.push_back(h);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), t.end());
    return t;
  }

  SolverConfig solver() const {
    const auto d = riemann();
    const auto p = fan();
    SolverConfig c;
    c.gas = gas;
    c.eps = eps;
    c.T = T;
    c.cfl = cfl;
    c.flux = flux;
    c.limiter = limiter;
    c.n2 = n2;
    c.period2 = period2;
    c.left = d.left;
    c.right = d.right;
    c.grid = solver_grid(gas, d, p, T, cells_per_delta);
    if (n_cells > 0) c.grid.n = n_cells;
    c.output_times = output_times();
    if (ic == "smooth") {
      c.initial = smooth_initial(gas, d, p);
    } else if (ic == "riemann") {
      c.initial = riemann_initial(d);
    } else {
      c.initial = constant_initial(d.left);
      c.right = d.left;
    }
    if (perturbation_scale != 0.0) {
      PerturbationSpec ps;
      ps.scale = perturbation_scale;
      ps.eps = eps;
      ps.delta = p.delta;
      ps.seed = seed;
      ps.transverse = transverse;
      ps.period2 = period2;
      c.initial = with_perturbation(c.initial, ps);
    }
    return c;
  }

  SweepSpec sweep(std::size_t workers) const {
    SweepSpec s;
    s.eps_list = eps_list;
    s.ledger = ledger;
    s.T = T;
    s.h = h;
    s.cells_per_delta = cells_per_delta;
    s.snapshots_per_unit = snapshots_per_unit;
    s.left = left;
    s.v1_plus = v1_plus;
    s.solver.gas = gas;
    s.solver.flux = flux;
    s.solver.limiter = limiter;
    s.solver.cfl = cfl;
    s.workers = workers;
    s.scheme_check = scheme_check;
    if (perturbation_scale != 0.0) {
      PerturbationSpec ps;
      ps.scale = perturbation_scale;
      ps.seed = seed;
      s.perturbation = ps;
    }
    return s;
  }
};

namespace detail {

template <class T>
T get(const Json& j, const char* path) {
  const Json* node = &j;
  for (const auto& part : split(path, '.')) node = &node->at(part);
  try {
    return node->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path, "wrong type");
  }
}

}  // namespace detail

/// Parse and validate; every error names the offending key.
inline RunConfig parse_run_config(const Json& j) {
  using detail::get;
  RunConfig c;
  c.gas = {get<double>(j, "gas.gamma"), get<double>(j, "gas.R"), get<double>(j, "gas.A"),
           get<double>(j, "gas.mu"), get<double>(j, "gas.lambda"), get<double>(j, "gas.kappa")};
  c.gas.validate();
  c.left = {get<double>(j, "wave.left.rho"), get<double>(j, "wave.left.v1"), 0.0, get<double>(j, "wave.left.theta")};
  if (!(c.left.rho > 0.0)) throw ConfigError("wave.left.rho", "must be positive");
  if (!(c.left.theta > 0.0)) throw ConfigError("wave.left.theta", "must be positive");
  c.v1_plus = get<double>(j, "wave.v1_plus");
  if (!(c.v1_plus > c.left.v1)) throw ConfigError("wave.v1_plus", "must exceed wave.left.v1 for a rarefaction");
  c.eps = get<double>(j, "eps");
  if (!(c.eps >= 0.0 && c.eps < 1.0)) throw ConfigError("eps", "must lie in [0, 1)");
  c.delta = get<double>(j, "delta");
  if (!(c.delta >= 0.0)) throw ConfigError("delta", "must be non-negative");
  c.T = get<double>(j, "T");
  if (!(c.T > 0.0)) throw ConfigError("T", "must be positive");
  c.h = get<double>(j, "h");
  if (!(c.h > 0.0)) throw ConfigError("h", "must be positive");
  c.ledger = {get<double>(j, "ledger.a1"), get<double>(j, "ledger.a2"), get<double>(j, "ledger.b")};
  c.ledger.validate();

  const auto flux = get<std::string>(j, "solver.flux");
  if (flux == "hllc") c.flux = FluxKind::hllc;
  else if (flux == "rusanov") c.flux = FluxKind::rusanov;
  else throw ConfigError("solver.flux", "expected hllc or rusanov");
  const auto lim = get<std::string>(j, "solver.limiter");
  bool found = false;
  for (auto l : {Limiter::none, Limiter::minmod, Limiter::van_leer, Limiter::unlimited})
    if (lim == name_of(l)) {
      c.limiter = l;
      found = true;
    }
  if (!found) throw ConfigError("solver.limiter", "expected none, minmod, van_leer or unlimited");
  c.cfl = get<double>(j, "solver.cfl");
  c.ic = get<std::string>(j, "solver.ic");
  if (c.ic != "smooth" && c.ic != "riemann" && c.ic != "constant")
    throw ConfigError("solver.ic", "expected smooth, riemann or constant");
  const auto n_cells = get<std::int64_t>(j, "solver.n_cells");
  if (n_cells < 0) throw ConfigError("solver.n_cells", "must be non-negative");
  c.n_cells = static_cast<std::size_t>(n_cells);
  c.cells_per_delta = get<double>(j, "solver.cells_per_delta");
  if (!(c.cells_per_delta >= 16.0)) throw ConfigError("solver.cells_per_delta", "must be at least 16");
  const auto n2 = get<std::int64_t>(j, "solver.n2");
  if (n2 < 1) throw ConfigError("solver.n2", "must be at least 1");
  c.n2 = static_cast<std::size_t>(n2);
  c.period2 = get<double>(j, "solver.period2");
  c.snapshots_per_unit = get<double>(j, "output.snapshots_per_unit");
  if (!(c.snapshots_per_unit > 0.0)) throw ConfigError("output.snapshots_per_unit", "must be positive");
  c.perturbation_scale = get<double>(j, "perturbation.scale");
  const auto seed = get<std::int64_t>(j, "perturbation.seed");
  if (seed < 0) throw ConfigError("perturbation.seed", "must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.transverse = get<bool>(j, "perturbation.transverse");
  c.eps_list = get<std::vector<double>>(j, "sweep.eps_list");
  c.scheme_check = get<bool>(j, "sweep.scheme_check");
  if (c.delta == 0.0 && c.eps == 0.0) throw ConfigError("delta", "eps = 0 needs an explicit delta");
  return c;
}

}  // namespace rarelab
