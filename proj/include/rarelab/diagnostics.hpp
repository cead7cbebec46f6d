#pragma once
/// Perturbation against the composite profile, relative entropy and the
/// distance to the exact fan.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rarelab/discrete.hpp"
#include "rarelab/nsf_solver.hpp"
#include "rarelab/wave_profile.hpp"

namespace rarelab {

/// Derivative of `order` 0..2 on every cell: central inside, second-order
/// one-sided at the two ends.
inline std::vector<double> full_difference(std::span<const double> f, double h, int order) {
  if (order < 0 || order > 2) throw ContractError("full_difference: order must be 0..2");
  const std::size_t n = f.size();
  if (order == 0) return {f.begin(), f.end()};
  if (n < static_cast<std::size_t>(order + 2)) throw ContractError("full_difference: field shorter than stencil");
  std::vector<double> d(n);
  if (order == 1) {
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  } else {
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h);
    d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / (h * h);
  }
  return d;
}

/// Midpoint L^p norm of the order-th derivative.
inline double discrete_norm(std::span<const double> f, double dx, double p, int order) {
  if (!valid_norm_exponent(p)) throw ContractError("discrete_norm: p must be 1, 2 or inf");
  return lp_norm(full_difference(f, dx, order), dx, p);
}

inline double phi_function(double s) {
  if (!(s > 0.0)) throw DomainError("phi_function: requires s > 0");
  return s - std::log(s) - 1.0;
}

/// eta* of `w` against the reference state `r`.
inline double relative_entropy_density(const GasModel& gas, const PrimitiveState& w, const PrimitiveState& r) {
  if (!(w.rho > 0.0) || !(w.theta > 0.0) || !(r.rho > 0.0) || !(r.theta > 0.0))
    throw DomainError("relative_entropy: inadmissible state");
  const double dv1 = w.v1 - r.v1, dv2 = w.v2 - r.v2;
  return gas.R * w.rho * r.theta * phi_function(r.rho / w.rho) +
         gas.cv() * w.rho * r.theta * phi_function(w.theta / r.theta) + 0.5 * w.rho * (dv1 * dv1 + dv2 * dv2);
}

/// Solver field minus profile on one snapshot. Arrays are row-major nx * ny.
struct PerturbationField {
  std::size_t nx = 0, ny = 1;
  double dx = 0.0, dy = 1.0;
  double t = 0.0;
  std::vector<double> phi, psi1, psi2, xi;

  std::array<const std::vector<double>*, 4> components() const { return {&phi, &psi1, &psi2, &xi}; }
};

namespace detail {

inline void require_matching(const Trajectory& tr, const CompositeProfile& prof) {
  if (!(tr.grid == prof.grid)) throw ContractError("diagnostics: profile grid differs from trajectory grid");
  if (prof.times.size() != tr.snapshots.size())
    throw ContractError("diagnostics: profile and trajectory have different snapshot counts");
  for (std::size_t s = 0; s < prof.times.size(); ++s)
    if (std::abs(prof.times[s] - tr.snapshots[s].t) > 1e-9 * std::max(1.0, std::abs(prof.times[s])))
      throw ContractError("diagnostics: profile and trajectory snapshot times differ");
}

inline PrimitiveState profile_state(const CompositeProfile& prof, std::size_t snap, std::size_t i) {
  const auto& c = prof.at(snap, i);
  return {d0(c.rho), d0(c.v1), 0.0, d0(c.theta)};
}

// Squared L2 norm of all derivatives of exact order k (mixed ones counted
// with multiplicity) of one slab field.
inline double derivative_energy(const std::vector<double>& f, std::size_t nx, std::size_t ny, double dx, double dy,
                                int k) {
  std::vector<double> row(nx);
  auto along_x = [&](const std::vector<double>& g, int ord) {
    std::vector<double> out(g.size());
    for (std::size_t j = 0; j < ny; ++j) {
      std::copy_n(g.begin() + static_cast<std::ptrdiff_t>(j * nx), nx, row.begin());
      const auto d = full_difference(row, dx, ord);
      std::copy(d.begin(), d.end(), out.begin() + static_cast<std::ptrdiff_t>(j * nx));
    }
    return out;
  };
  // Periodic central differences in x2.
  auto along_y = [&](const std::vector<double>& g, int ord) {
    std::vector<double> out(g.size(), 0.0);
    if (ny < 2) return out;
    for (std::size_t j = 0; j < ny; ++j) {
      const std::size_t jm = (j + ny - 1) % ny, jp = (j + 1) % ny;
      for (std::size_t i = 0; i < nx; ++i) {
        const double a = g[jm * nx + i], b = g[j * nx + i], c = g[jp * nx + i];
        out[j * nx + i] = ord == 1 ? (c - a) / (2.0 * dy) : (c - 2.0 * b + a) / (dy * dy);
      }
    }
    return out;
  };
  auto sq = [&](const std::vector<double>& g, double w) {
    double s = 0.0;
    for (double v : g) s += v * v;
    return w * s * dx * dy;
  };
  switch (k) {
    case 0: return sq(f, 1.0);
    case 1: return sq(along_x(f, 1), 1.0) + sq(along_y(f, 1), 1.0);
    case 2: return sq(along_x(f, 2), 1.0) + sq(along_y(f, 2), 1.0) + sq(along_y(along_x(f, 1), 1), 2.0);
    default: throw ContractError("perturbation norms: order must be 0..2");
  }
}

// Order 3 is beyond the stored stencil: difference the x-second derivative
// once more.
template <class P>
double dissipation_energy(const std::vector<double>& f, const P& p, int k) {
  if (k < 3) return derivative_energy(f, p.nx, p.ny, p.dx, p.dy, k);
  std::vector<double> g(f.size());
  for (std::size_t j = 0; j < p.ny; ++j) {
    const auto first = f.begin() + static_cast<std::ptrdiff_t>(j * p.nx);
    const std::vector<double> row(first, first + static_cast<std::ptrdiff_t>(p.nx));
    const auto d = full_difference(row, p.dx, 2);
    std::copy(d.begin(), d.end(), g.begin() + static_cast<std::ptrdiff_t>(j * p.nx));
  }
  return derivative_energy(g, p.nx, p.ny, p.dx, p.dy, 1);
}

}  // namespace detail

inline PerturbationField perturbation_field(const Trajectory& tr, const CompositeProfile& prof, std::size_t snap) {
  detail::require_matching(tr, prof);
  PerturbationField p;
  p.nx = tr.grid.n;
  p.ny = tr.n2;
  p.dx = tr.grid.dx();
  p.dy = tr.dy();
  p.t = tr.snapshots.at(snap).t;
  const std::size_t n = p.nx * p.ny;
  p.phi.resize(n);
  p.psi1.resize(n);
  p.psi2.resize(n);
  p.xi.resize(n);
  for (std::size_t j = 0; j < p.ny; ++j)
    for (std::size_t i = 0; i < p.nx; ++i) {
      const auto w = tr.primitive(snap, i, j);
      const auto r = detail::profile_state(prof, snap, i);
      const std::size_t q = j * p.nx + i;
      p.phi[q] = w.rho - r.rho;
      p.psi1[q] = w.v1 - r.v1;
      p.psi2[q] = w.v2;
      p.xi[q] = w.theta - r.theta;
    }
  return p;
}

/// ||grad^k (phi, psi, xi)||^2.
inline double perturbation_energy(const PerturbationField& p, int k) {
  double s = 0.0;
  for (const auto* f : p.components()) s += detail::derivative_energy(*f, p.nx, p.ny, p.dx, p.dy, k);
  return s;
}

struct EntropyField {
  std::vector<double> eta_star;
  double integral = 0.0;
};

inline EntropyField relative_entropy(const GasModel& gas, const Trajectory& tr, const CompositeProfile& prof,
                                     std::size_t snap) {
  detail::require_matching(tr, prof);
  EntropyField e;
  e.eta_star.resize(tr.grid.n * tr.n2);
  for (std::size_t j = 0; j < tr.n2; ++j)
    for (std::size_t i = 0; i < tr.grid.n; ++i)
      e.eta_star[j * tr.grid.n + i] =
          relative_entropy_density(gas, tr.primitive(snap, i, j), detail::profile_state(prof, snap, i));
  e.integral = integrate(e.eta_star, tr.grid.dx() * tr.dy());
  return e;
}

/// Observed range of eta* / |(phi, psi, xi)|^2 over random states within
/// `radius` (Euclidean) of `ref`.
struct EquivalenceBand {
  double lo = 0.0, hi = 0.0;
  double c0() const { return std::max(hi, 1.0 / lo); }
};

inline EquivalenceBand equivalence_band(const GasModel& gas, const PrimitiveState& ref, double radius,
                                        std::size_t samples, std::uint64_t seed) {
  if (!(radius > 0.0) || samples == 0) throw ContractError("equivalence_band: need radius > 0 and samples");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit;
  EquivalenceBand b{kInf, 0.0};
  for (std::size_t s = 0; s < samples; ++s) {
    std::array<double, 4> d;
    double n2 = 0.0;
    for (double& v : d) {
      v = gauss(rng);
      n2 += v * v;
    }
    const double r = radius * std::pow(unit(rng), 0.25) / std::sqrt(n2);
    if (!(r > 0.0)) continue;
    for (double& v : d) v *= r;
    const PrimitiveState w{ref.rho + d[0], ref.v1 + d[1], ref.v2 + d[2], ref.theta + d[3]};
    const double q = relative_entropy_density(gas, w, ref) / (r * r * n2);
    b.lo = std::min(b.lo, q);
    b.hi = std::max(b.hi, q);
  }
  return b;
}

/// Snapshots with h <= t <= T.
inline std::vector<std::size_t> window_snapshots(const Trajectory& tr, double h, double T) {
  std::vector<std::size_t> out;
  const double tol = 1e-12 * std::max(1.0, T);
  for (std::size_t s = 0; s < tr.snapshots.size(); ++s)
    if (tr.snapshots[s].t >= h - tol && tr.snapshots[s].t <= T + tol) out.push_back(s);
  if (out.empty()) throw ContractError("sup_error_vs_fan: no snapshot in [h, T]");
  return out;
}

/// Sup over the window of the componentwise cell-center distance to the fan.
inline double sup_error_vs_fan(const GasModel& gas, const Trajectory& tr, const RiemannData& d, double h, double T) {
  if (!(h > 0.0)) throw ContractError("sup_error_vs_fan: requires h > 0");
  double m = 0.0;
  for (std::size_t s : window_snapshots(tr, h, T)) {
    const double t = tr.snapshots[s].t;
    for (std::size_t i = 0; i < tr.grid.n; ++i) {
      const auto f = exact_fan(gas, d, t, tr.grid.center(i));
      for (std::size_t j = 0; j < tr.n2; ++j) {
        const auto w = tr.primitive(s, i, j);
        m = std::max({m, std::abs(w.rho - f.rho), std::abs(w.v1 - f.v1), std::abs(w.v2),
                      std::abs(w.theta - f.theta)});
      }
    }
  }
  return m;
}

/// Per-snapshot squared perturbation norms and the cumulative dissipation
/// integrals (trapezoid in time).
struct PerturbationSeries {
  std::vector<int> orders;
  std::vector<double> times;
  std::vector<std::vector<double>> energy;             ///< [order index][snap], ||grad^i(phi,psi,xi)||^2
  std::vector<std::vector<double>> viscous_dissipation;  ///< int eps ||grad^{1+i}(psi,xi)||^2
  std::vector<std::vector<double>> fan_dissipation;      ///< int ||sqrt(vbar_1x) grad^i phi||^2

  double sup_energy(std::size_t k) const { return *std::max_element(energy.at(k).begin(), energy.at(k).end()); }
};

inline PerturbationSeries perturbation_norms(const GasModel& gas, const Trajectory& tr, const CompositeProfile& prof,
                                             std::span<const int> orders) {
  (void)gas;
  detail::require_matching(tr, prof);
  for (int k : orders)
    if (k < 0 || k > 2) throw ContractError("perturbation_norms: orders must lie in {0, 1, 2}");
  PerturbationSeries out;
  out.orders.assign(orders.begin(), orders.end());
  const std::size_t ns = tr.snapshots.size(), no = orders.size();
  out.energy.assign(no, std::vector<double>(ns));
  out.viscous_dissipation.assign(no, std::vector<double>(ns, 0.0));
  out.fan_dissipation.assign(no, std::vector<double>(ns, 0.0));
  std::vector<double> prev_visc(no), prev_fan(no);
  for (std::size_t s = 0; s < ns; ++s) {
    const auto p = perturbation_field(tr, prof, s);
    out.times.push_back(p.t);
    for (std::size_t o = 0; o < no; ++o) {
      const int k = orders[o];
      out.energy[o][s] = perturbation_energy(p, k);
      double visc = 0.0;
      for (const auto* f : {&p.psi1, &p.psi2, &p.xi}) visc += detail::dissipation_energy(*f, p, k + 1);
      visc *= prof.eps;
      std::vector<double> phi_k(p.phi.size());
      for (std::size_t j = 0; j < p.ny; ++j) {
        std::vector<double> row(p.phi.begin() + static_cast<std::ptrdiff_t>(j * p.nx),
                                p.phi.begin() + static_cast<std::ptrdiff_t>((j + 1) * p.nx));
        const auto d = full_difference(row, p.dx, k);
        for (std::size_t i = 0; i < p.nx; ++i)
          phi_k[j * p.nx + i] = d[i] * std::sqrt(std::max(prof.at(s, i).bar.d1[1], 0.0));
      }
      const double fan = detail::derivative_energy(phi_k, p.nx, p.ny, p.dx, p.dy, 0);
      if (s > 0) {
        const double dt = out.times[s] - out.times[s - 1];
        out.viscous_dissipation[o][s] = out.viscous_dissipation[o][s - 1] + 0.5 * dt * (visc + prev_visc[o]);
        out.fan_dissipation[o][s] = out.fan_dissipation[o][s - 1] + 0.5 * dt * (fan + prev_fan[o]);
      }
      prev_visc[o] = visc;
      prev_fan[o] = fan;
    }
  }
  return out;
}

/// A priori envelope eps^a |ln eps|^-1 for the first and second derivatives.
struct PaEnvelope {
  double a1 = 0.75, a2 = 0.25;
  double first(double eps) const { return std::pow(eps, a1) / std::abs(std::log(eps)); }
  double second(double eps) const { return std::pow(eps, a2) / std::abs(std::log(eps)); }
};

struct PaCheck {
  double worst_first = 0.0;   ///< max_t ||grad(phi,psi,xi)|| / envelope
  double worst_second = 0.0;  ///< max_t ||grad^2(phi,psi,xi)|| / envelope
  bool holds() const { return worst_first <= 1.0 && worst_second <= 1.0; }
};

inline PaCheck check_pa_envelope(const Trajectory& tr, const CompositeProfile& prof, const PaEnvelope& env = {}) {
  if (!(prof.eps > 0.0 && prof.eps < 1.0)) throw ContractError("check_pa_envelope: requires 0 < eps < 1");
  const int orders[] = {1, 2};
  const auto series = perturbation_norms(tr.gas, tr, prof, orders);
  PaCheck c;
  for (std::size_t s = 0; s < series.times.size(); ++s) {
    c.worst_first = std::max(c.worst_first, std::sqrt(series.energy[0][s]) / env.first(prof.eps));
    c.worst_second = std::max(c.worst_second, std::sqrt(series.energy[1][s]) / env.second(prof.eps));
  }
  return c;
}

struct TimeSeriesRow {
  double t;
  std::string quantity;
  double value;
};

inline std::string time_series_csv(std::span<const TimeSeriesRow> rows) {
  std::ostringstream os;
  os << "t,quantity,value\n";
  for (const auto& r : rows) os << format_double(r.t) << ',' << r.quantity << ',' << format_double(r.value) << '\n';
  return os.str();
}

/// Everything the simulate command reports per snapshot.
inline std::vector<TimeSeriesRow> diagnostic_rows(const GasModel& gas, const Trajectory& tr, const RiemannData& d,
                                                  const CompositeProfile* prof) {
  std::vector<TimeSeriesRow> rows;
  for (std::size_t s = 0; s < tr.snapshots.size(); ++s) {
    const double t = tr.snapshots[s].t;
    rows.push_back({t, "mass_error", tr.conservation_error(s, 0)});
    rows.push_back({t, "energy_error", tr.conservation_error(s, 3)});
    if (tr.n2 > 1) rows.push_back({t, "v2_l2", tr.transverse_velocity_norm(s)});
    if (t > 0.0) rows.push_back({t, "fan_sup_error", sup_error_vs_fan(gas, tr, d, t, t)});
  }
  if (prof) {
    const int orders[] = {0, 1, 2};
    const auto series = perturbation_norms(gas, tr, *prof, orders);
    for (std::size_t s = 0; s < series.times.size(); ++s) {
      const double t = series.times[s];
      for (std::size_t o = 0; o < 3; ++o)
        rows.push_back({t, "perturbation_h" + std::to_string(o) + "_sq", series.energy[o][s]});
      rows.push_back({t, "eta_star_integral", relative_entropy(gas, tr, *prof, s).integral});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  }
  return rows;
}

}  // namespace rarelab
