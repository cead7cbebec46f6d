#pragma once
/// Composite profile: smooth rarefaction plus hyperbolic wave, and the
/// error terms it leaves in the profile equations.

#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "rarelab/errors.hpp"
#include "rarelab/gas_dynamics.hpp"
#include "rarelab/grid.hpp"
#include "rarelab/hyperbolic_wave.hpp"
#include "rarelab/jet.hpp"
#include "rarelab/rarefaction_waves.hpp"
#include "rarelab/textio.hpp"

namespace rarelab {

/// A field value with its first two x1-derivatives: f = j.val.val,
/// f_x = j.val.der, f_xx = j.der.der.
using Jet2 = Jet<Jet<double>>;

inline double d0(const Jet2& j) { return j.val.val; }
inline double d1(const Jet2& j) { return j.val.der; }
inline double d2(const Jet2& j) { return j.der.der; }

struct CompositeSample {
  ProfileSample bar;
  std::array<Jet2, 3> z;
  Jet2 rho, v1, theta;  ///< composite primitives
  Jet2 m1, E;           ///< composite conserved momentum and total energy
};

struct CompositeProfile {
  GasModel gas;
  SmoothFanParams params;
  Grid1D grid;
  double eps = 0.0;
  std::vector<double> times;
  std::vector<std::vector<CompositeSample>> samples;  ///< [snapshot][cell]

  const CompositeSample& at(std::size_t snap, std::size_t i) const { return samples.at(snap).at(i); }
};

/// Smooth profile sampled on a grid at a list of times.
struct SmoothField {
  Grid1D grid;
  std::vector<double> times;
  std::vector<std::vector<ProfileSample>> samples;
};

inline SmoothField sample_smooth_field(const GasModel& gas, const RiemannData& d, const SmoothFanParams& p,
                                       const Grid1D& grid, const std::vector<double>& times) {
  SmoothField f{grid, times, {}};
  for (double t : times) f.samples.push_back(sample_profile(gas, d, p, t, grid));
  return f;
}

namespace detail {

inline Jet2 jet_of(double f, double fx, double fxx) { return second_order_jet(f, fx, fxx); }

/// z with central differences, boundary cells use a copied ghost.
inline std::array<Jet2, 3> z_jets(const std::vector<Vec3>& z, std::size_t i, double dx) {
  const std::size_t n = z.size();
  const std::size_t im = i == 0 ? 0 : i - 1, ip = i + 1 == n ? n - 1 : i + 1;
  std::array<Jet2, 3> out;
  for (int c = 0; c < 3; ++c)
    out[c] = jet_of(z[i][c], (z[ip][c] - z[im][c]) / (2.0 * dx), (z[ip][c] - 2.0 * z[i][c] + z[im][c]) / (dx * dx));
  return out;
}

inline std::array<Jet2, 3> bar_jets(const ProfileSample& s) {
  return {jet_of(s.state.rho, s.d1[0], s.d2[0]), jet_of(s.state.v1, s.d1[1], s.d2[1]),
          jet_of(s.state.theta, s.d1[2], s.d2[2])};
}

}  // namespace detail

/// Assemble one point: conserved variables add, primitives are recovered
/// from the closed-form inversion.
inline CompositeSample composite_point(const GasModel& gas, const ProfileSample& bar, const std::array<Jet2, 3>& z) {
  const auto [rb, vb, tb] = detail::bar_jets(bar);
  const double g = gas.gamma, R = gas.R, cv = gas.cv();
  CompositeSample s{bar, z, {}, {}, {}, {}, {}};
  s.rho = rb + z[0];
  const Jet2 w = -vb * z[0] + z[1];
  s.v1 = vb + w / s.rho;
  s.theta = tb + (g - 1.0) / (R * s.rho) * (-cv * tb * z[0] + z[2] - 0.5 * vb * vb * z[0] - vb * w) -
            (g - 1.0) / (2.0 * R * s.rho * s.rho) * w * w;
  s.m1 = rb * vb + z[1];
  s.E = rb * (cv * tb + 0.5 * vb * vb) + z[2];
  return s;
}

inline CompositeProfile assemble_profile(const GasModel& gas, const SmoothFanParams& p, const SmoothField& smooth,
                                         const HyperbolicWaveField& hw) {
  if (!(smooth.grid == hw.grid)) throw ContractError("assemble_profile: grid mismatch");
  if (smooth.times.size() != hw.snapshots.size()) throw ContractError("assemble_profile: snapshot count mismatch");
  for (std::size_t s = 0; s < smooth.times.size(); ++s)
    if (smooth.times[s] != hw.snapshots[s].t) throw ContractError("assemble_profile: snapshot time mismatch");
  CompositeProfile out{gas, p, hw.grid, hw.eps, smooth.times, {}};
  const double dx = hw.grid.dx();
  for (std::size_t s = 0; s < smooth.times.size(); ++s) {
    std::vector<CompositeSample> row(hw.grid.n);
    for (std::size_t i = 0; i < hw.grid.n; ++i) {
      row[i] = composite_point(gas, smooth.samples[s][i], detail::z_jets(hw.snapshots[s].z, i, dx));
      if (!(d0(row[i].rho) > 0.0) || !(d0(row[i].theta) > 0.0))
        throw ProfileBoundError("assemble_profile: non-positive density or temperature at t=" +
                                format_double(smooth.times[s]) + ", x1=" + format_double(hw.grid.center(i)));
    }
    out.samples.push_back(std::move(row));
  }
  return out;
}

/// Sample the smooth profile at the wave's own snapshots and assemble.
inline CompositeProfile assemble_profile(const GasModel& gas, const RiemannData& d, const SmoothFanParams& p,
                                         const HyperbolicWaveField& hw) {
  std::vector<double> times;
  for (const auto& s : hw.snapshots) times.push_back(s.t);
  return assemble_profile(gas, p, sample_smooth_field(gas, d, p, hw.grid, times), hw);
}

/// Solve the wave up to T with the given snapshot times and assemble.
inline CompositeProfile build_composite(const GasModel& gas, const RiemannData& d, const SmoothFanParams& p, double eps,
                                        double T, const Grid1D& grid, const std::vector<double>& output_times = {}) {
  HwOptions o;
  o.output_times = output_times;
  return assemble_profile(gas, d, p, solve_hyperbolic_wave(gas, d, p, eps, T, grid, o));
}

// ---------------------------------------------------------------------------
// Error terms

inline double residual_Q1(const CompositeProfile& prof, std::size_t snap, std::size_t i) {
  const auto& s = prof.at(snap, i);
  const auto [rb, vb, tb] = detail::bar_jets(s.bar);
  const Jet2 w = vb * s.z[0] - s.z[1];
  return d1((3.0 - prof.gas.gamma) / (2.0 * s.rho) * w * w);
}

/// Q1 from its defining flux difference: the x1-derivative of the
/// quadratic remainder of the momentum flux about the smooth profile.
inline double residual_Q1_flux(const CompositeProfile& prof, std::size_t snap, std::size_t i) {
  const auto& s = prof.at(snap, i);
  const auto [rb, vb, tb] = detail::bar_jets(s.bar);
  const double g = prof.gas.gamma;
  const auto& z = s.z;
  const Jet2 mb = rb * vb, Eb = rb * (prof.gas.cv() * tb + 0.5 * vb * vb);
  auto p = [&](const Jet2& r, const Jet2& m, const Jet2& E) { return (g - 1.0) * (E - m * m / (2.0 * r)); };
  const Jet2 p_rho = (g - 1.0) * mb * mb / (2.0 * rb * rb), p_m = -(g - 1.0) * mb / rb;
  const double p_E = g - 1.0;
  const Jet2 q = s.m1 * s.m1 / s.rho - mb * mb / rb + mb * mb / (rb * rb) * z[0] - 2.0 * mb / rb * z[1] +
                 p(s.rho, s.m1, s.E) - p(rb, mb, Eb) - p_rho * z[0] - p_m * z[1] - p_E * z[2];
  return d1(q);
}

/// Q2 in compact form. It carries the viscous mismatch between the wave
/// source and the internal-energy equation.
inline double residual_Q2(const CompositeProfile& prof, std::size_t snap, std::size_t i) {
  const auto& s = prof.at(snap, i);
  const auto [rb, vb, tb] = detail::bar_jets(s.bar);
  const double g = prof.gas.gamma, R = prof.gas.R, nu = prof.gas.planar_viscosity();
  const auto& z = s.z;
  const Jet2 w = -vb * z[0] + z[1];
  const Jet2 bracket = w / s.rho *
                           (g * z[2] - (g - 1.0) * vb * z[1] - R * g / (g - 1.0) * tb * z[0] +
                            (g - 2.0) / 2.0 * vb * vb * z[0]) -
                       (g - 1.0) * s.v1 * w * w / (2.0 * s.rho);
  const Jet2 q1 = (3.0 - g) / (2.0 * s.rho) * w * w;
  return d1(bracket) - nu * prof.eps * s.bar.d2[1] * d0(w) / d0(s.rho) - d0(s.v1) * d1(q1);
}

/// Q2 from the energy-flux remainder minus v1 Q1, plus the viscous mismatch
/// term the compact form contains.
inline double residual_Q2_flux(const CompositeProfile& prof, std::size_t snap, std::size_t i) {
  const auto& s = prof.at(snap, i);
  const auto [rb, vb, tb] = detail::bar_jets(s.bar);
  const double g = prof.gas.gamma, nu = prof.gas.planar_viscosity();
  const auto& z = s.z;
  const Jet2 mb = rb * vb, Eb = rb * (prof.gas.cv() * tb + 0.5 * vb * vb);
  auto p = [&](const Jet2& r, const Jet2& m, const Jet2& E) { return (g - 1.0) * (E - m * m / (2.0 * r)); };
  const Jet2 pb = p(rb, mb, Eb), pt = p(s.rho, s.m1, s.E);
  const Jet2 p_rho = (g - 1.0) * mb * mb / (2.0 * rb * rb), p_m = -(g - 1.0) * mb / rb;
  const double p_E = g - 1.0;
  const Jet2 advect = s.m1 * s.E / s.rho - mb * Eb / rb + mb * Eb / (rb * rb) * z[0] - Eb / rb * z[1] - mb / rb * z[2];
  const Jet2 work = pt * s.m1 / s.rho - pb * mb / rb - p_rho * mb / rb * z[0] + pb * mb / (rb * rb) * z[0] -
                    p_m * mb / rb * z[1] - pb / rb * z[1] - p_E * mb / rb * z[2];
  const double w = d0(-vb * z[0] + z[1]);
  return d1(advect) + d1(work) - d0(s.v1) * residual_Q1_flux(prof, snap, i) -
         nu * prof.eps * s.bar.d2[1] * w / d0(s.rho);
}

/// F1 by definition: dissipation evaluated on the composite minus on the
/// smooth profile.
inline double residual_F1(const CompositeProfile& prof, std::size_t snap, std::size_t i) {
  const auto& s = prof.at(snap, i);
  const double e = prof.eps, nu = prof.gas.planar_viscosity();
  return -prof.gas.kappa * e * (d2(s.theta) - s.bar.d2[2]) -
         nu * e * (d1(s.v1) * d1(s.v1) - s.bar.d1[1] * s.bar.d1[1]);
}

/// F1 expanded in z. Every term is the negative of the printed expansion,
/// which is what the definition produces.
inline double residual_F1_expanded(const CompositeProfile& prof, std::size_t snap, std::size_t i) {
  const auto& s = prof.at(snap, i);
  const auto [rb, vb, tb] = detail::bar_jets(s.bar);
  const double g = prof.gas.gamma, R = prof.gas.R, e = prof.eps, nu = prof.gas.planar_viscosity();
  const double k = prof.gas.kappa;
  const auto& z = s.z;
  const Jet2 u = (-vb * z[0] + z[1]) / s.rho;
  const Jet2 lin = ((0.5 * vb * vb - R / (g - 1.0) * tb) * z[0] - vb * z[1] + z[2]) / s.rho;
  return -(g - 1.0) / R * k * e * d2(lin) + (g - 1.0) / (2.0 * R) * k * e * d2(u * u) -
         2.0 * nu * e * s.bar.d1[1] * d1(u) - nu * e * d1(u) * d1(u);
}

inline double residual_F2(const CompositeProfile& prof, std::size_t snap, std::size_t i, double phi) {
  const auto& s = prof.at(snap, i);
  const double e = prof.eps, nu = prof.gas.planar_viscosity();
  return -prof.gas.kappa * e * s.bar.d2[2] / d0(s.rho) * phi - nu * e * s.bar.d1[1] * s.bar.d1[1] / d0(s.rho) * phi;
}

struct ResidualFields {
  std::vector<double> Q1, Q2, F1, F2;  ///< F2 is empty unless phi was supplied
};

inline ResidualFields residual_fields(const CompositeProfile& prof, std::size_t snap,
                                      const std::vector<double>& phi = {}) {
  const std::size_t n = prof.grid.n;
  if (!phi.empty() && phi.size() != n) throw ContractError("residual_fields: phi size mismatch");
  ResidualFields r;
  for (std::size_t i = 0; i < n; ++i) {
    r.Q1.push_back(residual_Q1(prof, snap, i));
    r.Q2.push_back(residual_Q2(prof, snap, i));
    r.F1.push_back(residual_F1(prof, snap, i));
    if (!phi.empty()) r.F2.push_back(residual_F2(prof, snap, i, phi[i]));
  }
  return r;
}

inline std::string residuals_csv(const CompositeProfile& prof) {
  std::ostringstream os;
  os << "t,x1,Q1,Q2,F1\n";
  for (std::size_t s = 0; s < prof.times.size(); ++s) {
    const auto r = residual_fields(prof, s);
    for (std::size_t i = 0; i < prof.grid.n; ++i)
      os << format_double(prof.times[s]) << ',' << format_double(prof.grid.center(i)) << ','
         << format_double(r.Q1[i]) << ',' << format_double(r.Q2[i]) << ',' << format_double(r.F1[i]) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Bounds

struct ProfileBounds {
  double rho_min = 0.0, rho_max = 0.0, theta_min = 0.0, theta_max = 0.0;
  double sup_z = 0.0;
  double rho_lo = 0.0, rho_hi = 0.0, theta_lo = 0.0, theta_hi = 0.0;
  bool z_small = false;  ///< sup |z_i| <= rho_-/4
  bool holds = false;
};

/// Compare the composite extrema with 3/4 of the left state from below and
/// the right state plus 1/4 of the left state from above.
inline ProfileBounds check_profile_bounds(const CompositeProfile& prof, const RiemannData& d) {
  ProfileBounds b;
  b.rho_min = b.theta_min = 1e300;
  b.rho_max = b.theta_max = -1e300;
  for (const auto& row : prof.samples)
    for (const auto& s : row) {
      b.rho_min = std::min(b.rho_min, d0(s.rho));
      b.rho_max = std::max(b.rho_max, d0(s.rho));
      b.theta_min = std::min(b.theta_min, d0(s.theta));
      b.theta_max = std::max(b.theta_max, d0(s.theta));
      for (int c = 0; c < 3; ++c) b.sup_z = std::max(b.sup_z, std::abs(d0(s.z[c])));
    }
  const auto& L = d.left;
  const auto& Rt = d.right;
  b.rho_lo = 0.75 * L.rho;
  b.rho_hi = Rt.rho + 0.25 * L.rho;
  b.theta_lo = 0.75 * L.theta;
  b.theta_hi = Rt.theta + 0.25 * L.theta;
  b.z_small = b.sup_z <= 0.25 * L.rho;
  b.holds = b.rho_min >= b.rho_lo && b.rho_max <= b.rho_hi && b.theta_min >= b.theta_lo && b.theta_max <= b.theta_hi;
  return b;
}

// ---------------------------------------------------------------------------
// Residual of the profile system

struct SystemResidual {
  double mass = 0.0, momentum = 0.0, energy = 0.0;  ///< space-time L2 norms
};

/// Residual of mass, momentum and internal energy equations with the
/// viscous sources and the Q terms on the right. Time derivatives are
/// central differences across snapshots, which must be equally spaced with
/// spacing at most delta/4. Norms are L2 in x1 averaged over the interior
/// snapshots; two cells at each end are excluded. Snapshots before `first`
/// are ignored (the wave solver always stores t = 0).
inline SystemResidual profile_system_residual(const CompositeProfile& prof, std::size_t first = 0) {
  const std::size_t ns = prof.times.size(), n = prof.grid.n;
  if (first + 3 > ns) throw ContractError("profile_system_residual: need at least 3 snapshots");
  if (n < 5) throw ContractError("profile_system_residual: need at least 5 cells");
  const double ht = prof.times[first + 1] - prof.times[first];
  for (std::size_t s = first + 1; s < ns; ++s)
    if (std::abs(prof.times[s] - prof.times[s - 1] - ht) > 1e-9 * std::max(1.0, ht))
      throw ContractError("profile_system_residual: snapshots must be equally spaced");
  if (!(ht > 0.0) || ht > prof.params.delta / 4.0)
    throw ResolutionError("profile_system_residual: snapshot spacing " + format_double(ht) + " exceeds delta/4");

  const double R = prof.gas.R, cv = prof.gas.cv(), e = prof.eps, nu = prof.gas.planar_viscosity();
  const double k = prof.gas.kappa, dx = prof.grid.dx();
  SystemResidual out;
  for (std::size_t s = first + 1; s + 1 < ns; ++s)
    for (std::size_t i = 2; i + 2 < n; ++i) {
      const auto& a = prof.at(s - 1, i);
      const auto& b = prof.at(s + 1, i);
      const auto& c = prof.at(s, i);
      const double rho_t = (d0(b.rho) - d0(a.rho)) / (2.0 * ht);
      const double m_t = (d0(b.m1) - d0(a.m1)) / (2.0 * ht);
      const double rt_t = (d0(b.rho) * d0(b.theta) - d0(a.rho) * d0(a.theta)) / (2.0 * ht);
      const double r1 = rho_t + d1(c.m1);
      const double r2 = m_t + d1(c.rho * c.v1 * c.v1 + R * c.rho * c.theta) - nu * e * c.bar.d2[1] -
                        residual_Q1(prof, s, i);
      const double r3 = cv * (rt_t + d1(c.rho * c.v1 * c.theta)) + R * d0(c.rho) * d0(c.theta) * d1(c.v1) -
                        k * e * c.bar.d2[2] - nu * e * c.bar.d1[1] * c.bar.d1[1] - residual_Q2(prof, s, i);
      out.mass += r1 * r1 * dx * ht;
      out.momentum += r2 * r2 * dx * ht;
      out.energy += r3 * r3 * dx * ht;
    }
  const double window = static_cast<double>(ns - first - 2) * ht;
  out.mass = std::sqrt(out.mass / window);
  out.momentum = std::sqrt(out.momentum / window);
  out.energy = std::sqrt(out.energy / window);
  return out;
}

}  // namespace rarelab
