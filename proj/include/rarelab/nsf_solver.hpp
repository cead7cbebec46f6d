#pragma once
/// Finite-volume solver for the compressible Navier-Stokes-Fourier system
/// with viscosity and heat conduction scaled by eps. Planar 1D runs are the
/// slab solver with a single transverse cell.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rarelab/errors.hpp"
#include "rarelab/gas_dynamics.hpp"
#include "rarelab/grid.hpp"
#include "rarelab/rarefaction_waves.hpp"
#include "rarelab/textio.hpp"

namespace rarelab {

/// (mass, momentum 1, momentum 2, energy).
using Vec4 = std::array<double, 4>;

enum class FluxKind { hllc, rusanov };
enum class Limiter { none, minmod, van_leer, unlimited };
enum class Boundary { far_field, periodic };

inline const char* name_of(FluxKind f) { return f == FluxKind::hllc ? "hllc" : "rusanov"; }
inline const char* name_of(Limiter l) {
  constexpr const char* n[] = {"none", "minmod", "van_leer", "unlimited"};
  return n[static_cast<int>(l)];
}
inline const char* name_of(Boundary b) { return b == Boundary::far_field ? "far_field" : "periodic"; }

inline Vec4 as_vec(const ConservedState& u) { return {u.rho, u.m1, u.m2, u.energy}; }
inline ConservedState as_state(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

inline Vec4 euler_flux(const GasModel& gas, const ConservedState& u) {
  const auto w = cons_to_prim(gas, u);
  const double p = pressure(gas, w.rho, w.theta);
  return {u.m1, u.m1 * w.v1 + p, u.m2 * w.v1, (u.energy + p) * w.v1};
}

using InitialCondition = std::function<PrimitiveState(double x1, double x2)>;
using SourceTerm = std::function<Vec4(double t, double x1)>;

struct SolverConfig {
  GasModel gas;
  double eps = 0.0;
  Grid1D grid{-10.0, 10.0, 400};
  std::size_t n2 = 1;  ///< transverse cells; 1 is the planar run
  double period2 = 1.0;
  double T = 1.0;
  double cfl = 0.45;
  FluxKind flux = FluxKind::hllc;
  Limiter limiter = Limiter::van_leer;
  Boundary boundary = Boundary::far_field;
  PrimitiveState left, right;  ///< far-field states
  std::vector<double> output_times;
  InitialCondition initial;
  SourceTerm source;  ///< optional, added to every row

  double dy() const { return period2 / static_cast<double>(n2); }

  void validate() const {
    gas.validate();
    if (!(eps >= 0.0)) throw ConfigError("eps", "must be non-negative");
    if (!(grid.x_left < grid.x_right)) throw ConfigError("solver.domain", "requires x_left < x_right");
    if (grid.n < 64) throw ConfigError("solver.n_cells", "must be at least 64");
    if (n2 < 1) throw ConfigError("solver.n2", "must be at least 1");
    if (!(period2 > 0.0)) throw ConfigError("solver.period2", "must be positive");
    if (!(T > 0.0)) throw ConfigError("solver.T", "must be positive");
    if (!(cfl > 0.0 && cfl <= 0.9)) throw ConfigError("solver.cfl", "must lie in (0, 0.9]");
    if (!initial) throw ConfigError("solver.ic", "initial condition missing");
    if (boundary == Boundary::far_field) {
      detail::require_positive(left.rho, left.theta, "solver far-field left");
      detail::require_positive(right.rho, right.theta, "solver far-field right");
      const auto ll = eigenvalues(gas, left), lr = eigenvalues(gas, right);
      const double lo = std::min({0.0, ll[0], lr[0]}) * T, hi = std::max({0.0, ll[2], lr[2]}) * T;
      const double margin = 10.0 * grid.dx();
      if (grid.x_left > lo - margin || grid.x_right < hi + margin)
        throw ConfigError("solver.domain", "too narrow: waves reach the boundary before T");
    }
  }
};

/// Far-field grid for a wave: the sound-wave reach over [0, T] plus 16 delta
/// and one unit on each side, with dx <= delta / cells_per_delta.
inline Grid1D solver_grid(const GasModel& gas, const RiemannData& d, const SmoothFanParams& p, double T,
                          double cells_per_delta = 24.0) {
  const auto ll = eigenvalues(gas, d.left), lr = eigenvalues(gas, d.right);
  const double lo = std::min({0.0, ll[0], lr[0]}) * T, hi = std::max({0.0, ll[2], lr[2]}) * T;
  const double pad = 16.0 * p.delta + 1.0;
  return Grid1D::covering(lo - pad, hi + pad, p.delta / cells_per_delta);
}

inline InitialCondition constant_initial(const PrimitiveState& s) {
  return [s](double, double) { return s; };
}

inline InitialCondition riemann_initial(const RiemannData& d) {
  return [d](double x1, double) { return x1 < 0.0 ? d.left : d.right; };
}

/// The composite profile at t = 0 is the smooth rarefaction (the hyperbolic
/// wave starts from zero).
inline InitialCondition smooth_initial(const GasModel& gas, const RiemannData& d, const SmoothFanParams& p) {
  return [gas, d, p](double x1, double) { return smooth_rarefaction(gas, d, p, 0.0, x1).state; };
}

/// Compactly supported bump perturbation with H^i norms squared scaling as
/// eps^(4-i) / delta^(7+i): width sqrt(eps delta), amplitude
/// scale * eps^(7/4) / delta^(15/4).
struct PerturbationSpec {
  double scale = 0.0;
  double eps = 0.0;
  double delta = 1.0;
  double center = 0.0;
  std::uint64_t seed = 0;
  bool transverse = false;  ///< add a v2 component varying as sin(2 pi x2 / period2)
  double period2 = 1.0;

  double width() const { return std::sqrt(eps * delta); }
  double amplitude() const { return scale * std::pow(eps, 1.75) * std::pow(delta, -3.75); }
};

inline double bump(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return q * q * q * q;
}

inline InitialCondition with_perturbation(InitialCondition base, const PerturbationSpec& spec) {
  if (spec.scale == 0.0) return base;
  if (!(spec.eps > 0.0) || !(spec.delta > 0.0)) throw ConfigError("perturbation.eps", "eps and delta must be positive");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> weight(-1.0, 1.0), shift(-0.5, 0.5);
  std::array<double, 4> w{}, c{};
  for (int k = 0; k < 4; ++k) {
    w[k] = weight(rng);
    c[k] = spec.center + shift(rng) * spec.width();
  }
  return [base = std::move(base), spec, w, c](double x1, double x2) {
    auto s = base(x1, x2);
    const double a = spec.amplitude(), h = spec.width();
    s.rho += a * w[0] * bump((x1 - c[0]) / h);
    s.v1 += a * w[1] * bump((x1 - c[1]) / h);
    if (spec.transverse)
      s.v2 += a * w[2] * bump((x1 - c[2]) / h) * std::sin(2.0 * std::numbers::pi * x2 / spec.period2);
    s.theta += a * w[3] * bump((x1 - c[3]) / h);
    return s;
  };
}

/// Cell averages in row-major order: index j * nx + i.
struct Field {
  std::size_t nx = 0, ny = 1;
  std::vector<ConservedState> U;
  const ConservedState& at(std::size_t i, std::size_t j = 0) const { return U[j * nx + i]; }
};

inline Field initial_field(const SolverConfig& c) {
  Field f{c.grid.n, c.n2, std::vector<ConservedState>(c.grid.n * c.n2)};
  for (std::size_t j = 0; j < c.n2; ++j)
    for (std::size_t i = 0; i < c.grid.n; ++i)
      f.U[j * f.nx + i] = prim_to_cons(c.gas, c.initial(c.grid.center(i), (static_cast<double>(j) + 0.5) * c.dy()));
  return f;
}

/// Largest stable step: convective and explicit-diffusion limits. In the
/// slab the convective limit is taken per direction, so a planar slab run
/// steps exactly like the 1D run whenever dy is the looser direction; the
/// unsplit update then needs cfl <= 0.45 for the summed Courant number.
inline double stable_dt(const SolverConfig& c, const Field& f) {
  const double dx = c.grid.dx(), dy = c.dy();
  const double nu = std::max(c.gas.planar_viscosity(), c.gas.kappa * (c.gas.gamma - 1.0) / c.gas.R);
  const double h = f.ny > 1 ? std::min(dx, dy) : dx;
  double dt = std::numeric_limits<double>::infinity();
  for (const auto& u : f.U) {
    const auto w = cons_to_prim(c.gas, u);
    const double cs = sound_speed(c.gas, w.rho, w.theta);
    dt = std::min(dt, dx / (std::abs(w.v1) + cs));
    if (f.ny > 1) dt = std::min(dt, dy / (std::abs(w.v2) + cs));
    if (c.eps > 0.0) dt = std::min(dt, h * h * w.rho / (2.0 * c.eps * nu));
  }
  return c.cfl * dt;
}

namespace detail {

/// Primitive state with pressure, in a frame where `u` is normal to the face.
struct Prim {
  double rho, u, v, p;
};

inline Prim prim_of(const GasModel& gas, const ConservedState& s, double t, std::size_t i, std::size_t j) {
  const double rho = s.rho;
  const double u = s.m1 / rho, v = s.m2 / rho;
  const double p = (gas.gamma - 1.0) * (s.energy - 0.5 * rho * (u * u + v * v));
  if (!(rho > 0.0) || !(p > 0.0) || !std::isfinite(p))
    throw DivergenceError(t, "inadmissible state at cell (" + std::to_string(i) + ", " + std::to_string(j) +
                                 "): rho=" + format_double(rho) + ", p=" + format_double(p));
  return {rho, u, v, p};
}

inline Prim prim_of(const GasModel& gas, const PrimitiveState& s) {
  return {s.rho, s.v1, s.v2, gas.R * s.rho * s.theta};
}

inline double limited(Limiter lim, double a, double b) {
  switch (lim) {
    case Limiter::none:
      return 0.0;
    case Limiter::minmod:
      return a * b <= 0.0 ? 0.0 : (std::abs(a) < std::abs(b) ? a : b);
    case Limiter::van_leer:
      return a * b <= 0.0 ? 0.0 : 2.0 * a * b / (a + b);
    case Limiter::unlimited:
      return 0.5 * (a + b);
  }
  return 0.0;
}

inline Prim slope(Limiter lim, const Prim& m, const Prim& c, const Prim& p) {
  return {limited(lim, c.rho - m.rho, p.rho - c.rho), limited(lim, c.u - m.u, p.u - c.u),
          limited(lim, c.v - m.v, p.v - c.v), limited(lim, c.p - m.p, p.p - c.p)};
}

inline Prim shifted(const Prim& c, const Prim& s, double a) {
  return {c.rho + a * s.rho, c.u + a * s.u, c.v + a * s.v, c.p + a * s.p};
}

inline Vec4 physical_flux(double g, const Prim& w) {
  const double E = w.p / (g - 1.0) + 0.5 * w.rho * (w.u * w.u + w.v * w.v);
  return {w.rho * w.u, w.rho * w.u * w.u + w.p, w.rho * w.u * w.v, w.u * (E + w.p)};
}

inline Vec4 conserved(double g, const Prim& w) {
  return {w.rho, w.rho * w.u, w.rho * w.v, w.p / (g - 1.0) + 0.5 * w.rho * (w.u * w.u + w.v * w.v)};
}

inline Vec4 rusanov(double g, const Prim& L, const Prim& R) {
  const double a = std::max(std::abs(L.u) + std::sqrt(g * L.p / L.rho), std::abs(R.u) + std::sqrt(g * R.p / R.rho));
  const auto fl = physical_flux(g, L), fr = physical_flux(g, R);
  const auto ul = conserved(g, L), ur = conserved(g, R);
  Vec4 f;
  for (int k = 0; k < 4; ++k) f[k] = 0.5 * (fl[k] + fr[k]) - 0.5 * a * (ur[k] - ul[k]);
  return f;
}

inline Vec4 hllc(double g, const Prim& L, const Prim& R) {
  const double cl = std::sqrt(g * L.p / L.rho), cr = std::sqrt(g * R.p / R.rho);
  const double sl = std::min(L.u - cl, R.u - cr), sr = std::max(L.u + cl, R.u + cr);
  if (sl >= 0.0) return physical_flux(g, L);
  if (sr <= 0.0) return physical_flux(g, R);
  const double ss = (R.p - L.p + L.rho * L.u * (sl - L.u) - R.rho * R.u * (sr - R.u)) /
                    (L.rho * (sl - L.u) - R.rho * (sr - R.u));
  const Prim& K = ss >= 0.0 ? L : R;
  const double sk = ss >= 0.0 ? sl : sr;
  const auto fk = physical_flux(g, K), uk = conserved(g, K);
  const double coef = K.rho * (sk - K.u) / (sk - ss);
  const Vec4 star{coef, coef * ss, coef * K.v, coef * (uk[3] / K.rho + (ss - K.u) * (ss + K.p / (K.rho * (sk - K.u))))};
  Vec4 f;
  for (int k = 0; k < 4; ++k) f[k] = fk[k] + sk * (star[k] - uk[k]);
  return f;
}

/// Semi-discrete right side; `outflow` receives the net x-boundary flux
/// (right minus left, times dy, summed over rows).
inline std::vector<Vec4> rhs(const SolverConfig& c, const Field& f, double t, Vec4& outflow) {
  const std::size_t nx = f.nx, ny = f.ny;
  const double g = c.gas.gamma, dx = c.grid.dx(), dy = c.dy();
  const double e = c.eps, mu = c.gas.mu, lam = c.gas.lambda, kap = c.gas.kappa, R = c.gas.R;
  const bool periodic = c.boundary == Boundary::periodic;

  std::vector<Prim> W(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) W[j * nx + i] = prim_of(c.gas, f.at(i, j), t, i, j);
  const Prim wl = prim_of(c.gas, c.left), wr = prim_of(c.gas, c.right);
  const auto n = static_cast<long>(nx);
  auto cell = [&](long i, std::size_t j) -> const Prim& {
    if (i < 0) return periodic ? W[j * nx + static_cast<std::size_t>(i + n)] : wl;
    if (i >= n) return periodic ? W[j * nx + static_cast<std::size_t>(i - n)] : wr;
    return W[j * nx + static_cast<std::size_t>(i)];
  };
  auto row = [&](long j) { return static_cast<std::size_t>((j % static_cast<long>(ny) + static_cast<long>(ny)) % static_cast<long>(ny)); };
  auto theta = [&](const Prim& w) { return w.p / (R * w.rho); };
  // Central transverse and streamwise differences at cell centers.
  auto ddy = [&](long i, std::size_t j, auto get) {
    if (ny == 1) return 0.0;
    return (get(cell(i, row(static_cast<long>(j) + 1))) - get(cell(i, row(static_cast<long>(j) - 1)))) / (2.0 * dy);
  };
  auto ddx = [&](long i, std::size_t j, auto get) { return (get(cell(i + 1, j)) - get(cell(i - 1, j))) / (2.0 * dx); };
  auto U = [](const Prim& w) { return w.u; };
  auto V = [](const Prim& w) { return w.v; };
  auto flux = [&](const Prim& L, const Prim& Rt) { return c.flux == FluxKind::hllc ? hllc(g, L, Rt) : rusanov(g, L, Rt); };
  auto reconstruct = [&](const Prim& m, const Prim& ce, const Prim& p, double side) {
    const Prim r = shifted(ce, slope(c.limiter, m, ce, p), 0.5 * side);
    return r.rho > 0.0 && r.p > 0.0 ? r : ce;
  };

  std::vector<Vec4> dU(nx * ny, Vec4{0, 0, 0, 0});
  outflow = {0, 0, 0, 0};
  std::vector<Vec4> Fx(nx + 1);
  for (std::size_t j = 0; j < ny; ++j) {
    for (long fi = 0; fi <= n; ++fi) {
      const Prim& a = cell(fi - 1, j);
      const Prim& b = cell(fi, j);
      const Prim L = reconstruct(cell(fi - 2, j), a, b, 1.0);
      const Prim Rr = reconstruct(a, b, cell(fi + 1, j), -1.0);
      Vec4 F = flux(L, Rr);
      if (e > 0.0) {
        const double ux = (b.u - a.u) / dx, vx = (b.v - a.v) / dx, tx = (theta(b) - theta(a)) / dx;
        const double uy = 0.5 * (ddy(fi - 1, j, U) + ddy(fi, j, U)), vy = 0.5 * (ddy(fi - 1, j, V) + ddy(fi, j, V));
        const double uf = 0.5 * (a.u + b.u), vf = 0.5 * (a.v + b.v);
        const double t11 = e * (2.0 * mu * ux + lam * (ux + vy)), t12 = e * mu * (uy + vx);
        F[1] -= t11;
        F[2] -= t12;
        F[3] -= uf * t11 + vf * t12 + kap * e * tx;
      }
      Fx[static_cast<std::size_t>(fi)] = F;
    }
    for (std::size_t i = 0; i < nx; ++i)
      for (int k = 0; k < 4; ++k) dU[j * nx + i][k] = -(Fx[i + 1][k] - Fx[i][k]) / dx;
    for (int k = 0; k < 4; ++k) outflow[k] += (Fx[nx][k] - Fx[0][k]) * dy;
  }

  if (ny > 1) {
    auto rot = [](const Prim& w) { return Prim{w.rho, w.v, w.u, w.p}; };
    std::vector<Vec4> Gy(ny + 1);
    for (std::size_t i = 0; i < nx; ++i) {
      const long ii = static_cast<long>(i);
      for (long fj = 0; fj <= static_cast<long>(ny); ++fj) {
        const Prim a = rot(cell(ii, row(fj - 1))), b = rot(cell(ii, row(fj)));
        const Prim L = reconstruct(rot(cell(ii, row(fj - 2))), a, b, 1.0);
        const Prim Rr = reconstruct(a, b, rot(cell(ii, row(fj + 1))), -1.0);
        const Vec4 G = flux(L, Rr);
        Vec4 F{G[0], G[2], G[1], G[3]};  // back to (m1, m2)
        if (e > 0.0) {
          // In the rotated frame u is v and v is u.
          const double vy = (b.u - a.u) / dy, uy = (b.v - a.v) / dy, ty = (theta(b) - theta(a)) / dy;
          const double ux = 0.5 * (ddx(ii, row(fj - 1), U) + ddx(ii, row(fj), U));
          const double vx = 0.5 * (ddx(ii, row(fj - 1), V) + ddx(ii, row(fj), V));
          const double uf = 0.5 * (a.v + b.v), vf = 0.5 * (a.u + b.u);
          const double t22 = e * (2.0 * mu * vy + lam * (ux + vy)), t21 = e * mu * (uy + vx);
          F[1] -= t21;
          F[2] -= t22;
          F[3] -= uf * t21 + vf * t22 + kap * e * ty;
        }
        Gy[static_cast<std::size_t>(fj)] = F;
      }
      for (std::size_t j = 0; j < ny; ++j)
        for (int k = 0; k < 4; ++k) dU[j * nx + i][k] -= (Gy[j + 1][k] - Gy[j][k]) / dy;
    }
  }

  if (c.source)
    for (std::size_t i = 0; i < nx; ++i) {
      const Vec4 s = c.source(t, c.grid.center(i));
      for (std::size_t j = 0; j < ny; ++j)
        for (int k = 0; k < 4; ++k) dU[j * nx + i][k] += s[k];
    }
  return dU;
}

inline Field axpy(const Field& f, const std::vector<Vec4>& d, double a) {
  Field out = f;
  for (std::size_t q = 0; q < f.U.size(); ++q) {
    auto v = as_vec(f.U[q]);
    for (int k = 0; k < 4; ++k) v[k] += a * d[q][k];
    out.U[q] = as_state(v);
  }
  return out;
}

}  // namespace detail

/// One SSP-RK2 step. `outflow`, when given, receives the time-integrated net
/// boundary flux of the step.
inline Field step(const SolverConfig& c, const Field& f, double t, double dt, Vec4* outflow = nullptr) {
  Vec4 b0, b1;
  const auto k0 = detail::rhs(c, f, t, b0);
  const Field u1 = detail::axpy(f, k0, dt);
  const auto k1 = detail::rhs(c, u1, t + dt, b1);
  Field out = f;
  for (std::size_t q = 0; q < f.U.size(); ++q) {
    const auto a = as_vec(f.U[q]), b = as_vec(u1.U[q]);
    Vec4 v;
    for (int k = 0; k < 4; ++k) v[k] = 0.5 * a[k] + 0.5 * (b[k] + dt * k1[q][k]);
    out.U[q] = as_state(v);
  }
  if (outflow)
    for (int k = 0; k < 4; ++k) (*outflow)[k] = 0.5 * dt * (b0[k] + b1[k]);
  return out;
}

struct SolverSnapshot {
  double t = 0.0;
  std::vector<ConservedState> U;
  Vec4 totals{};   ///< integrals of the conserved variables
  Vec4 outflow{};  ///< cumulative net boundary outflow since t = 0
};

struct Trajectory {
  GasModel gas;
  Grid1D grid;
  std::size_t n2 = 1;
  double period2 = 1.0;
  std::vector<SolverSnapshot> snapshots;
  std::size_t steps = 0;

  double dy() const { return period2 / static_cast<double>(n2); }
  const SolverSnapshot& final() const { return snapshots.back(); }

  PrimitiveState primitive(std::size_t snap, std::size_t i, std::size_t j = 0) const {
    return cons_to_prim(gas, snapshots.at(snap).U.at(j * grid.n + i));
  }

  /// One primitive variable along a row: 0 rho, 1 v1, 2 v2, 3 theta.
  std::vector<double> column(std::size_t snap, int var, std::size_t j = 0) const {
    std::vector<double> out(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
      const auto w = primitive(snap, i, j);
      out[i] = var == 0 ? w.rho : var == 1 ? w.v1 : var == 2 ? w.v2 : w.theta;
    }
    return out;
  }

  /// |totals(t) + outflow(t) - totals(0)| relative to |totals(0)| (or 1).
  double conservation_error(std::size_t snap, int k) const {
    const auto& s = snapshots.at(snap);
    const double ref = snapshots.front().totals[k];
    return std::abs(s.totals[k] + s.outflow[k] - ref) / std::max(std::abs(ref), 1.0);
  }

  double transverse_velocity_norm(std::size_t snap) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < n2; ++j)
      for (std::size_t i = 0; i < grid.n; ++i) {
        const double v = primitive(snap, i, j).v2;
        acc += v * v;
      }
    return std::sqrt(acc * grid.dx() * dy());
  }

  std::string snapshot_csv(std::size_t snap) const {
    std::ostringstream os;
    os << (n2 > 1 ? "x1,x2,rho,v1,v2,theta\n" : "x1,rho,v1,theta\n");
    for (std::size_t j = 0; j < n2; ++j)
      for (std::size_t i = 0; i < grid.n; ++i) {
        const auto w = primitive(snap, i, j);
        os << format_double(grid.center(i)) << ',';
        if (n2 > 1) os << format_double((static_cast<double>(j) + 0.5) * dy()) << ',';
        os << format_double(w.rho) << ',' << format_double(w.v1) << ',';
        if (n2 > 1) os << format_double(w.v2) << ',';
        os << format_double(w.theta) << '\n';
      }
    return os.str();
  }

  nlohmann::json manifest(const std::string& config_hash) const {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["grid"] = {{"x_left", grid.x_left}, {"x_right", grid.x_right}, {"n", grid.n}, {"n2", n2}, {"period2", period2}};
    j["steps"] = steps;
    auto& ledger = j["ledger"] = nlohmann::json::array();
    for (std::size_t s = 0; s < snapshots.size(); ++s)
      ledger.push_back({{"t", snapshots[s].t},
                        {"mass", snapshots[s].totals[0]},
                        {"momentum", snapshots[s].totals[1]},
                        {"energy", snapshots[s].totals[3]},
                        {"outflow", snapshots[s].outflow},
                        {"mass_error", conservation_error(s, 0)}});
    return j;
  }
};

/// Write snapshot_NNNN.csv files and trajectory.json into `dir`.
inline std::vector<std::string> write_trajectory(const Trajectory& tr, const std::string& dir,
                                                 const std::string& config_hash) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  auto manifest = tr.manifest(config_hash);
  for (std::size_t s = 0; s < tr.snapshots.size(); ++s) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%04zu.csv", s);
    const auto path = (std::filesystem::path(dir) / name).string();
    write_text_file(path, tr.snapshot_csv(s));
    manifest["ledger"][s]["file"] = name;
    paths.push_back(path);
  }
  const auto mpath = (std::filesystem::path(dir) / "trajectory.json").string();
  write_text_file(mpath, manifest.dump(2) + "\n");
  paths.push_back(mpath);
  return paths;
}

inline Vec4 field_totals(const SolverConfig& c, const Field& f) {
  Vec4 t{0, 0, 0, 0};
  const double area = c.grid.dx() * c.dy();
  for (const auto& u : f.U) {
    const auto v = as_vec(u);
    for (int k = 0; k < 4; ++k) t[k] += v[k] * area;
  }
  return t;
}

/// March to T, storing t = 0, each requested time in (0, T) and T.
inline Trajectory run(const SolverConfig& c) {
  c.validate();
  std::vector<double> outs;
  for (double t : c.output_times)
    if (t > 0.0 && t < c.T) outs.push_back(t);
  outs.push_back(c.T);
  std::sort(outs.begin(), outs.end());
  outs.erase(std::unique(outs.begin(), outs.end()), outs.end());

  Field f = initial_field(c);
  Trajectory tr{c.gas, c.grid, c.n2, c.period2, {}, 0};
  Vec4 outflow{0, 0, 0, 0};
  tr.snapshots.push_back({0.0, f.U, field_totals(c, f), outflow});
  double t = 0.0;
  for (double target : outs) {
    while (t < target) {
      double dt = stable_dt(c, f);
      bool hit = false;
      if (t + dt >= target * (1.0 - 1e-14)) {
        dt = target - t;
        hit = true;
      }
      Vec4 b;
      f = step(c, f, t, dt, &b);
      for (int k = 0; k < 4; ++k) outflow[k] += b[k];
      t = hit ? target : t + dt;
      ++tr.steps;
      for (std::size_t q = 0; q < f.U.size(); ++q)
        detail::prim_of(c.gas, f.U[q], t, q % f.nx, q / f.nx);
    }
    tr.snapshots.push_back({t, f.U, field_totals(c, f), outflow});
  }
  return tr;
}

inline Trajectory run_1d(SolverConfig c) {
  c.n2 = 1;
  return run(c);
}

inline Trajectory run_2d_slab(const SolverConfig& c) {
  if (c.n2 < 2) throw ConfigError("solver.n2", "slab mode needs at least 2 transverse cells");
  return run(c);
}

/// Largest componentwise deviation of the two boundary cells of every row
/// from the far-field states over all snapshots.
inline double far_field_deviation(const Trajectory& tr, const PrimitiveState& left, const PrimitiveState& right) {
  double worst = 0.0;
  auto dev = [](const PrimitiveState& a, const PrimitiveState& b) {
    return std::max({std::abs(a.rho - b.rho), std::abs(a.v1 - b.v1), std::abs(a.v2 - b.v2), std::abs(a.theta - b.theta)});
  };
  for (std::size_t s = 0; s < tr.snapshots.size(); ++s)
    for (std::size_t j = 0; j < tr.n2; ++j) {
      worst = std::max(worst, dev(tr.primitive(s, 0, j), left));
      worst = std::max(worst, dev(tr.primitive(s, tr.grid.n - 1, j), right));
    }
  return worst;
}

}  // namespace rarelab
