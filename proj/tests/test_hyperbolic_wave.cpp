#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rarelab/hyperbolic_wave.hpp"

using namespace rarelab;

namespace {

const GasModel kGas{};

RiemannData wave() { return make_riemann_data(kGas, {1.0, 0.0, 0.0, 1.0}, 1.0); }

double l2_diff(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double dx) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int c = 0; c < 3; ++c) s += (a[i][c] - b[i][c]) * (a[i][c] - b[i][c]);
  return std::sqrt(s * dx);
}

// Restrict a field on a grid refined by `f` to the coarse grid by cell averaging.
std::vector<Vec3> restrict_to(const std::vector<Vec3>& fine, std::size_t f) {
  std::vector<Vec3> out(fine.size() / f, Vec3{0, 0, 0});
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t k = 0; k < f; ++k)
      for (int c = 0; c < 3; ++c) out[i][c] += fine[i * f + k][c] / static_cast<double>(f);
  return out;
}

// Independent oracle: Rusanov scheme on the undiagonalized system
// z_t + (A z)_x = (0, s2, s3) with A the conservative Jacobian on the profile.
std::vector<Vec3> rusanov_z(const RiemannData& d, const SmoothFanParams& p, double eps, double T, const Grid1D& g) {
  const std::size_t n = g.n;
  const double dx = g.dx();
  std::vector<Vec3> z(n, Vec3{0, 0, 0}), nz(n);
  double t = 0.0;
  while (t < T) {
    std::vector<Mat3> A(n);
    std::vector<Vec3> S(n);
    std::vector<double> speed(n);
    double smax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = smooth_rarefaction(kGas, d, p, t, g.center(i));
      A[i] = conservative_jacobian(kGas, prim_to_cons(kGas, s.state));
      const auto src = hw_source(kGas, s, eps);
      S[i] = {0.0, src.s2, src.s3};
      speed[i] = std::abs(s.state.v1) + sound_speed(kGas, s.state.rho, s.state.theta);
      smax = std::max(smax, speed[i]);
    }
    const double dt = std::min(0.4 * dx / smax, T - t);
    auto flux = [&](std::size_t l, std::size_t r) {
      const auto fl = A[l] * z[l], fr = A[r] * z[r];
      const double a = std::max(speed[l], speed[r]);
      Vec3 f;
      for (int c = 0; c < 3; ++c) f[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * a * (z[r][c] - z[l][c]);
      return f;
    };
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t im = i == 0 ? 0 : i - 1, ip = i + 1 == n ? n - 1 : i + 1;
      const auto fr = flux(i, ip), fl = flux(im, i);
      for (int c = 0; c < 3; ++c) nz[i][c] = z[i][c] - dt / dx * (fr[c] - fl[c]) + dt * S[i][c];
    }
    z.swap(nz);
    t += dt;
  }
  return z;
}

}  // namespace

TEST(HwSource, LinearInEpsAndVanishingAtZero) {
  const auto d = wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.2);
  const auto s = smooth_rarefaction(kGas, d, p, 0.5, 0.8);
  const auto z = hw_source(kGas, s, 0.0);
  EXPECT_EQ(z.s2, 0.0);
  EXPECT_EQ(z.s3, 0.0);
  const auto a = hw_source(kGas, s, 0.01), b = hw_source(kGas, s, 0.02);
  EXPECT_NEAR(b.s2, 2.0 * a.s2, 1e-15);
  EXPECT_NEAR(b.s3, 2.0 * a.s3, 1e-15);
  EXPECT_NEAR(a.s2, kGas.planar_viscosity() * 0.01 * s.d2[1], 1e-15);

  ProfileSample flat = s;
  flat.d1[1] = flat.d2[1] = 0.0;
  EXPECT_NEAR(hw_source(kGas, flat, 0.01).s3, kGas.kappa * 0.01 * s.d2[2], 1e-16);
  ProfileSample bare;
  EXPECT_THROW(hw_source(kGas, bare, 0.01), ContractError);
}

TEST(HwCoefficients, CouplingMatchesFiniteDifferenceOfL) {
  const auto d = wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.2);
  const double t = 0.4, h = 1e-5;
  for (double x : {0.2, 0.7, 1.1}) {
    const auto c = hw_coefficients(kGas, d, p, 0.01, t, x);
    EXPECT_LE(max_abs_diff(c.L * c.R, Mat3::identity()), 1e-12);
    const Mat3 lp = profile_left_eigenvectors(kGas, d, p, t, x + h), lm = profile_left_eigenvectors(kGas, d, p, t, x - h);
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 2; ++k) {
        double lr = 0.0;
        for (int i = 0; i < 3; ++i) lr += (lp(j, i) - lm(j, i)) / (2 * h) * c.R(i, k);
        const double expect = lr * (c.lambda[k] - c.lambda[2]);
        EXPECT_NEAR(c.M[j][k], expect, 1e-6 * std::max(1.0, std::abs(expect)));
      }
  }
}

TEST(StructureRelation, SecondOrderUnderRefinement) {
  const auto d = wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.2);
  const double t = 0.5;
  const auto g1 = norm_grid(p, t, 16), g2 = norm_grid(p, t, 32);
  const double r1 = verify_structure_relation(kGas, d, p, t, g1);
  const double r2 = verify_structure_relation(kGas, d, p, t, g2);
  EXPECT_NEAR(r1 / r2, 4.0, 0.4);
  EXPECT_TRUE(std::isfinite(r1));
  // Scale check: the residual over h^2 delta^-3 stays bounded under refinement.
  const double c1 = r1 / (g1.dx() * g1.dx() / std::pow(p.delta, 3));
  const double c2 = r2 / (g2.dx() * g2.dx() / std::pow(p.delta, 3));
  EXPECT_NEAR(c1 / c2, 1.0, 0.1);
  EXPECT_THROW(verify_structure_relation(kGas, d, p, t, norm_grid(p, t, 4)), ResolutionError);
}

TEST(StructureRelation, ConstantBackgroundIsExact) {
  const auto flat = make_riemann_data(kGas, {1.0, 0.0, 0.0, 1.0}, 0.0);
  const auto p = SmoothFanParams::for_wave(kGas, flat, 0.2);
  EXPECT_LE(verify_structure_relation(kGas, flat, p, 0.5, norm_grid(p, 0.5, 16)), 1e-12);
}

TEST(SolveHyperbolicWave, ZeroEpsGivesZero) {
  const auto d = wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.3);
  const auto f = solve_hyperbolic_wave(kGas, d, p, 0.0, 0.5, hw_grid(p, 0.5));
  for (const auto& s : f.snapshots)
    for (std::size_t i = 0; i < f.grid.n; ++i)
      for (int c = 0; c < 3; ++c) {
        EXPECT_EQ(s.Z[i][c], 0.0);
        EXPECT_EQ(s.z[i][c], 0.0);
      }
}

TEST(SolveHyperbolicWave, InitialSnapshotAndDiagonalConsistency) {
  const auto d = wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.3);
  HwOptions o;
  o.output_times = {0.25, 0.5};
  const auto f = solve_hyperbolic_wave(kGas, d, p, 0.01, 1.0, hw_grid(p, 1.0), o);
  ASSERT_EQ(f.snapshots.size(), 4u);
  EXPECT_EQ(f.snapshots[0].t, 0.0);
  EXPECT_EQ(f.snapshots[3].t, 1.0);
  for (std::size_t i = 0; i < f.grid.n; ++i)
    for (int c = 0; c < 3; ++c) EXPECT_EQ(f.snapshots[0].Z[i][c], 0.0);
  double worst = 0.0, zmax = 0.0;
  for (const auto& s : f.snapshots)
    for (std::size_t i = 0; i < f.grid.n; ++i) {
      const auto L = profile_left_eigenvectors(kGas, d, p, s.t, f.grid.center(i));
      const auto back = L * s.z[i];
      for (int c = 0; c < 3; ++c) {
        worst = std::max(worst, std::abs(back[c] - s.Z[i][c]));
        zmax = std::max(zmax, std::abs(s.z[i][c]));
      }
    }
  EXPECT_LE(worst, 1e-10);
  EXPECT_GT(zmax, 0.0);
  // Far field: the wave is concentrated around the fan.
  const auto& last = f.final();
  const double edge = std::max(std::abs(last.z.front()[0]), std::abs(last.z.back()[0]));
  EXPECT_LT(edge, 1e-4 * zmax);
}

TEST(SolveHyperbolicWave, SelfConvergenceFirstOrder) {
  const auto d = wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.5);
  const double T = 0.5, eps = 0.01;
  std::vector<std::vector<Vec3>> z;
  std::vector<Grid1D> grids;
  for (double cpd : {16.0, 32.0, 64.0}) {
    const Grid1D g{hw_grid(p, T).x_left, hw_grid(p, T).x_right, hw_grid(p, T).n * static_cast<std::size_t>(cpd / 16.0)};
    grids.push_back(g);
    z.push_back(solve_hyperbolic_wave(kGas, d, p, eps, T, g).final().z);
  }
  const double e1 = l2_diff(z[0], restrict_to(z[1], 2), grids[0].dx());
  const double e2 = l2_diff(restrict_to(z[1], 2), restrict_to(z[2], 4), grids[0].dx());
  EXPECT_GE(std::log2(e1 / e2), 0.9);
}

TEST(SolveHyperbolicWave, AgreesWithUndiagonalizedSolve) {
  const auto d = wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.5);
  const double T = 0.5, eps = 0.01;
  const auto base = hw_grid(p, T);
  std::vector<double> diffs;
  double znorm = 0.0;
  for (std::size_t f : {2u, 4u}) {
    const Grid1D g{base.x_left, base.x_right, base.n * f};
    const auto a = solve_hyperbolic_wave(kGas, d, p, eps, T, g).final().z;
    const auto b = rusanov_z(d, p, eps, T, g);
    diffs.push_back(l2_diff(a, b, g.dx()));
    znorm = l2_diff(a, std::vector<Vec3>(a.size(), Vec3{0, 0, 0}), g.dx());
  }
  EXPECT_LT(diffs[1], diffs[0]);
  EXPECT_LT(diffs[1], 0.1 * znorm);
}

TEST(SolveHyperbolicWave, Z3DoesNotFeedBack) {
  const auto d = wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.3);
  const auto g = hw_grid(p, 0.5);
  const auto a = solve_hyperbolic_wave(kGas, d, p, 0.01, 0.5, g);
  HwOptions o;
  o.initial_Z.assign(g.n, Vec3{0, 0, 0});
  for (std::size_t i = 0; i < g.n; ++i) o.initial_Z[i][2] = std::exp(-g.center(i) * g.center(i));
  const auto b = solve_hyperbolic_wave(kGas, d, p, 0.01, 0.5, g, o);
  bool z3_differs = false;
  for (std::size_t i = 0; i < g.n; ++i) {
    EXPECT_EQ(a.final().Z[i][0], b.final().Z[i][0]);
    EXPECT_EQ(a.final().Z[i][1], b.final().Z[i][1]);
    z3_differs |= a.final().Z[i][2] != b.final().Z[i][2];
  }
  EXPECT_TRUE(z3_differs);
}

TEST(SolveHyperbolicWave, ContractChecks) {
  const auto d = wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.3);
  HwOptions o;
  o.cfl = 1.5;
  EXPECT_THROW(solve_hyperbolic_wave(kGas, d, p, 0.01, 0.5, hw_grid(p, 0.5), o), ConfigError);
  EXPECT_THROW(solve_hyperbolic_wave(kGas, d, p, 0.01, 0.5, hw_grid(p, 0.5, 8)), ResolutionError);
}

TEST(SolveHyperbolicWave, CsvHeader) {
  const auto d = wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.3);
  const auto f = solve_hyperbolic_wave(kGas, d, p, 0.0, 0.1, hw_grid(p, 0.1));
  const auto csv = f.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x1,z1,z2,z3,Z1,Z2,Z3");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), 1 + 2 * f.grid.n);
}

TEST(WaveScalingSweep, SlopesAndEnergyBound) {
  const auto d = wave();
  const std::vector<double> eps{1e-2, 3e-3, 1e-3, 3e-4};
  const auto fit = wave_scaling_sweep(kGas, d, eps, 1.0 / 6.0);
  for (int k = 0; k <= 2; ++k) EXPECT_NEAR(fit.at(k, "L2").slope, 1.0, 0.15) << "k=" << k;
  for (std::size_t i = 1; i < fit.rows.size(); ++i) EXPECT_LE(fit.rows[i].l2_z[0], fit.rows[i - 1].l2_z[0]);
  double lo = 1e300, hi = 0.0;
  for (const auto& r : fit.rows) {
    lo = std::min(lo, r.energy_ratio);
    hi = std::max(hi, r.energy_ratio);
  }
  EXPECT_LE(hi / lo, 3.0);
  EXPECT_EQ(fit.to_json().size(), fit.fits.size());
}

TEST(WaveScalingSweep, DegenerateSweepsRejected) {
  const auto d = wave();
  const std::vector<double> two{1e-2, 1e-3};
  EXPECT_THROW(wave_scaling_sweep(kGas, d, two, 1.0 / 6.0), FitError);
  const std::vector<double> zeros{0.0, 0.0, 0.0};
  EXPECT_THROW(wave_scaling_sweep(kGas, d, zeros, 1.0 / 6.0), FitError);
}
