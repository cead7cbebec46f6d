#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rarelab/rarefaction_waves.hpp"

using namespace rarelab;

namespace {

const GasModel kGas{};
const PrimitiveState kLeft{1.0, 0.0, 0.0, 1.0};

RiemannData default_wave(double v_plus = 1.0) { return make_riemann_data(kGas, kLeft, v_plus); }

double bisect(auto f, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((f(lo) < 0) == (f(mid) < 0))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

SmoothFanParams unit_fan(double delta) { return {-1.0, 1.0, delta}; }

}  // namespace

TEST(ConnectRightState, MatchesIndependentRootFind) {
  const auto r = connect_right_state(kGas, kLeft, 0.5);
  EXPECT_NEAR(r.rho, 1.5003, 1e-4);
  EXPECT_NEAR(r.theta, 1.17618, 1e-5);
  // Independent oracle: equal entropy gives rho = theta^(1/(gamma-1)) for this
  // left state; then solve the velocity invariant for theta by bisection.
  const double g = kGas.gamma;
  const double target = -2.0 * std::sqrt(g) / (g - 1.0);
  const double th = bisect([&](double t) { return 0.5 - 2.0 * std::sqrt(g * t) / (g - 1.0) - target; }, 0.5, 3.0);
  EXPECT_NEAR(r.theta, th, 1e-12);
  EXPECT_NEAR(r.rho, std::pow(th, 1.0 / (g - 1.0)), 1e-12);
  EXPECT_NEAR(entropy(kGas, r.rho, r.theta), entropy(kGas, kLeft.rho, kLeft.theta), 1e-10);
  EXPECT_GT(eigenvalues(kGas, r)[2], eigenvalues(kGas, kLeft)[2]);
}

TEST(ConnectRightState, ZeroStrengthAndCompression) {
  const auto r = connect_right_state(kGas, kLeft, 0.0);
  EXPECT_DOUBLE_EQ(r.rho, kLeft.rho);
  EXPECT_DOUBLE_EQ(r.theta, kLeft.theta);
  EXPECT_THROW(connect_right_state(kGas, kLeft, -0.1), NotARarefactionError);
}

TEST(RiemannData, InvariantsAgree) {
  const auto d = default_wave();
  EXPECT_TRUE(d.connected);
  const auto a = riemann_invariants_3(kGas, d.left), b = riemann_invariants_3(kGas, d.right);
  EXPECT_NEAR(a.sigma1, b.sigma1, 1e-10);
  EXPECT_NEAR(a.sigma2, b.sigma2, 1e-10);
  RiemannData bad{kLeft, {1.0, 1.0, 0.0, 1.0}, false};
  EXPECT_THROW(check_connected(kGas, bad), ContractError);
}

TEST(ExactFan, EdgesAndInterior) {
  const auto d = default_wave();
  const double bm = fan_b_minus(kGas, d), bp = fan_b_plus(kGas, d);
  const auto far_left = exact_fan(kGas, d, 1.0, bm - 1.0);
  EXPECT_EQ(far_left.rho, d.left.rho);
  const auto far_right = exact_fan(kGas, d, 1.0, bp + 1.0);
  EXPECT_EQ(far_right.theta, d.right.theta);
  for (double t : {0.5, 1.0, 2.0}) {
    const auto in_l = exact_fan(kGas, d, t, bm * t * (1 + 1e-14) + 1e-14);
    EXPECT_NEAR(in_l.rho, d.left.rho, 1e-10);
    EXPECT_NEAR(in_l.v1, d.left.v1, 1e-10);
    const auto in_r = exact_fan(kGas, d, t, bp * t * (1 - 1e-14));
    EXPECT_NEAR(in_r.theta, d.right.theta, 1e-10);
    EXPECT_NEAR(in_r.v1, d.right.v1, 1e-10);
    for (int k = 1; k < 10; ++k) {
      const double xi = bm + (bp - bm) * k / 10.0;
      const auto s = exact_fan(kGas, d, t, xi * t);
      EXPECT_NEAR(eigenvalues(kGas, s)[2], xi, 1e-10);
      EXPECT_NEAR(riemann_invariants_3(kGas, s).sigma1, riemann_invariants_3(kGas, d.left).sigma1, 1e-10);
      EXPECT_NEAR(entropy(kGas, s.rho, s.theta), entropy(kGas, d.left.rho, d.left.theta), 1e-10);
    }
  }
  EXPECT_THROW(exact_fan(kGas, d, 0.0, 0.0), DomainError);
}

TEST(BurgersInitial, ShapeAndSlope) {
  const auto p = unit_fan(0.1);
  EXPECT_DOUBLE_EQ(burgers_initial(p, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(burgers_initial(p, 1e3), 1.0);
  EXPECT_DOUBLE_EQ(burgers_initial(p, -1e3), -1.0);
  EXPECT_NEAR(burgers_initial_derivs(p, 0.0).Bx, (p.b_plus - p.b_minus) / (2 * p.delta), 1e-13);
  double prev = -2.0;
  for (double x = -1.0; x <= 1.0; x += 0.01) {
    const double b = burgers_initial(p, x);
    EXPECT_GT(b, prev);
    prev = b;
  }
}

TEST(BurgersSmooth, InitialTimeAndCharacteristicThroughOrigin) {
  const auto p = unit_fan(0.1);
  for (double x : {-0.3, 0.0, 0.17}) {
    const auto b = burgers_smooth(p, 0.0, x);
    EXPECT_EQ(b.B, burgers_initial(p, x));
  }
  const auto b = burgers_smooth(p, 1.0, 0.0);
  EXPECT_NEAR(b.B, 0.0, 1e-14);
  EXPECT_NEAR(b.Bx, 10.0 / 11.0, 1e-12);
  EXPECT_THROW(burgers_smooth(p, -1.0, 0.0), DomainError);
}

TEST(BurgersSmooth, DerivativesMatchFiniteDifferences) {
  const SmoothFanParams p{1.1832, 2.3832, 0.05};
  const double h = 1e-5;
  for (double t : {0.0, 0.3, 1.0}) {
    for (double x : {-0.05, 0.0, 0.02, 1.5 * t + 0.01}) {
      const auto c = burgers_smooth(p, t, x);
      const auto l = burgers_smooth(p, t, x - h), r = burgers_smooth(p, t, x + h);
      EXPECT_NEAR(c.Bx, (r.B - l.B) / (2 * h), 1e-6 * std::max(1.0, std::abs(c.Bx)));
      EXPECT_NEAR(c.Bxx, (r.Bx - l.Bx) / (2 * h), 1e-5 * std::max(1.0, std::abs(c.Bxx)));
      EXPECT_NEAR(c.Bxxx, (r.Bxx - l.Bxx) / (2 * h), 1e-4 * std::max(1.0, std::abs(c.Bxxx)));
      EXPECT_GT(c.Bx, 0.0);
    }
  }
}

TEST(BurgersSmooth, ResidualConvergesAtSecondOrder) {
  const SmoothFanParams p{1.1832, 2.3832, 0.1};
  std::vector<double> errs;
  for (double h : {0.02, 0.01, 0.005}) {
    double worst = 0.0;
    const double t = 0.5;
    for (double x = 0.0; x <= 1.5; x += 0.05) {
      const double bt = (burgers_smooth(p, t + h, x).B - burgers_smooth(p, t - h, x).B) / (2 * h);
      const double bx = (burgers_smooth(p, t, x + h).B - burgers_smooth(p, t, x - h).B) / (2 * h);
      worst = std::max(worst, std::abs(bt + burgers_smooth(p, t, x).B * bx));
    }
    errs.push_back(worst);
  }
  EXPECT_GE(std::log2(errs[0] / errs[1]), 1.9);
  EXPECT_GE(std::log2(errs[1] / errs[2]), 1.9);
}

TEST(BurgersSmooth, SteepDataStillConverges) {
  const SmoothFanParams p{1.1832, 2.3832, 1e-3};
  for (double x = -1.0; x < 4.0; x += 0.013) {
    const auto b = burgers_smooth(p, 1.0, x);
    EXPECT_TRUE(std::isfinite(b.Bxxx));
    EXPECT_GE(b.Bx, 0.0);
  }
}

TEST(SmoothRarefaction, DerivativeIdentities) {
  const auto d = default_wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.1);
  const double g = kGas.gamma;
  const double slope_constant = 1.0 / std::sqrt(kGas.R * g * std::pow(d.right.rho, 1 - g) * d.right.theta);
  for (double t : {0.0, 0.5, 1.0}) {
    for (double x = -0.3; x < 2.5 * t + 0.3; x += 0.05) {
      const auto s = smooth_rarefaction(kGas, d, p, t, x);
      const auto b = burgers_smooth(p, t, x);
      EXPECT_NEAR(s.d1[1] / b.Bx, 2.0 / (g + 1.0), 1e-12);
      EXPECT_NEAR(s.d1[2], (g - 1.0) / std::sqrt(kGas.R * g) * std::sqrt(s.state.theta) * s.d1[1], 1e-12);
      EXPECT_NEAR(density_slope_ratio(kGas, s), slope_constant, 1e-12);
      EXPECT_GT(s.d1[0], 0.0);
      EXPECT_GT(s.d1[1], 0.0);
      EXPECT_GT(s.d1[2], 0.0);
      EXPECT_NEAR(eigenvalues(kGas, s.state)[2], b.B, 1e-12);
    }
  }
}

TEST(SmoothRarefaction, InvariantsConstantAcrossGrid) {
  const auto d = default_wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.05);
  const auto ref = riemann_invariants_3(kGas, d.left);
  const auto grid = norm_grid(p, 1.0);
  for (const auto& s : sample_profile(kGas, d, p, 1.0, grid)) {
    const auto r = riemann_invariants_3(kGas, s.state);
    EXPECT_NEAR(r.sigma1, ref.sigma1, 1e-9);
    EXPECT_NEAR(r.sigma2, ref.sigma2, 1e-9);
  }
}

TEST(SmoothRarefaction, HigherDerivativesMatchFiniteDifferences) {
  const auto d = default_wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.1);
  const double h = 1e-5, t = 0.7;
  for (double x : {0.5, 1.0, 1.7}) {
    const auto c = smooth_rarefaction(kGas, d, p, t, x);
    const auto l = smooth_rarefaction(kGas, d, p, t, x - h), r = smooth_rarefaction(kGas, d, p, t, x + h);
    const double lv[3] = {l.state.rho, l.state.v1, l.state.theta};
    const double rv[3] = {r.state.rho, r.state.v1, r.state.theta};
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(c.d1[k], (rv[k] - lv[k]) / (2 * h), 1e-7);
      EXPECT_NEAR(c.d2[k], (r.d1[k] - l.d1[k]) / (2 * h), 1e-6);
      EXPECT_NEAR(c.d3[k], (r.d2[k] - l.d2[k]) / (2 * h), 1e-4 * std::max(1.0, std::abs(c.d3[k])));
    }
  }
}

TEST(SmoothRarefaction, SatisfiesEulerSystem) {
  const auto d = default_wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.2);
  const double R = kGas.R, cv = kGas.cv(), t = 0.6;
  auto residual = [&](double h) {
    double worst = 0.0;
    for (double x = 0.0; x < 2.0; x += 0.1) {
      auto at = [&](double tt, double xx) { return smooth_rarefaction(kGas, d, p, tt, xx).state; };
      const auto tp = at(t + h, x), tm = at(t - h, x), xp = at(t, x + h), xm = at(t, x - h), c = at(t, x);
      const double mass = (tp.rho - tm.rho) / (2 * h) + (xp.rho * xp.v1 - xm.rho * xm.v1) / (2 * h);
      const double mom = (tp.rho * tp.v1 - tm.rho * tm.v1) / (2 * h) +
                         (xp.rho * xp.v1 * xp.v1 + R * xp.rho * xp.theta - xm.rho * xm.v1 * xm.v1 - R * xm.rho * xm.theta) / (2 * h);
      const double en = cv * ((tp.rho * tp.theta - tm.rho * tm.theta) / (2 * h) +
                              (xp.rho * xp.v1 * xp.theta - xm.rho * xm.v1 * xm.theta) / (2 * h)) +
                        R * c.rho * c.theta * (xp.v1 - xm.v1) / (2 * h);
      worst = std::max({worst, std::abs(mass), std::abs(mom), std::abs(en)});
    }
    return worst;
  };
  const double e1 = residual(0.01), e2 = residual(0.005);
  EXPECT_LT(e2, 1e-2);
  EXPECT_GE(std::log2(e1 / e2), 1.9);
}

TEST(SmoothRarefaction, FarFieldIsLeftState) {
  const auto d = default_wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.1);
  const auto s = smooth_rarefaction(kGas, d, p, 1.0, -50.0);
  EXPECT_NEAR(s.state.rho, d.left.rho, 1e-12);
  EXPECT_NEAR(s.state.v1, d.left.v1, 1e-12);
  EXPECT_NEAR(s.state.theta, d.left.theta, 1e-12);
}

TEST(ProfileDerivativeNorms, PeakSlopeAtInitialTime) {
  const auto d = default_wave();
  for (double delta : {0.1, 0.05}) {
    const auto p = SmoothFanParams::for_wave(kGas, d, delta);
    const auto grid = norm_grid(p, 0.0, 64);
    double vmax = 0.0;
    for (const auto& s : sample_profile(kGas, d, p, 0.0, grid)) vmax = std::max(vmax, s.d1[1]);
    // The grid has a node at distance dx/2 from the peak at x = 0.
    const double expected = 2.0 / (kGas.gamma + 1.0) * (p.b_plus - p.b_minus) / (2.0 * delta);
    EXPECT_NEAR(vmax / expected, 1.0, 1e-3);
  }
}

TEST(ProfileDerivativeNorms, HalvingDeltaDoublesPeakSlope) {
  const auto d = default_wave();
  auto peak = [&](double delta) {
    const auto p = SmoothFanParams::for_wave(kGas, d, delta);
    double vmax = 0.0;
    for (const auto& s : sample_profile(kGas, d, p, 0.0, norm_grid(p, 0.0, 64))) vmax = std::max(vmax, s.d1[1]);
    return vmax;
  };
  EXPECT_NEAR(peak(0.1) / peak(0.05), 0.5, 0.025);
}

TEST(ProfileDerivativeNorms, TotalVariationOfVelocityAtLateTime) {
  const auto d = default_wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.05);
  const double t = 5.0;
  const auto grid = norm_grid(p, t, 32);
  double l1 = 0.0;
  for (const auto& s : sample_profile(kGas, d, p, t, grid)) l1 += s.d1[1] * grid.dx();
  EXPECT_NEAR(l1, 2.0 / (kGas.gamma + 1.0) * (p.b_plus - p.b_minus), 1e-6);
  EXPECT_NEAR(l1, d.right.v1 - d.left.v1, 1e-6);
}

TEST(ProfileDerivativeNorms, TableShapeAndResolutionGuard) {
  const auto d = default_wave();
  const auto p = SmoothFanParams::for_wave(kGas, d, 0.05);
  const double ps[] = {1.0, 2.0, kInf};
  const auto table = profile_derivative_norms(kGas, d, p, 1.0, ps, norm_grid(p, 1.0));
  EXPECT_EQ(table.entries.size(), 9u);
  EXPECT_EQ(table.to_csv().substr(0, 32), "order,p,value,predicted_scale\n1,");
  EXPECT_NEAR(table.at(1, kInf).predicted_scale, 1.0 / 1.05, 1e-15);
  EXPECT_NEAR(table.at(3, 2.0).predicted_scale, std::pow(1.05, -1.0) * std::pow(0.05, -1.5), 1e-9);
  EXPECT_THROW(profile_derivative_norms(kGas, d, p, 1.0, ps, norm_grid(p, 1.0, 8)), ResolutionError);
  EXPECT_THROW(profile_derivative_norms(kGas, d, p, 1.0, 3.0, norm_grid(p, 1.0)), ContractError);
}

TEST(FanDistance, EnvelopeBandAndLimits) {
  const auto d = default_wave();
  std::vector<double> ratios;
  for (double delta : {0.1, 0.05, 0.025}) {
    const auto p = SmoothFanParams::for_wave(kGas, d, delta);
    const double dist = fan_distance(kGas, d, p, 1.0, norm_grid(p, 1.0, 32));
    ratios.push_back(dist / (delta * (std::log(2.0) + std::abs(std::log(delta)))));
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  EXPECT_LE(*hi / *lo, 2.0);

  const auto p = SmoothFanParams::for_wave(kGas, d, 0.1);
  const double d1 = fan_distance(kGas, d, p, 1.0, norm_grid(p, 1.0, 32));
  const double d10 = fan_distance(kGas, d, p, 10.0, norm_grid(p, 10.0, 32));
  const double d100 = fan_distance(kGas, d, p, 100.0, norm_grid(p, 100.0, 4 * 0.1 / 0.1 * 4));
  EXPECT_LT(d10, d1);
  EXPECT_LT(d100, d10);

  const auto flat = make_riemann_data(kGas, kLeft, 0.0);
  const auto pf = SmoothFanParams::for_wave(kGas, flat, 0.1);
  EXPECT_EQ(fan_distance(kGas, flat, pf, 1.0, norm_grid(pf, 1.0)), 0.0);
  EXPECT_THROW(fan_distance(kGas, d, p, 0.0, norm_grid(p, 1.0)), DomainError);
}

TEST(SmoothFanParams, DeltaRule) {
  EXPECT_NEAR(SmoothFanParams::delta_rule(1e-3, 1.0 / 6.0), std::pow(1e-3, 1.0 / 6.0) * std::log(1e3), 1e-14);
  EXPECT_THROW(SmoothFanParams::delta_rule(0.0, 1.0 / 6.0), ConfigError);
  EXPECT_THROW(SmoothFanParams::delta_rule(1.0, 1.0 / 6.0), ConfigError);
  SmoothFanParams bad{1.0, 0.0, 0.1};
  EXPECT_THROW(bad.validate(), ConfigError);
}
