#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "rarelab/experiment_harness.hpp"

using namespace rarelab;

namespace {

SweepSpec small_spec() {
  SweepSpec s;
  s.eps_list = {1e-1, 5e-2, 2e-2};
  s.T = 0.5;
  s.h = 0.1;
  s.scheme_check = false;
  return s;
}

std::string field_of(const ConfigError& e) { return e.field(); }

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("rarelab_harness_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(ExponentLedger, DefaultIsValidAndViolationsAreNamed) {
  EXPECT_NO_THROW(ExponentLedger{}.validate());
  auto expect_field = [](ExponentLedger l, const std::string& f) {
    try {
      l.validate();
      ADD_FAILURE() << "accepted " << f;
    } catch (const ConfigError& e) {
      EXPECT_EQ(field_of(e), f);
    }
  };
  expect_field({0.75, 0.2, 1.0 / 6.0}, "ledger.a2");
  expect_field({0.75, 0.25, 0.2}, "ledger.b");
  expect_field({0.7, 0.25, 1.0 / 6.0}, "ledger.a1");
  EXPECT_NO_THROW((ExponentLedger{0.5, 1.0 / 3.0, 0.1}.validate()));
}

TEST(SweepSpec, Validation) {
  auto s = small_spec();
  EXPECT_NO_THROW(s.validate());
  s.eps_list = {1e-2, 1e-1};
  EXPECT_THROW(s.validate(), ConfigError);
  s = small_spec();
  s.eps_list = {};
  EXPECT_THROW(s.validate(), ConfigError);
  s = small_spec();
  s.h = s.T;
  EXPECT_THROW(s.validate(), ConfigError);
  s = small_spec();
  s.cells_per_delta = 8.0;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(SweepSpec, OutputTimesContainWindowStart) {
  auto s = small_spec();
  s.h = 0.13;
  const auto t = s.output_times();
  EXPECT_NE(std::find(t.begin(), t.end(), 0.13), t.end());
  EXPECT_TRUE(std::is_sorted(t.begin(), t.end()));
  EXPECT_LT(t.back(), s.T);
  EXPECT_EQ(t.size(), 10u);
}

TEST(FitRate, ExactModels) {
  const std::vector<double> eps{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  std::vector<double> a, b;
  for (double e : eps) {
    a.push_back(3.0 * std::sqrt(e));
    b.push_back(std::pow(e, 1.0 / 6.0) * std::pow(std::log(e), 2));
  }
  const auto fa = fit_rate(eps, a, 0.0);
  EXPECT_NEAR(fa.alpha, 0.5, 1e-10);
  EXPECT_NEAR(fa.C, 3.0, 1e-10);
  EXPECT_NEAR(fa.residual, 0.0, 1e-12);
  const auto fb = fit_rate(eps, b, 2.0);
  EXPECT_NEAR(fb.alpha, 1.0 / 6.0, 1e-10);
  EXPECT_NEAR(fb.C, 1.0, 1e-10);
  EXPECT_NEAR(fb.model(0.05), std::pow(0.05, 1.0 / 6.0) * std::pow(std::log(0.05), 2), 1e-12);
}

TEST(FitRate, NoisyRecovery) {
  const std::vector<double> eps{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> y;
    for (double e : eps) y.push_back(2.0 * std::pow(e, 0.4) * std::exp(noise(rng)));
    EXPECT_NEAR(fit_rate(eps, y, 0.0).alpha, 0.4, 0.05) << trial;
  }
}

TEST(FitRate, Errors) {
  const std::vector<double> eps{1e-1, 1e-2, 1e-3};
  EXPECT_THROW(fit_rate(eps, std::vector<double>{1.0, 0.0, 1.0}, 0.0), FitError);
  EXPECT_THROW(fit_rate(std::vector<double>{1e-1, 1e-2}, std::vector<double>{1.0, 2.0}, 0.0), FitError);
  EXPECT_THROW(fit_rate(std::vector<double>{1e-1, 1e-1, 1e-1}, std::vector<double>{1.0, 2.0, 3.0}, 0.0), FitError);
}

TEST(EpsilonSweep, SingleEpsilonHasOneRowAndNoFit) {
  auto s = small_spec();
  s.eps_list = {0.05};
  const auto r = epsilon_sweep(s);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_TRUE(r.rows[0].ok());
  EXPECT_TRUE(r.fits.empty());
}

TEST(EpsilonSweep, RowsObeyDeltaRuleAndInvariants) {
  const auto s = small_spec();
  const auto r = epsilon_sweep(s);
  ASSERT_EQ(r.rows.size(), 3u);
  for (const auto& row : r.rows) {
    ASSERT_TRUE(row.ok()) << row.status;
    EXPECT_NEAR(row.delta, std::pow(row.eps, 1.0 / 6.0) * std::abs(std::log(row.eps)), 1e-12);
    EXPECT_GE(row.eta_min, 0.0);
    EXPECT_GT(row.sup_error, 0.0);
    EXPECT_GT(row.hw_z_l2, 0.0);
    EXPECT_LE(row.pa_first, 1.0);
    EXPECT_GT(row.steps, 0u);
  }
  EXPECT_EQ(r.fits.size(), fit_targets().size());
  // The wave amplitude is linear in eps at fixed delta, here softened by delta's drift.
  EXPECT_GT(r.fits.at("hw_z_l2").alpha, 0.6);
}

TEST(EpsilonSweep, DeterministicAcrossWorkerCounts) {
  auto s = small_spec();
  s.scheme_check = true;
  const auto a = epsilon_sweep(s);
  s.workers = 3;
  const auto b = epsilon_sweep(s);
  EXPECT_EQ(report_csv(a), report_csv(b));
  EXPECT_EQ(fits_json(a).dump(), fits_json(b).dump());
  for (const auto& row : a.rows) EXPECT_EQ(row.scheme_flag, row.scheme_error > 0.2 * row.sup_error);
}

TEST(EpsilonSweep, DivergentRowsAreTaggedAndExcluded) {
  auto s = small_spec();
  s.solver.source = [](double, double) { return Vec4{0.0, 0.0, 0.0, -1e4}; };
  const auto r = epsilon_sweep(s);
  for (const auto& row : r.rows) EXPECT_EQ(row.status.rfind("divergence@t=", 0), 0u) << row.status;
  EXPECT_TRUE(r.fits.empty());
}

TEST(EmitReport, EmptyReport) {
  const auto dir = scratch("empty");
  ConvergenceReport rep;
  emit_report(rep, dir.string());
  EXPECT_EQ(read_text_file((dir / "report.csv").string()), std::string(kReportHeader) + "\n");
  EXPECT_EQ(nlohmann::json::parse(read_text_file((dir / "fits.json").string())), nlohmann::json::object());
  EXPECT_TRUE(std::filesystem::exists(dir / "plots" / "sup_error.dat"));
}

TEST(EmitReport, RoundTripAndEnvelopeColumn) {
  const auto rep = epsilon_sweep(small_spec());
  const auto dir = scratch("full");
  const auto paths = emit_report(rep, dir.string());
  EXPECT_EQ(paths.size(), 3 + fit_targets().size());
  const auto rows = parse_report_csv(read_text_file((dir / "report.csv").string()));
  ASSERT_EQ(rows.size(), rep.rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].eps, rep.rows[k].eps);
    EXPECT_EQ(rows[k].sup_error, rep.rows[k].sup_error);
    EXPECT_EQ(rows[k].pert_sq, rep.rows[k].pert_sq);
    EXPECT_EQ(rows[k].eta_T, rep.rows[k].eta_T);
    EXPECT_EQ(rows[k].hw_z_l2, rep.rows[k].hw_z_l2);
    EXPECT_EQ(rows[k].status, rep.rows[k].status);
    EXPECT_EQ(rows[k].cells, rep.rows[k].cells);
  }
  const auto fits = nlohmann::json::parse(read_text_file((dir / "fits.json").string()));
  const double C = fits["sup_error"]["C"], alpha = fits["sup_error"]["alpha"];
  std::istringstream plot(read_text_file((dir / "plots" / "sup_error.dat").string()));
  std::string line;
  std::getline(plot, line);
  std::size_t n = 0;
  for (double le, lv, lenv; plot >> le >> lv >> lenv; ++n) {
    const double e = std::exp(le);
    EXPECT_NEAR(lenv, std::log(C * std::pow(e, alpha) * std::pow(std::abs(std::log(e)), 2.0)), 1e-12);
  }
  EXPECT_EQ(n, rows.size());
  const auto man = nlohmann::json::parse(read_text_file((dir / "manifest.json").string()));
  EXPECT_EQ(man["scheme"]["limiter"], "van_leer");
}
