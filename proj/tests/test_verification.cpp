#include <gtest/gtest.h>

#include "rarelab/verification.hpp"

using namespace rarelab;

TEST(Verify, GasSuiteRoutesAndPasses) {
  const auto rep = verify("gas");
  ASSERT_EQ(rep.results.size(), 3u);
  for (const auto& r : rep.results) {
    EXPECT_EQ(r.suite, "gas");
    EXPECT_TRUE(r.pass) << r.name << " " << r.measured.dump();
  }
  EXPECT_TRUE(rep.all_pass());
}

TEST(Verify, UnknownSelectorRejected) {
  EXPECT_THROW(verify("turbulence"), ConfigError);
  EXPECT_TRUE(is_selector("all"));
  EXPECT_FALSE(is_selector(""));
}

TEST(Verify, JsonLinesCarryMeasuredValues) {
  VerifyReport rep;
  rep.add("s", "p", false, {{"x", 1.5}});
  rep.add("s", "q", true, nullptr);
  EXPECT_FALSE(rep.all_pass());
  const auto lines = split(rep.to_jsonl(), '\n');
  const auto j = nlohmann::json::parse(lines[0]);
  EXPECT_EQ(j["property"], "p");
  EXPECT_EQ(j["measured"]["x"], 1.5);
  EXPECT_EQ(j["pass"], false);
}

TEST(Verify, EntropySuiteOnSyntheticRows) {
  ConvergenceReport sweep;
  SweepRow good;
  good.eps = 0.1;
  good.status = "ok";
  good.eta_min = 0.0;
  good.eta_h = 2.0;
  good.eta_T = 1.0;
  SweepRow grows = good;
  grows.eps = 0.03;
  grows.eta_T = 3.0;
  sweep.rows = {good, grows};
  const auto rep = verify_entropy(sweep, {});
  int decay_pass = 0, decay_fail = 0;
  for (const auto& r : rep.results)
    if (r.name == "decays_over_window") (r.pass ? decay_pass : decay_fail)++;
  EXPECT_EQ(decay_pass, 1);
  EXPECT_EQ(decay_fail, 1);
}
