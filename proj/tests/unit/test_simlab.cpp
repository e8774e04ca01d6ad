#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fseb/io/report.hpp"
#include "fseb/simlab/runs.hpp"

using namespace fseb;
using namespace fseb::simlab;

namespace {

ScenarioConfig stein(std::size_t n, std::size_t reps) {
  ScenarioConfig c;
  c.id = "stein-test";
  c.study = Study::Stein;
  c.n = n;
  c.hyper = {1.0};
  c.alphas = {0.05, 0.005};
  c.replications = reps;
  c.base_seed = 11;
  return c;
}

ScenarioConfig pg_ci(std::size_t n, std::size_t reps) {
  ScenarioConfig c;
  c.id = "pg-test";
  c.study = Study::PoissonCI;
  c.n = n;
  c.hyper = {2.0, 5.0};
  c.alphas = {0.05};
  c.replications = reps;
  c.base_seed = 12;
  return c;
}

ScenarioConfig bb(Study s, std::size_t n, std::size_t reps) {
  ScenarioConfig c;
  c.id = "bb-test";
  c.study = s;
  c.n = n;
  if (s == Study::BinomialTest)
    c.hyper = {2.0, 2.0};
  if (s == Study::BinomialPower)
    c.deltas = {0.2, 0.6};
  c.alphas = {0.05, 0.01};
  c.replications = reps;
  c.base_seed = 13;
  return c;
}

std::string csv(const RunSummary& s) {
  std::ostringstream out;
  io::write_summary_csv(out, s.rows);
  return out.str();
}

} // namespace

TEST(Parallel, EveryIndexOnceAndFirstErrorByIndex) {
  std::vector<std::atomic<int>> seen(257);
  parallel_for(257, 4, [&](std::size_t r) { seen[r]++; });
  for (const auto& v : seen)
    EXPECT_EQ(v.load(), 1);

  for (std::size_t workers : {1u, 3u}) {
    try {
      parallel_for(100, workers, [](std::size_t r) {
        if (r == 17 || r == 60)
          throw std::runtime_error(std::to_string(r));
      });
      FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "17");
    }
  }
}

TEST(Parallel, WorkerCountResolution) {
  EXPECT_EQ(worker_count(5), 5u);
  ::setenv("FSEB_THREADS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  EXPECT_EQ(worker_count(2), 2u);
  ::setenv("FSEB_THREADS", "junk", 1);
  EXPECT_GE(worker_count(), 1u);
  ::unsetenv("FSEB_THREADS");
}

TEST(Scenario, ValidationRejectsBadConfigs) {
  auto c = stein(10, 10);
  c.replications = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = stein(2, 10);
  EXPECT_THROW(c.validate(), ConfigError);
  c = stein(10, 10);
  c.alphas = {1.5};
  EXPECT_THROW(c.validate(), ConfigError);
  c = stein(10, 10);
  c.hyper = {1.0, 2.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = pg_ci(10, 10);
  c.w_hi = c.w_lo;
  EXPECT_THROW(c.validate(), ConfigError);
  c = bb(Study::BinomialPower, 20, 5);
  c.deltas = {0.95};
  EXPECT_THROW(c.validate(), ConfigError);
  c = bb(Study::BinomialTest, 20, 5);
  c.delta = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Runs, IdenticalAcrossWorkerCounts) {
  for (const auto& cfg : {stein(10, 60), pg_ci(10, 40), bb(Study::BinomialTest, 20, 15),
                          bb(Study::BinomialPower, 10, 6), bb(Study::BinomialNull, 20, 12)}) {
    const auto one = run_scenario(cfg, {1});
    const auto three = run_scenario(cfg, {3});
    EXPECT_EQ(one.workers, 1u);
    EXPECT_EQ(three.workers, 3u);
    EXPECT_EQ(csv(one), csv(three)) << study_tag(cfg.study);
    EXPECT_EQ(csv(one), csv(run_scenario(cfg, {2}))) << "re-run differs";
  }
}

TEST(Runs, SeedChangesResults) {
  auto a = stein(10, 200);
  auto b = a;
  b.base_seed = a.base_seed + 1;
  EXPECT_NE(csv(run_stein(a, {1})), csv(run_stein(b, {1})));
}

TEST(Runs, CountsAddUp) {
  const auto s = run_stein(stein(10, 300), {1});
  ASSERT_EQ(s.rows.size(), 4u);
  for (const auto& r : s.rows) {
    EXPECT_EQ(r.trials, 300u);
    EXPECT_EQ(r.hits + r.misses + r.uncomputable_ct, r.trials);
    EXPECT_NEAR(r.proportion,
                static_cast<double>(r.hits) / static_cast<double>(r.trials - r.uncomputable_ct),
                1e-15);
    EXPECT_EQ(r.reps, 300u);
    EXPECT_EQ(r.seed, 11u);
  }
  // the holdout interval is always computable; Morris-Efron sometimes is not
  EXPECT_EQ(s.rows[0].uncomputable_ct, 0u);
  EXPECT_EQ(s.rows[1].uncomputable_ct, s.rows[3].uncomputable_ct);
  EXPECT_TRUE(s.rows[0].rel_width.has_value());
  EXPECT_FALSE(s.rows[1].rel_width.has_value());

  const auto t = run_scenario(bb(Study::BinomialTest, 25, 4), {1});
  for (const auto& r : t.rows)
    EXPECT_EQ(r.trials, 100u);
}

TEST(Runs, SingleReplicationGivesZeroOrOne) {
  for (const auto& cfg : {stein(10, 1), pg_ci(10, 1)}) {
    const auto s = run_scenario(cfg, {1});
    for (const auto& r : s.rows) {
      if (r.trials == r.uncomputable_ct)
        continue;
      EXPECT_TRUE(r.proportion == 0.0 || r.proportion == 1.0) << r.model;
      EXPECT_EQ(r.se, 0.0);
    }
    EXPECT_EQ(csv(s), csv(run_scenario(cfg, {1})));
  }
}

TEST(Runs, HalfTheReplicationsAgreeWithinNoise) {
  auto big = stein(10, 1000);
  auto half = big;
  half.replications = 500;
  const auto a = run_stein(big, {1});
  const auto b = run_stein(half, {1});
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    const double se = std::hypot(a.rows[k].se, b.rows[k].se);
    EXPECT_LE(std::abs(a.rows[k].proportion - b.rows[k].proportion), 4.0 * se + 1e-12)
        << a.rows[k].model << " " << a.rows[k].alpha;
  }
}

TEST(Runs, NullScatterLayout) {
  const auto cfg = bb(Study::BinomialNull, 20, 7);
  const auto s = run_bb_null_scatter(cfg, {2});
  ASSERT_EQ(s.points.size(), 140u);
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    EXPECT_EQ(s.points[k].rep, k / 20);
    EXPECT_EQ(s.points[k].site, k % 20);
    EXPECT_NEAR(s.points[k].theta, 0.1 + 0.8 * static_cast<double>(k % 20) / 19.0, 1e-15);
  }
  ASSERT_EQ(s.thresholds.size(), 2u);
  EXPECT_NEAR(s.thresholds[1], std::log(100.0), 1e-15);
}

TEST(Runs, ShiftRulesAgreeWithoutShift) {
  auto scale = bb(Study::BinomialTest, 30, 10);
  auto clamp = scale;
  clamp.shift = ShiftRule::Clamp;
  EXPECT_EQ(csv(run_bb_test(scale, {1})), csv(run_bb_test(clamp, {1})));
  scale.delta = clamp.delta = 0.9;
  EXPECT_NE(csv(run_bb_test(scale, {1})), csv(run_bb_test(clamp, {1})));
}
