#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "fseb/engine/confidence_set.hpp"
#include "fseb/engine/dataset.hpp"
#include "fseb/engine/evalue_test.hpp"
#include "fseb/engine/ratio.hpp"
#include "fseb/engine/validity.hpp"
#include "fseb/models/normal_normal.hpp"
#include "fseb/models/poisson_gamma.hpp"
#include "fseb/numerics/rng.hpp"

using namespace fseb;
using namespace fseb::models;

namespace {

Dataset<NormalRecord> normals(std::vector<double> xs) {
  std::vector<NormalRecord> r;
  for (double x : xs)
    r.push_back({x});
  return Dataset<NormalRecord>(std::move(r));
}

// Unit-variance normal likelihood with a marginal that ignores the data and
// returns a fixed log level. Lets tests force empty sets and unsupported
// nulls.
struct FlatMarginal {
  using Record = double;
  using Hyper = double;
  using Parameter = double;
  double level = 10.0;

  double log_marginal(const Record&, const Hyper& h) const { return h; }
  double log_lik(const Record& x, double t) const { return -0.5 * (x - t) * (x - t); }
  Hyper fit_hyper(std::span<const Record>) const { return level; }
  std::optional<std::vector<double>> null_mle(std::span<const Record>,
                                              const NullConstraint&) const {
    return std::nullopt;
  }
  double lik_argmax(const Record& x) const { return x; }
  ParameterDomain domain() const {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
  double search_scale(const Record&) const { return 1.0; }
};
static_assert(ScalarModel<FlatMarginal>);
static_assert(ScalarModel<NormalNormal>);
static_assert(ScalarModel<PoissonGamma>);

} // namespace

TEST(HoldoutSplit, PartitionsIndices) {
  const HoldoutSplit s(6, {4, 1, 4});
  ASSERT_EQ(s.targets().size(), 2u);
  EXPECT_EQ(s.targets()[0], 1u);
  EXPECT_EQ(s.targets()[1], 4u);
  std::vector<std::size_t> comp(s.complement().begin(), s.complement().end());
  EXPECT_EQ(comp, (std::vector<std::size_t>{0, 2, 3, 5}));
  EXPECT_TRUE(s.is_target(4));
  EXPECT_FALSE(s.is_target(0));
}

TEST(HoldoutSplit, RejectsBadSplits) {
  EXPECT_THROW(HoldoutSplit(2, {0}), InsufficientDataError);
  EXPECT_THROW(HoldoutSplit(4, {}), DomainError);
  EXPECT_THROW(HoldoutSplit(4, {4}), DomainError);
  EXPECT_THROW(HoldoutSplit(4, {0, 1, 2}), InsufficientDataError);
}

TEST(Dataset, SplitSizeMustMatch) {
  const auto d = normals({1, 2, 3, 4});
  EXPECT_THROW(d.complement(HoldoutSplit::single(5, 0)), DomainError);
}

TEST(LogRatio, IdentityCase) {
  const NormalNormal m;
  const NormalRecord r{0.0};
  const double theta = 0.0;
  EXPECT_EQ(log_ratio_given_hyper(m, std::span<const NormalRecord>(&r, 1), NormalHyper{0.0},
                                  std::span<const double>(&theta, 1)),
            0.0);
}

TEST(LogRatio, NormalDensityDifference) {
  // complement {-2, 0, 2} has s^2 = 4, so psi_hat^2 = 3
  const auto d = normals({-2.0, 0.0, 2.0, 2.0});
  const double theta = 1.0;
  const double got = log_ratio_statistic(NormalNormal{}, d, HoldoutSplit::single(4, 3),
                                         std::span<const double>(&theta, 1));
  const double expect = (-0.5 * std::log(2.0 * std::numbers::pi * 4.0) - 0.5) -
                        (-0.5 * std::log(2.0 * std::numbers::pi) - 0.5);
  EXPECT_NEAR(got, expect, 1e-14);
  EXPECT_NEAR(got, -0.6931471805599453, 1e-14);
}

TEST(LogRatio, ThetaOutsideDomain) {
  const PGRecord r{2, 1.0};
  const double theta = -0.5;
  EXPECT_THROW(log_ratio_given_hyper(PoissonGamma{}, std::span<const PGRecord>(&r, 1),
                                     PGHyper{1.0, 1.0}, std::span<const double>(&theta, 1)),
               DomainError);
}

TEST(ConfidenceSet, AlphaOneCollapsesToPoint) {
  const auto r = confidence_set_given_hyper(NormalNormal{}, NormalRecord{0.0}, NormalHyper{0.0},
                                            1.0);
  EXPECT_FALSE(r.empty);
  EXPECT_EQ(r.lower, 0.0);
  EXPECT_EQ(r.upper, 0.0);
}

TEST(ConfidenceSet, NumericMatchesClosedForm) {
  numerics::RngStream s(11, 0);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> xs;
    const double psi = s.uniform(0.0, 6.0);
    const int n = static_cast<int>(s.uniform_int(3, 40));
    for (int i = 0; i < n; ++i)
      xs.push_back(s.normal(0.0, 1.0 + psi * psi));
    const auto d = normals(xs);
    const auto i = static_cast<std::size_t>(s.uniform_int(0, n - 1));
    const double alpha = s.uniform(1e-4, 0.5);
    const auto numeric = confidence_set(NormalNormal{}, d, i, alpha);
    const auto comp = d.complement(HoldoutSplit::single(d.size(), i));
    const double psi_hat_sq = nn_fit_holdout(comp).psi_sq;
    const auto closed = nn_exact_ci(xs[i], psi_hat_sq, alpha);
    EXPECT_NEAR(numeric.lower, closed.lower, 1e-6);
    EXPECT_NEAR(numeric.upper, closed.upper, 1e-6);
    // the published form contains the exact set
    const auto published = nn_fseb_ci(xs[i], psi_hat_sq, alpha);
    EXPECT_LE(published.lower, numeric.lower + 1e-12);
    EXPECT_GE(published.upper, numeric.upper - 1e-12);
  }
}

TEST(ConfidenceSet, EmptyWhenMarginalTooLarge) {
  const Dataset<double> d(std::vector<double>{0.0, 1.0, 2.0});
  const auto r = confidence_set(FlatMarginal{}, d, 1, 0.05);
  EXPECT_TRUE(r.empty);
  EXPECT_FALSE(r.contains(1.0));
  EXPECT_EQ(r.width(), 0.0);
  // a low enough marginal gives x +/- sqrt(2 (log 20 - level))
  const auto ok = confidence_set(FlatMarginal{-1.0}, d, 1, 0.05);
  EXPECT_NEAR(ok.upper - 1.0, std::sqrt(2.0 * (1.0 + std::log(20.0))), 1e-9);
}

TEST(ConfidenceSet, NestedAcrossLevels) {
  numerics::RngStream s(5, 5);
  for (int k = 0; k < 50; ++k) {
    std::vector<PGRecord> recs;
    for (int i = 0; i < 12; ++i) {
      const double w = s.uniform(0.0, 10.0);
      recs.push_back({s.poisson(s.gamma(2.0, 2.0) * w), w});
    }
    const Dataset<PGRecord> d(recs);
    const IntervalMaker maker(PoissonGamma{}, d);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto wide = maker(i, 0.0005);
      const auto mid = maker(i, 0.005);
      const auto narrow = maker(i, 0.05);
      ASSERT_FALSE(narrow.empty);
      EXPECT_LE(wide.lower, mid.lower);
      EXPECT_LE(mid.lower, narrow.lower);
      EXPECT_GE(wide.upper, mid.upper);
      EXPECT_GE(mid.upper, narrow.upper);
    }
  }
}

TEST(ConfidenceSet, BoundaryEndpointForZeroCount) {
  const Dataset<PGRecord> d(std::vector<PGRecord>{{0, 3.0}, {4, 2.0}, {1, 5.0}, {7, 4.0}});
  const auto r = confidence_set(PoissonGamma{}, d, 0, 0.05);
  EXPECT_EQ(r.lower, 0.0);
  EXPECT_GT(r.upper, 0.0);
  EXPECT_TRUE(std::isfinite(r.upper));
}

TEST(ConfidenceSet, HoldoutIsolation) {
  numerics::RngStream s(21, 0);
  std::vector<PGRecord> recs;
  for (int i = 0; i < 15; ++i) {
    const double w = s.uniform(0.5, 10.0);
    recs.push_back({s.poisson(s.gamma(2.0, 1.0) * w), w});
  }
  const PoissonGamma m;
  const Dataset<PGRecord> d(recs);
  const auto base = m.fit_hyper(d.complement(HoldoutSplit::single(d.size(), 6)));
  for (std::int64_t x : {0, 1, 1000, 1000000}) {
    auto mutated = recs;
    mutated[6] = {x, 1e-3 + static_cast<double>(x)};
    const Dataset<PGRecord> d2(mutated);
    const auto h = m.fit_hyper(d2.complement(HoldoutSplit::single(d2.size(), 6)));
    EXPECT_EQ(h.a, base.a);
    EXPECT_EQ(h.b, base.b);
  }
}

TEST(IntervalMaker, ReusesHyperAcrossLevels) {
  const auto d = normals({0.3, -1.2, 2.5, 0.7, -0.4});
  const IntervalMaker maker(NormalNormal{}, d);
  const auto direct = confidence_set(NormalNormal{}, d, 2, 0.01);
  const auto cached = maker(2, 0.01);
  EXPECT_EQ(direct.lower, cached.lower);
  EXPECT_EQ(direct.upper, cached.upper);
  EXPECT_THROW(IntervalMaker(NormalNormal{}, normals({1.0, 2.0})), InsufficientDataError);
}

TEST(EValueTest, PTimesTIsOne) {
  const auto d = normals({0.2, 3.1, -0.5, 1.7, -2.2, 4.0});
  const auto rep = evalue_test(NormalNormal{}, d, {1, 5}, NullConstraint::equal());
  if (rep.T >= 1.0)
    EXPECT_NEAR(rep.p_value * rep.T, 1.0, 1e-14);
  else
    EXPECT_EQ(rep.p_value, 1.0);
  EXPECT_EQ(rep.targets, (std::vector<std::size_t>{1, 5}));
}

TEST(EValueTest, RejectionThreshold) {
  const auto r = EValueReport::from_log(std::log(20.0), {0}, "x");
  EXPECT_TRUE(r.rejects(0.05));
  EXPECT_FALSE(r.rejects(0.049));
  EXPECT_NEAR(r.p_value, 0.05, 1e-15);
  EXPECT_EQ(EValueReport::from_log(-3.0, {0}, "x").p_value, 1.0);
  EXPECT_THROW(EValueReport::from_log(std::numeric_limits<double>::infinity(), {}, ""),
               EvaluationError);
}

TEST(EValueTest, SaturatesT) {
  const auto r = EValueReport::from_log(2000.0, {0}, "x");
  EXPECT_EQ(r.T, std::numeric_limits<double>::max());
  EXPECT_EQ(r.log_T, 2000.0);
  EXPECT_GT(r.p_value, 0.0 - 1.0);
}

TEST(EValueTest, UnsupportedNullIsCapabilityError) {
  const Dataset<double> d(std::vector<double>{0.0, 1.0, 2.0, 3.0});
  EXPECT_THROW(evalue_test(FlatMarginal{}, d, {0}, NullConstraint::equal()), CapabilityError);
}

TEST(EValueTest, NullMleDominatesRandomThetas) {
  numerics::RngStream s(31, 0);
  const PoissonGamma m;
  for (int k = 0; k < 20; ++k) {
    std::vector<PGRecord> t;
    for (int i = 0; i < 3; ++i) {
      const double w = s.uniform(0.1, 10.0);
      t.push_back({s.poisson(1.5 * w), w});
    }
    const double tilde = (*m.null_mle(t, NullConstraint::equal()))[0];
    auto loglik = [&](double th) {
      double v = 0.0;
      for (const auto& r : t)
        v += m.log_lik(r, th);
      return v;
    };
    const double best = loglik(tilde);
    for (int j = 0; j < 1000; ++j)
      EXPECT_GE(best, loglik(s.uniform(0.0, 6.0)));
  }
}

TEST(Validity, PointMassCoverageIsExact) {
  // every replication covers: x = truth = 0 exactly, any psi_hat
  const auto est = markov_validity_check(
      NormalNormal{},
      [](numerics::RngStream&) {
        return CoverageCase<NormalRecord>{normals({0.0, 0.0, 0.0, 0.0}), 0, 0.0};
      },
      200, 0.05, 1);
  EXPECT_EQ(est.proportion, 1.0);
  EXPECT_EQ(est.standard_error, 0.0);
  EXPECT_EQ(est.hits, 200u);
}

TEST(Validity, DeterministicAndSeedConsistent) {
  auto gen = [](numerics::RngStream& s) {
    std::vector<double> xs;
    double truth = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double th = s.normal(0.0, 1.0);
      xs.push_back(s.normal(th, 1.0));
      truth = th;
    }
    return CoverageCase<NormalRecord>{normals(xs), 19, truth};
  };
  const auto a = markov_validity_check(NormalNormal{}, gen, 500, 0.3, 7);
  const auto b = markov_validity_check(NormalNormal{}, gen, 500, 0.3, 7);
  const auto c = markov_validity_check(NormalNormal{}, gen, 500, 0.3, 8);
  EXPECT_EQ(a.hits, b.hits);
  const double se = std::sqrt(a.standard_error * a.standard_error +
                              c.standard_error * c.standard_error);
  EXPECT_LE(std::abs(a.proportion - c.proportion), 4.0 * std::max(se, 1e-3));
  EXPECT_GE(a.proportion, 0.7 - 2.0 * std::sqrt(0.21 / 500));
  EXPECT_THROW(markov_validity_check(NormalNormal{}, gen, 99, 0.3, 7), DomainError);
}

TEST(Validity, SizeUnderNull) {
  auto gen = [](numerics::RngStream& s) {
    std::vector<PGRecord> recs;
    const double shared = s.gamma(2.0, 2.0);
    for (int i = 0; i < 30; ++i) {
      const double w = s.uniform(0.0, 10.0);
      const double th = i >= 28 ? shared : s.gamma(2.0, 2.0);
      recs.push_back({s.poisson(th * w), w});
    }
    return TestCase<PGRecord>{Dataset<PGRecord>(recs), {28, 29}, NullConstraint::equal()};
  };
  const auto est = markov_size_check(PoissonGamma{}, gen, 500, 0.05, 3);
  EXPECT_LE(est.proportion, 0.05 + 2.0 * std::sqrt(0.05 * 0.95 / 500));
}
