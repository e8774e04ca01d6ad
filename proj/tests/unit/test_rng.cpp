#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "fseb/fseb.hpp"   // umbrella header must stay self-contained
#include "fseb/numerics/rng.hpp"
#include "fseb/numerics/special.hpp"

using namespace fseb;
using namespace fseb::numerics;

// Known-answer vectors for Philox4x32-10 published with Random123.
TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32(A4{0, 0, 0, 0}, {0, 0}),
            (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                       {0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                       {0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngStream, SameSeedAndIndexSameDraws) {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i)
    ASSERT_EQ(a.normal(), b.normal());
}

TEST(RngStream, DistinctIndicesDiffer) {
  RngStream a(42, 7), b(42, 8), c(43, 7);
  int same_b = 0, same_c = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u32();
    same_b += x == b.next_u32();
    same_c += x == c.next_u32();
  }
  EXPECT_LT(same_b, 3);
  EXPECT_LT(same_c, 3);
}

TEST(RngStream, StreamIndexHashIsStable) {
  EXPECT_EQ(stable_hash(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(stable_hash("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(stream_index_for("table1", 3), stream_index_for("table1", 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 10000; ++r)
    seen.insert(stream_index_for("scenario", r));
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(RngStream, UniformOpenInterval) {
  RngStream s(1, 1);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(RngStream, UniformIntCoversRange) {
  RngStream s(5, 0);
  std::vector<int> counts(26, 0);
  for (int i = 0; i < 26000; ++i) {
    const auto k = s.uniform_int(15, 40);
    ASSERT_GE(k, 15);
    ASSERT_LE(k, 40);
    ++counts[static_cast<std::size_t>(k - 15)];
  }
  for (int c : counts)
    EXPECT_GT(c, 800);
}

TEST(RngStream, GammaMean) {
  RngStream s(2024, 11);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    sum += s.gamma(2.0, 2.0);
  EXPECT_NEAR(sum / n, 1.0, 0.005);
}

TEST(RngStream, GammaSmallShape) {
  RngStream s(3, 3);
  const int n = 400000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = s.gamma(0.4, 2.0);
    sum += g;
    sq += g * g;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.2, 5.0 * std::sqrt(0.1 / n));
  EXPECT_NEAR(sq / n - mean * mean, 0.1, 0.005);
}

TEST(RngStream, NormalMoments) {
  RngStream s(9, 9);
  const int n = 400000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal(3.0, 4.0);
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 3.0, 5.0 * 2.0 / std::sqrt(n));
  EXPECT_NEAR(sq / n - mean * mean, 4.0, 0.05);
}

TEST(RngStream, PoissonChiSquare) {
  RngStream s(77, 1);
  const int n = 100000;
  std::vector<double> obs(11, 0.0);
  for (int i = 0; i < n; ++i)
    ++obs[static_cast<std::size_t>(std::min<std::int64_t>(s.poisson(3.0), 10))];
  double chi2 = 0.0, tail = 1.0;
  for (int k = 0; k <= 10; ++k) {
    double p;
    if (k < 10) {
      p = std::exp(k * std::log(3.0) - 3.0 - log_gamma(k + 1.0));
      tail -= p;
    } else {
      p = tail;
    }
    const double e = n * p;
    chi2 += (obs[static_cast<std::size_t>(k)] - e) * (obs[static_cast<std::size_t>(k)] - e) / e;
  }
  EXPECT_LT(chi2, 29.588);  // chi-square(10) 0.999 quantile
}

TEST(RngStream, PoissonLargeMeanMoments) {
  RngStream s(8, 2);
  for (double lam : {10.0, 57.3, 2500.0}) {
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(s.poisson(lam));
      sum += k;
      sq += k * k;
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, lam, 5.0 * std::sqrt(lam / n)) << lam;
    EXPECT_NEAR((sq / n - mean * mean) / lam, 1.0, 0.03) << lam;
  }
}

TEST(RngStream, BinomialDegenerate) {
  RngStream s(1, 2);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(s.binomial(20, 0.0), 0);
    EXPECT_EQ(s.binomial(20, 1.0), 20);
  }
}

TEST(RngStream, BinomialMoments) {
  RngStream s(4, 4);
  for (auto [m, p] : std::vector<std::pair<std::int64_t, double>>{
           {20, 0.3}, {40, 0.9}, {500, 0.4}, {100000, 0.01}}) {
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto k = s.binomial(m, p);
      ASSERT_GE(k, 0);
      ASSERT_LE(k, m);
      sum += static_cast<double>(k);
      sq += static_cast<double>(k) * static_cast<double>(k);
    }
    const double mean = sum / n;
    const double var = static_cast<double>(m) * p * (1.0 - p);
    EXPECT_NEAR(mean, static_cast<double>(m) * p, 5.0 * std::sqrt(var / n)) << m << " " << p;
    EXPECT_NEAR((sq / n - mean * mean) / var, 1.0, 0.03) << m << " " << p;
  }
}

TEST(RngStream, BetaMean) {
  RngStream s(6, 6);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    sum += s.beta(2.0, 6.0);
  // var = ab / ((a+b)^2 (a+b+1)) = 12 / 576
  EXPECT_NEAR(sum / n, 0.25, 5.0 * std::sqrt(12.0 / 576.0 / n));
}

TEST(RngStream, InvalidParametersThrow) {
  RngStream s(0, 0);
  EXPECT_THROW(s.normal(0.0, 0.0), DomainError);
  EXPECT_THROW(s.gamma(-1.0, 1.0), DomainError);
  EXPECT_THROW(s.poisson(-0.1), DomainError);
  EXPECT_THROW(s.beta(1.0, 0.0), DomainError);
  EXPECT_THROW(s.binomial(10, 1.5), DomainError);
  EXPECT_THROW(s.uniform_int(3, 2), DomainError);
}
