#ifndef FSEB_ADJUST_COMPARATORS_HPP
#define FSEB_ADJUST_COMPARATORS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "fseb/error.hpp"
#include "fseb/numerics/special.hpp"

namespace fseb::adjust {

namespace detail {

inline void check_counts(std::int64_t x1, std::int64_t m1, std::int64_t x2, std::int64_t m2) {
  if (m1 < 0 || m2 < 0 || x1 < 0 || x2 < 0 || x1 > m1 || x2 > m2)
    throw DomainError("two-group counts must satisfy 0 <= x <= m");
}

} // namespace detail

/// Two-sided Fisher exact test for the 2x2 table [[x1, m1 - x1], [x2, m2 - x2]]:
/// sum of hypergeometric probabilities of all tables with the same margins
/// that are no more likely than the observed one.
inline double fisher_exact_2x2(std::int64_t x1, std::int64_t m1, std::int64_t x2,
                               std::int64_t m2) {
  detail::check_counts(x1, m1, x2, m2);
  const std::int64_t k = x1 + x2;
  const std::int64_t N = m1 + m2;
  if (N == 0)
    return 1.0;
  const std::int64_t lo = std::max<std::int64_t>(0, k - m2);
  const std::int64_t hi = std::min(k, m1);
  const double log_denom = numerics::log_binom(static_cast<double>(N), static_cast<double>(k));
  auto log_prob = [&](std::int64_t a) {
    return numerics::log_binom(static_cast<double>(m1), static_cast<double>(a)) +
           numerics::log_binom(static_cast<double>(m2), static_cast<double>(k - a)) - log_denom;
  };
  const double log_obs = log_prob(x1);
  // relative slack so ties computed along different paths count as ties
  const double cutoff = log_obs + std::log1p(1e-7);
  double p = 0.0;
  for (std::int64_t a = lo; a <= hi; ++a) {
    const double lp = log_prob(a);
    if (lp <= cutoff)
      p += std::exp(lp);
  }
  return std::min(1.0, p);
}

/// Two-proportion score test with pooled variance, two-sided normal p-value.
/// Returns 1 when the pooled proportion is 0 or 1.
inline double score_test_2prop(std::int64_t x1, std::int64_t m1, std::int64_t x2,
                               std::int64_t m2) {
  detail::check_counts(x1, m1, x2, m2);
  if (m1 < 1 || m2 < 1)
    throw DomainError("score test: trials must be >= 1");
  const double n1 = static_cast<double>(m1);
  const double n2 = static_cast<double>(m2);
  const double pooled = static_cast<double>(x1 + x2) / (n1 + n2);
  if (pooled <= 0.0 || pooled >= 1.0)
    return 1.0;
  const double z = (static_cast<double>(x1) / n1 - static_cast<double>(x2) / n2) /
                   std::sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2));
  return numerics::normal_two_sided_p(z);
}

} // namespace fseb::adjust

#endif
