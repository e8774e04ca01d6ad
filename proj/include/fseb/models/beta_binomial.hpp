#ifndef FSEB_MODELS_BETA_BINOMIAL_HPP
#define FSEB_MODELS_BETA_BINOMIAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "fseb/engine/evalue_test.hpp"
#include "fseb/engine/model.hpp"
#include "fseb/error.hpp"
#include "fseb/numerics/special.hpp"

namespace fseb::models {

struct BBRecord {
  std::int64_t x = 0;   // successes
  std::int64_t m = 1;   // trials
};

/// One site observed in two series.
struct BBPairRecord {
  std::int64_t x1 = 0;
  std::int64_t m1 = 1;
  std::int64_t x2 = 0;
  std::int64_t m2 = 1;

  [[nodiscard]] BBRecord first() const { return {x1, m1}; }
  [[nodiscard]] BBRecord second() const { return {x2, m2}; }
};

struct BBHyper {
  double gamma = 1.0;
  double beta = 1.0;
  // The moment estimate of phi fell outside (0, 1) and was pulled back in.
  bool clamped = false;
};

inline void check_record(const BBRecord& r) {
  if (r.m < 1)
    throw DomainError("binomial record: trials must be >= 1");
  if (r.x < 0 || r.x > r.m)
    throw DomainError("binomial record: successes must lie in [0, trials]");
}

inline void check_record(const BBPairRecord& r) {
  check_record(r.first());
  check_record(r.second());
}

/// Running sums of proportions and trials; units can be added and removed,
/// which makes leave-one-out fits O(1) after one pass.
struct BBMoments {
  double count = 0.0;
  double sum_p = 0.0;
  double sum_p_sq = 0.0;
  double sum_m = 0.0;

  void add(const BBRecord& r, double sign = 1.0) {
    const double p = static_cast<double>(r.x) / static_cast<double>(r.m);
    count += sign;
    sum_p += sign * p;
    sum_p_sq += sign * p * p;
    sum_m += sign * static_cast<double>(r.m);
  }
  void remove(const BBRecord& r) { add(r, -1.0); }

  void add(const BBPairRecord& r, double sign = 1.0) {
    add(r.first(), sign);
    add(r.second(), sign);
  }
  void remove(const BBPairRecord& r) { add(r, -1.0); }
};

inline constexpr double bb_phi_margin = 1e-6;

/// mu = mean proportion, V = mean squared deviation (divisor = number of
/// terms), m_bar = mean trials, phi = [m_bar V / (mu (1 - mu)) - 1] / (m_bar - 1),
/// gamma = (1/phi - 1) mu, beta = (1/phi - 1)(1 - mu).
inline BBHyper bb_hyper_from_moments(const BBMoments& s) {
  if (s.count < 2.0 - 1e-9)
    throw InsufficientDataError("beta-binomial fit: need at least 2 proportions");
  const double mu = s.sum_p / s.count;
  if (!(mu > 1e-14 && mu < 1.0 - 1e-14))
    throw DegenerateDataError("beta-binomial fit: mean proportion is 0 or 1");
  const double m_bar = s.sum_m / s.count;
  if (!(m_bar > 1.0))
    throw DegenerateDataError("beta-binomial fit: mean number of trials must exceed 1");
  const double var = std::max(0.0, s.sum_p_sq / s.count - mu * mu);
  double phi = (m_bar * var / (mu * (1.0 - mu)) - 1.0) / (m_bar - 1.0);
  BBHyper h;
  if (!(phi >= bb_phi_margin && phi <= 1.0 - bb_phi_margin)) {
    phi = std::clamp(std::isnan(phi) ? bb_phi_margin : phi, bb_phi_margin, 1.0 - bb_phi_margin);
    h.clamped = true;
  }
  const double k = 1.0 / phi - 1.0;
  h.gamma = k * mu;
  h.beta = k * (1.0 - mu);
  return h;
}

/// Moment estimate from single-series records.
inline BBHyper bb_mom_hyper(std::span<const BBRecord> complement) {
  if (complement.size() < 2)
    throw InsufficientDataError("beta-binomial fit: complement needs at least 2 records");
  BBMoments s;
  for (const auto& r : complement) {
    check_record(r);
    s.add(r);
  }
  return bb_hyper_from_moments(s);
}

/// Moment estimate pooling both series of every paired record.
inline BBHyper bb_mom_hyper_pooled(std::span<const BBPairRecord> complement) {
  if (complement.size() < 2)
    throw InsufficientDataError("beta-binomial fit: complement needs at least 2 records");
  BBMoments s;
  for (const auto& r : complement) {
    check_record(r);
    s.add(r);
  }
  return bb_hyper_from_moments(s);
}

/// log B(x + gamma, m - x + beta) - log B(gamma, beta): the marginal without
/// its binomial coefficient.
inline double bb_log_beta_ratio(const BBRecord& r, const BBHyper& h) {
  const double x = static_cast<double>(r.x);
  const double m = static_cast<double>(r.m);
  return numerics::log_rising(h.gamma, x) + numerics::log_rising(h.beta, m - x) -
         numerics::log_rising(h.gamma + h.beta, m);
}

inline double bb_log_marginal(const BBRecord& r, const BBHyper& h) {
  return numerics::log_binom(static_cast<double>(r.m), static_cast<double>(r.x)) +
         bb_log_beta_ratio(r, h);
}

/// Binomial log-likelihood; the ends of [0, 1] are one-sided limits.
inline double bb_log_lik(const BBRecord& r, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0))
    return -std::numeric_limits<double>::infinity();
  const double x = static_cast<double>(r.x);
  const double m = static_cast<double>(r.m);
  if ((theta == 0.0 && r.x > 0) || (theta == 1.0 && r.x < r.m))
    return -std::numeric_limits<double>::infinity();
  return numerics::log_binom(m, x) + numerics::xlogy(x, theta) +
         numerics::xlogy(m - x, 1.0 - theta);
}

/// log R = log B(x + gamma, m - x + beta) - log B(gamma, beta) - x log theta
/// - (m - x) log(1 - theta). Returns +inf where the likelihood vanishes.
inline double bb_log_ratio(const BBRecord& r, const BBHyper& h, double theta) {
  check_record(r);
  if (!(theta >= 0.0 && theta <= 1.0))
    throw DomainError("bb_log_ratio: theta must lie in [0, 1]");
  const double x = static_cast<double>(r.x);
  const double m = static_cast<double>(r.m);
  if ((theta == 0.0 && r.x > 0) || (theta == 1.0 && r.x < r.m))
    return std::numeric_limits<double>::infinity();
  return bb_log_beta_ratio(r, h) - numerics::xlogy(x, theta) -
         numerics::xlogy(m - x, 1.0 - theta);
}

inline double bb_posterior_mean(const BBRecord& r, const BBHyper& h) {
  return (static_cast<double>(r.x) + h.gamma) / (static_cast<double>(r.m) + h.gamma + h.beta);
}

/// Pooled proportion sum x / sum m across records.
inline double bb_pooled_proportion(std::span<const BBRecord> records) {
  if (records.empty())
    throw DomainError("bb_pooled_proportion: empty record list");
  double sx = 0.0, sm = 0.0;
  for (const auto& r : records) {
    sx += static_cast<double>(r.x);
    sm += static_cast<double>(r.m);
  }
  return sx / sm;
}

/// Two-series test of theta_1 = theta_2 for one site, with the pooled
/// theta_tilde = (x1 + x2) / (m1 + m2). Symmetric in the two groups.
inline double bb_two_group_log_T(const BBPairRecord& r, const BBHyper& h) {
  check_record(r);
  const double xs = static_cast<double>(r.x1 + r.x2);
  const double ms = static_cast<double>(r.m1 + r.m2);
  const double theta = xs / ms;
  const double lb = bb_log_beta_ratio(r.first(), h) + bb_log_beta_ratio(r.second(), h);
  return lb - numerics::xlogy(xs, theta) - numerics::xlogy(ms - xs, 1.0 - theta);
}

inline EValueReport bb_two_group_test(const BBPairRecord& r, const BBHyper& h,
                                      std::size_t index = 0) {
  return EValueReport::from_log(bb_two_group_log_T(r, h), {index},
                                NullConstraint::equal().describe());
}

/// Single series: X | theta ~ Bin(m, theta), theta ~ Beta(gamma, beta).
struct BetaBinomial {
  using Record = BBRecord;
  using Hyper = BBHyper;
  using Parameter = double;

  [[nodiscard]] double log_marginal(const Record& r, const Hyper& h) const {
    return bb_log_marginal(r, h);
  }
  [[nodiscard]] double log_lik(const Record& r, double theta) const {
    return bb_log_lik(r, theta);
  }
  [[nodiscard]] Hyper fit_hyper(std::span<const Record> complement) const {
    return bb_mom_hyper(complement);
  }
  [[nodiscard]] std::optional<std::vector<double>> null_mle(std::span<const Record> targets,
                                                            const NullConstraint& c) const {
    if (targets.empty())
      return std::nullopt;
    if (c.kind == NullConstraint::Kind::PointValue) {
      if (!(c.value >= 0.0 && c.value <= 1.0))
        return std::nullopt;
      return std::vector<double>(targets.size(), c.value);
    }
    return std::vector<double>(targets.size(), bb_pooled_proportion(targets));
  }
  [[nodiscard]] double lik_argmax(const Record& r) const {
    return static_cast<double>(r.x) / static_cast<double>(r.m);
  }
  [[nodiscard]] ParameterDomain domain() const { return {0.0, 1.0}; }
  [[nodiscard]] double search_scale(const Record&) const { return 0.05; }
  [[nodiscard]] double posterior_mean(const Record& r, const Hyper& h) const {
    return bb_posterior_mean(r, h);
  }
};

/// Two series per site sharing one Beta(gamma, beta) prior, fitted on both
/// series of the complement. Parameter is (theta_1, theta_2).
struct BetaBinomialPaired {
  using Record = BBPairRecord;
  using Hyper = BBHyper;
  using Parameter = std::array<double, 2>;

  [[nodiscard]] double log_marginal(const Record& r, const Hyper& h) const {
    return bb_log_marginal(r.first(), h) + bb_log_marginal(r.second(), h);
  }
  [[nodiscard]] double log_lik(const Record& r, const Parameter& th) const {
    return bb_log_lik(r.first(), th[0]) + bb_log_lik(r.second(), th[1]);
  }
  [[nodiscard]] Hyper fit_hyper(std::span<const Record> complement) const {
    return bb_mom_hyper_pooled(complement);
  }
  [[nodiscard]] std::optional<std::vector<Parameter>> null_mle(std::span<const Record> targets,
                                                               const NullConstraint& c) const {
    if (targets.empty())
      return std::nullopt;
    double value = c.value;
    if (c.kind == NullConstraint::Kind::EqualAcrossTargets) {
      double sx = 0.0, sm = 0.0;
      for (const auto& r : targets) {
        sx += static_cast<double>(r.x1 + r.x2);
        sm += static_cast<double>(r.m1 + r.m2);
      }
      value = sx / sm;
    } else if (!(value >= 0.0 && value <= 1.0)) {
      return std::nullopt;
    }
    return std::vector<Parameter>(targets.size(), Parameter{value, value});
  }
};

} // namespace fseb::models

#endif
