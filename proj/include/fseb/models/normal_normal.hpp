#ifndef FSEB_MODELS_NORMAL_NORMAL_HPP
#define FSEB_MODELS_NORMAL_NORMAL_HPP

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "fseb/engine/confidence_set.hpp"
#include "fseb/engine/dataset.hpp"
#include "fseb/engine/model.hpp"
#include "fseb/error.hpp"
#include "fseb/numerics/special.hpp"

namespace fseb::models {

struct NormalRecord {
  double x = 0.0;
};

struct NormalHyper {
  double psi_sq = 0.0;   // prior variance
};

/// Sample variance with divisor (size - 1).
inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2)
    throw InsufficientDataError("sample variance needs at least 2 values");
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double v : xs)
    ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

/// Moment estimator max(0, s^2 - 1) from the complement.
inline NormalHyper nn_fit_holdout(std::span<const NormalRecord> complement) {
  if (complement.size() < 2)
    throw InsufficientDataError("normal model: complement needs at least 2 records");
  std::vector<double> xs;
  xs.reserve(complement.size());
  for (const auto& r : complement)
    xs.push_back(r.x);
  return {std::max(0.0, sample_variance(xs) - 1.0)};
}

namespace detail {

inline IntervalResult nn_symmetric_ci(double x, double half_sq, double alpha, std::size_t index) {
  const double half = std::sqrt(half_sq);
  IntervalResult r;
  r.lower = x - half;
  r.upper = x + half;
  r.alpha = alpha;
  r.target_index = index;
  return r;
}

inline void check_nn_args(double psi_hat_sq, double alpha) {
  check_level(alpha);
  if (!(psi_hat_sq >= 0.0))
    throw DomainError("normal interval: psi_hat_sq must be >= 0");
}

} // namespace detail

/// Closed-form FSEB interval in its published form:
///   x +/- sqrt(2 log(1/alpha) + 2 log(1 + psi^2) + x^2 / (1 + psi^2)).
/// The log(1 + psi^2) term carries a factor 2 that the ratio inequality does
/// not produce, so this is a conservative superset of nn_exact_ci. It is the
/// form the published simulation tables were computed with.
inline IntervalResult nn_fseb_ci(double x, double psi_hat_sq, double alpha,
                                 std::size_t index = 0) {
  detail::check_nn_args(psi_hat_sq, alpha);
  const double v = 1.0 + psi_hat_sq;
  return detail::nn_symmetric_ci(x, -2.0 * std::log(alpha) + 2.0 * std::log(v) + x * x / v,
                                 alpha, index);
}

/// The sublevel set {theta : R(theta) <= 1/alpha} solved exactly:
///   x +/- sqrt(2 log(1/alpha) + log(1 + psi^2) + x^2 / (1 + psi^2)).
inline IntervalResult nn_exact_ci(double x, double psi_hat_sq, double alpha,
                                  std::size_t index = 0) {
  detail::check_nn_args(psi_hat_sq, alpha);
  const double v = 1.0 + psi_hat_sq;
  return detail::nn_symmetric_ci(x, -2.0 * std::log(alpha) + std::log(v) + x * x / v, alpha,
                                 index);
}

/// Morris-Efron interval from its ingredients: shrinkage g, observation x and
/// sample size n. The variance term is g + 2 x (1 - g)^2 / (n - 2), linear in x.
inline IntervalResult morris_efron_interval(double x, double g, std::size_t n, double alpha,
                                            std::size_t index = 0) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("morris_efron_interval: alpha must lie in (0, 1)");
  if (n < 3)
    throw InsufficientDataError("morris_efron_interval: need n >= 3");
  const double variance = g + 2.0 * x * (1.0 - g) * (1.0 - g) / static_cast<double>(n - 2);
  if (!(variance >= 0.0))
    throw UncomputableError("Morris-Efron variance estimate is negative");
  const double z = numerics::normal_quantile(1.0 - alpha / 2.0);
  const double half = z * std::sqrt(variance);
  IntervalResult r;
  r.lower = g * x - half;
  r.upper = g * x + half;
  r.alpha = alpha;
  r.target_index = index;
  return r;
}

/// Shrinkage factor 1 - (n - 2) / sum x^2 over the whole dataset.
inline double morris_efron_shrinkage(std::span<const NormalRecord> data) {
  double ss = 0.0;
  for (const auto& r : data)
    ss += r.x * r.x;
  if (!(ss > 0.0))
    throw UncomputableError("Morris-Efron shrinkage undefined when all x are 0");
  return 1.0 - static_cast<double>(data.size() - 2) / ss;
}

/// Comparator interval for unit `index` (the last unit by default).
inline IntervalResult nn_morris_efron_ci(const Dataset<NormalRecord>& data, double alpha,
                                         std::optional<std::size_t> index = std::nullopt) {
  if (data.size() < 3)
    throw InsufficientDataError("nn_morris_efron_ci: need n >= 3");
  const std::size_t i = index.value_or(data.size() - 1);
  const double g = morris_efron_shrinkage(data.records());
  return morris_efron_interval(data[i].x, g, data.size(), alpha, i);
}

/// X | theta ~ N(theta, 1), theta ~ N(0, psi^2).
struct NormalNormal {
  using Record = NormalRecord;
  using Hyper = NormalHyper;
  using Parameter = double;

  [[nodiscard]] double log_marginal(const Record& r, const Hyper& h) const {
    return numerics::log_normal_pdf(r.x, 0.0, 1.0 + h.psi_sq);
  }
  [[nodiscard]] double log_lik(const Record& r, double theta) const {
    if (!std::isfinite(theta))
      return -std::numeric_limits<double>::infinity();
    return numerics::log_normal_pdf(r.x, theta, 1.0);
  }
  [[nodiscard]] Hyper fit_hyper(std::span<const Record> complement) const {
    return nn_fit_holdout(complement);
  }
  [[nodiscard]] std::optional<std::vector<double>> null_mle(std::span<const Record> targets,
                                                            const NullConstraint& c) const {
    if (targets.empty())
      return std::nullopt;
    double value = c.value;
    if (c.kind == NullConstraint::Kind::EqualAcrossTargets) {
      value = 0.0;
      for (const auto& r : targets)
        value += r.x;
      value /= static_cast<double>(targets.size());
    }
    return std::vector<double>(targets.size(), value);
  }
  [[nodiscard]] double lik_argmax(const Record& r) const { return r.x; }
  [[nodiscard]] ParameterDomain domain() const {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
  [[nodiscard]] double search_scale(const Record&) const { return 1.0; }

  /// Posterior mean psi^2 / (1 + psi^2) * x.
  [[nodiscard]] double posterior_mean(const Record& r, const Hyper& h) const {
    return h.psi_sq / (1.0 + h.psi_sq) * r.x;
  }
};

} // namespace fseb::models

#endif
