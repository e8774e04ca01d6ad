#ifndef FSEB_MODELS_POISSON_GAMMA_HPP
#define FSEB_MODELS_POISSON_GAMMA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fseb/engine/model.hpp"
#include "fseb/error.hpp"
#include "fseb/numerics/minimize.hpp"
#include "fseb/numerics/special.hpp"

namespace fseb::models {

struct PGRecord {
  std::int64_t x = 0;   // count
  double w = 1.0;       // exposure
};

struct PGHyper {
  double a = 1.0;   // gamma shape
  double b = 1.0;   // gamma rate
  // The likelihood has no interior maximum (all counts zero, or no
  // overdispersion) and the estimate sits on the search cap.
  bool degenerate = false;
};

inline void check_record(const PGRecord& r) {
  if (r.x < 0)
    throw DomainError("Poisson-gamma record: count must be >= 0");
  if (!(r.w > 0.0) || !std::isfinite(r.w))
    throw DomainError("Poisson-gamma record: exposure must be positive and finite");
}

/// Negative-binomial marginal:
///   log Gamma(x + a) - log Gamma(a) - log x! + a log(b / (w + b)) + x log(w / (w + b)).
inline double pg_log_marginal(const PGRecord& r, const PGHyper& h) {
  const double x = static_cast<double>(r.x);
  const double lb = -std::log1p(r.w / h.b);
  const double lw = std::log(r.w / (r.w + h.b));
  double out = h.a * lb;
  if (r.x > 0)
    out += numerics::log_rising(h.a, x) - numerics::log_gamma(x + 1.0) + x * lw;
  return out;
}

/// Poisson log-likelihood of x at rate theta * w; theta = 0 is the limit.
inline double pg_log_lik(const PGRecord& r, double theta) {
  if (theta == 0.0)
    return r.x == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (!(theta > 0.0) || !std::isfinite(theta))
    return -std::numeric_limits<double>::infinity();
  const double x = static_cast<double>(r.x);
  const double mu = theta * r.w;
  return numerics::xlogy(x, mu) - mu - numerics::log_gamma(x + 1.0);
}

/// Posterior mean (x + a) / (w + b).
inline double pg_posterior_mean(const PGRecord& r, const PGHyper& h) {
  return (static_cast<double>(r.x) + h.a) / (r.w + h.b);
}

/// Constrained MLE of a common rate: sum x / sum w.
inline double pg_pooled_mle(std::span<const PGRecord> records) {
  if (records.empty())
    throw DomainError("pg_pooled_mle: empty record list");
  double sx = 0.0, sw = 0.0;
  for (const auto& r : records) {
    sx += static_cast<double>(r.x);
    sw += r.w;
  }
  return sx / sw;
}

struct PGFitOptions {
  double log_cap = 15.0;       // |log a|, |log b| <= log_cap
  double xtol = 1e-9;
  double ftol = 1e-9;
};

namespace detail {

// Summed log-marginal over a fixed set of records, evaluated on
// (log a, log b). Counts are grouped so log-gamma runs once per distinct x.
class PGLogLikelihood {
public:
  explicit PGLogLikelihood(std::span<const PGRecord> recs) {
    std::map<std::int64_t, double> hist;
    for (const auto& r : recs) {
      check_record(r);
      if (r.x > 0)
        hist[r.x] += 1.0;
      w_.push_back(r.w);
      x_.push_back(static_cast<double>(r.x));
      constant_ += numerics::xlogy(static_cast<double>(r.x), r.w) -
                   numerics::log_gamma(static_cast<double>(r.x) + 1.0);
      total_x_ += static_cast<double>(r.x);
    }
    for (auto [x, c] : hist)
      groups_.push_back({static_cast<double>(x), c});
  }

  [[nodiscard]] double operator()(double a, double b) const {
    double s = constant_;
    for (const auto& g : groups_)
      s += g.count * numerics::log_rising(a, g.x);
    // a log(b / (w + b)) written with log1p: for large a and b the naive
    // difference of logs cancels catastrophically
    for (std::size_t i = 0; i < w_.size(); ++i)
      s -= a * std::log1p(w_[i] / b) + x_[i] * std::log(w_[i] + b);
    return s;
  }

  [[nodiscard]] double total_count() const { return total_x_; }
  [[nodiscard]] std::size_t size() const { return w_.size(); }

private:
  struct Group {
    double x;
    double count;
  };
  std::vector<Group> groups_;
  std::vector<double> w_;
  std::vector<double> x_;
  double constant_ = 0.0;
  double total_x_ = 0.0;
};

// Moment initializer: E[x/w] = a/b and Var[x/w] = a/b^2 + (a/b) mean(1/w).
inline std::pair<double, double> pg_moment_start(std::span<const PGRecord> recs) {
  const double n = static_cast<double>(recs.size());
  double mean = 0.0, inv_w = 0.0;
  for (const auto& r : recs) {
    mean += static_cast<double>(r.x) / r.w;
    inv_w += 1.0 / r.w;
  }
  mean /= n;
  inv_w /= n;
  double var = 0.0;
  for (const auto& r : recs) {
    const double d = static_cast<double>(r.x) / r.w - mean;
    var += d * d;
  }
  var /= (n - 1.0);
  const double prior_var = var - mean * inv_w;
  if (!(mean > 0.0) || !(prior_var > 0.0))
    return {1.0, 1.0};
  const double b = mean / prior_var;
  const double a = mean * b;
  if (!std::isfinite(a) || !std::isfinite(b) || a <= 0.0 || b <= 0.0)
    return {1.0, 1.0};
  return {a, b};
}

} // namespace detail

/// Maximum marginal-likelihood estimate of (a, b) from the given records.
/// Nelder-Mead with one restart runs over (log(a / b), log a): the prior mean
/// is well determined by the data, and without overdispersion the optimum
/// runs off along log a alone, where the cap stops it.
inline PGHyper pg_mle_hyper(std::span<const PGRecord> complement, const PGFitOptions& opt = {}) {
  if (complement.size() < 2)
    throw InsufficientDataError("Poisson-gamma fit: need at least 2 records");
  // canonical order, so permuted inputs give bit-identical estimates
  std::vector<PGRecord> recs(complement.begin(), complement.end());
  std::sort(recs.begin(), recs.end(), [](const PGRecord& l, const PGRecord& r) {
    return l.x != r.x ? l.x < r.x : l.w < r.w;
  });
  const detail::PGLogLikelihood loglik(recs);
  const auto [a0, b0] = detail::pg_moment_start(recs);
  const double cap = opt.log_cap;
  auto clamp_cap = [cap](double u) { return std::clamp(u, -cap, cap); };
  // Past the cap the objective is frozen plus a quadratic wall, so a ridge
  // running off to infinity ends on the cap.
  auto objective = [&](std::span<const double> u) {
    double wall = 0.0;
    for (double v : u) {
      const double excess = std::abs(v) - cap;
      if (excess > 0.0)
        wall += excess * excess;
    }
    const double log_mean = clamp_cap(u[0]);
    const double log_a = clamp_cap(u[1]);
    return wall - loglik(std::exp(log_a), std::exp(log_a - log_mean));
  };
  numerics::NelderMeadOptions nm;
  nm.xtol = opt.xtol;
  nm.ftol = opt.ftol;
  nm.initial_step = 0.5;
  nm.restarts = 1;
  const auto res = numerics::nelder_mead(
      objective, {clamp_cap(std::log(a0 / b0)), clamp_cap(std::log(a0))}, nm);
  if (!res.converged)
    throw FitError("Poisson-gamma fit did not converge after " +
                   std::to_string(res.evaluations) + " evaluations; last point (log mean, log a) = (" +
                   std::to_string(res.argmin[0]) + ", " + std::to_string(res.argmin[1]) +
                   "), objective " + std::to_string(res.min));
  const double log_mean = clamp_cap(res.argmin[0]);
  const double log_a = clamp_cap(res.argmin[1]);
  PGHyper h;
  h.a = std::exp(log_a);
  h.b = std::exp(log_a - log_mean);
  h.degenerate = loglik.total_count() == 0.0 || std::abs(log_a) >= cap - 1e-6 ||
                 std::abs(log_mean) >= cap - 1e-6;
  return h;
}

/// X | theta ~ Poisson(theta w), theta ~ Gamma(a, b) (shape, rate).
struct PoissonGamma {
  using Record = PGRecord;
  using Hyper = PGHyper;
  using Parameter = double;

  PGFitOptions fit_options{};

  [[nodiscard]] double log_marginal(const Record& r, const Hyper& h) const {
    return pg_log_marginal(r, h);
  }
  [[nodiscard]] double log_lik(const Record& r, double theta) const {
    return pg_log_lik(r, theta);
  }
  [[nodiscard]] Hyper fit_hyper(std::span<const Record> complement) const {
    return pg_mle_hyper(complement, fit_options);
  }
  [[nodiscard]] std::optional<std::vector<double>> null_mle(std::span<const Record> targets,
                                                            const NullConstraint& c) const {
    if (targets.empty())
      return std::nullopt;
    if (c.kind == NullConstraint::Kind::PointValue) {
      if (!(c.value >= 0.0))
        return std::nullopt;
      return std::vector<double>(targets.size(), c.value);
    }
    return std::vector<double>(targets.size(), pg_pooled_mle(targets));
  }
  [[nodiscard]] double lik_argmax(const Record& r) const {
    return static_cast<double>(r.x) / r.w;
  }
  [[nodiscard]] ParameterDomain domain() const {
    return {0.0, std::numeric_limits<double>::infinity()};
  }
  [[nodiscard]] double search_scale(const Record& r) const {
    return (static_cast<double>(r.x) + 1.0) / r.w;
  }
  [[nodiscard]] double posterior_mean(const Record& r, const Hyper& h) const {
    return pg_posterior_mean(r, h);
  }
};

} // namespace fseb::models

#endif
