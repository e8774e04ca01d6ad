#ifndef FSEB_ENGINE_CONFIDENCE_SET_HPP
#define FSEB_ENGINE_CONFIDENCE_SET_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "fseb/engine/dataset.hpp"
#include "fseb/engine/model.hpp"
#include "fseb/error.hpp"
#include "fseb/numerics/root.hpp"

namespace fseb {

struct IntervalResult {
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  double alpha = 0.05;
  bool empty = false;
  std::size_t target_index = 0;

  [[nodiscard]] bool contains(double theta) const {
    return !empty && theta >= lower && theta <= upper;
  }
  [[nodiscard]] double width() const { return empty ? 0.0 : upper - lower; }

  static IntervalResult none(std::size_t index, double alpha) {
    IntervalResult r;
    r.alpha = alpha;
    r.empty = true;
    r.target_index = index;
    return r;
  }
};

inline void check_level(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("alpha must lie in (0, 1]");
}

namespace detail {

// One end of {t : g(t) <= 0}, walking from `center` (where g <= 0) toward
// `bound` until g turns positive, then Brent on the straddling bracket.
template <class G>
double sublevel_edge(G& g, double center, double bound, double scale) {
  const double dir = bound > center ? 1.0 : -1.0;
  if (center == bound)
    return bound;
  if (std::isfinite(bound) && g(bound) <= 0.0)
    return bound;

  double inside = center;
  double step = scale;
  double probe = center;
  bool found = false;
  for (int k = 0; k < 4000; ++k) {
    double next = center + dir * step;
    if (std::isfinite(bound)) {
      // never jump more than half of what is left before the boundary
      const double half_gap = 0.5 * std::abs(bound - probe);
      if (dir * (next - probe) > half_gap)
        next = probe + dir * half_gap;
    }
    if (next == probe || next == bound)
      break;
    probe = next;
    const double gp = g(probe);
    if (gp > 0.0) {
      found = true;
      break;
    }
    inside = probe;
    step *= 2.0;
  }
  if (!found)
    return std::isfinite(bound) ? bound : dir * std::numeric_limits<double>::infinity();

  numerics::RootOptions opt;
  opt.xtol = 1e-13 * std::max(1.0, std::abs(probe));
  opt.ftol = 0.0;
  return numerics::brent_root(g, inside, probe, opt);
}

} // namespace detail

/// The set {theta : log R(theta) <= log(1/alpha)} for one unit, given the
/// hyperparameter fitted on its complement.
template <ScalarModel M>
IntervalResult confidence_set_given_hyper(const M& model, const typename M::Record& rec,
                                          const typename M::Hyper& hyper, double alpha,
                                          std::size_t index = 0) {
  check_level(alpha);
  const double threshold = -std::log(alpha);
  const double log_marg = model.log_marginal(rec, hyper);
  auto g = [&](double t) { return log_marg - model.log_lik(rec, t) - threshold; };

  const ParameterDomain dom = model.domain();
  const double center = std::clamp(static_cast<double>(model.lik_argmax(rec)), dom.lo, dom.hi);
  if (g(center) > 0.0)
    return IntervalResult::none(index, alpha);

  const double scale = model.search_scale(rec);
  IntervalResult out;
  out.alpha = alpha;
  out.target_index = index;
  out.lower = detail::sublevel_edge(g, center, dom.lo, scale);
  out.upper = detail::sublevel_edge(g, center, dom.hi, scale);
  return out;
}

/// Confidence set for unit i at level alpha.
template <ScalarModel M>
IntervalResult confidence_set(const M& model, const Dataset<typename M::Record>& data,
                              std::size_t i, double alpha) {
  check_level(alpha);
  const auto split = HoldoutSplit::single(data.size(), i);
  const auto complement = data.complement(split);
  const auto hyper = model.fit_hyper(std::span<const typename M::Record>(complement));
  return confidence_set_given_hyper(model, data[i], hyper, alpha, i);
}

/// Per-unit interval maker that fits each leave-one-out hyperparameter once
/// and reuses it across levels. Not thread-safe (lazy cache).
template <ScalarModel M>
class IntervalMaker {
public:
  IntervalMaker(const M& model, const Dataset<typename M::Record>& data)
      : model_(model), data_(data), hypers_(data.size()) {
    if (data.size() < 3)
      throw InsufficientDataError("confidence sets need n >= 3");
  }

  IntervalResult operator()(std::size_t i, double alpha) const {
    return confidence_set_given_hyper(model_, data_[i], hyper(i), alpha, i);
  }

  const typename M::Hyper& hyper(std::size_t i) const {
    if (!hypers_.at(i)) {
      const auto split = HoldoutSplit::single(data_.size(), i);
      const auto complement = data_.complement(split);
      hypers_[i] = model_.fit_hyper(std::span<const typename M::Record>(complement));
    }
    return *hypers_[i];
  }

  [[nodiscard]] std::size_t size() const { return data_.size(); }

private:
  const M& model_;
  const Dataset<typename M::Record>& data_;
  mutable std::vector<std::optional<typename M::Hyper>> hypers_;
};

} // namespace fseb

#endif
