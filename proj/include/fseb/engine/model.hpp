#ifndef FSEB_ENGINE_MODEL_HPP
#define FSEB_ENGINE_MODEL_HPP

#include <concepts>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fseb {

/// Closed parameter range [lo, hi]; either end may be infinite. Models must
/// evaluate log_lik at a finite end as the one-sided limit.
struct ParameterDomain {
  double lo;
  double hi;
  [[nodiscard]] bool contains(double t) const { return t >= lo && t <= hi; }
};

/// Equality-type null hypotheses a model may support for its constrained MLE.
struct NullConstraint {
  enum class Kind { EqualAcrossTargets, PointValue };
  Kind kind = Kind::EqualAcrossTargets;
  double value = 0.0;

  static NullConstraint equal() { return {Kind::EqualAcrossTargets, 0.0}; }
  static NullConstraint point(double v) { return {Kind::PointValue, v}; }

  [[nodiscard]] std::string describe() const {
    if (kind == Kind::EqualAcrossTargets)
      return "all target parameters equal";
    char buf[64];
    std::snprintf(buf, sizeof buf, "parameters equal %.17g", value);
    return buf;
  }
};

/// A hierarchical model plugged into the engine.
///
///  - log_marginal(x, psi): log of the integrated likelihood of one unit.
///  - log_lik(x, theta):    log of the unintegrated likelihood of one unit.
///  - fit_hyper(records):   hyperparameter estimate from the records given,
///                          which the engine only ever fills with complement
///                          units.
///  - null_mle(targets, c): maximizer of the joint unintegrated likelihood of
///                          the targets under `c`, or nullopt if unsupported.
template <class M>
concept Model = requires(const M& m, const typename M::Record& r,
                         const typename M::Hyper& h,
                         const typename M::Parameter& th,
                         std::span<const typename M::Record> recs,
                         const NullConstraint& nc) {
  { m.log_marginal(r, h) } -> std::convertible_to<double>;
  { m.log_lik(r, th) } -> std::convertible_to<double>;
  { m.fit_hyper(recs) } -> std::same_as<typename M::Hyper>;
  { m.null_mle(recs, nc) } -> std::same_as<std::optional<std::vector<typename M::Parameter>>>;
};

/// Models with a scalar per-unit parameter whose log-likelihood is concave in
/// it, so every sublevel set of the ratio is an interval around lik_argmax.
template <class M>
concept ScalarModel = Model<M> && std::same_as<typename M::Parameter, double> &&
    requires(const M& m, const typename M::Record& r) {
  { m.lik_argmax(r) } -> std::convertible_to<double>;
  { m.domain() } -> std::same_as<ParameterDomain>;
  { m.search_scale(r) } -> std::convertible_to<double>;
};

} // namespace fseb

#endif
