#ifndef FSEB_ENGINE_RATIO_HPP
#define FSEB_ENGINE_RATIO_HPP

#include <cmath>
#include <span>
#include <string>

#include "fseb/engine/dataset.hpp"
#include "fseb/engine/model.hpp"
#include "fseb/error.hpp"

namespace fseb {

/// log R for the target records at `theta`, given an already fitted
/// hyperparameter. Everything stays in the log domain.
template <Model M>
double log_ratio_given_hyper(const M& model, std::span<const typename M::Record> targets,
                             const typename M::Hyper& hyper,
                             std::span<const typename M::Parameter> theta) {
  if (targets.size() != theta.size())
    throw DomainError("log_ratio: " + std::to_string(theta.size()) +
                      " parameters for " + std::to_string(targets.size()) + " targets");
  double log_l_integrated = 0.0;
  double log_l_plain = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    if constexpr (ScalarModel<M>) {
      if (!model.domain().contains(theta[k]))
        throw DomainError("log_ratio: parameter outside the model domain");
    }
    log_l_integrated += model.log_marginal(targets[k], hyper);
    log_l_plain += model.log_lik(targets[k], theta[k]);
  }
  return log_l_integrated - log_l_plain;
}

/// log R_{I,n}(theta): hyperparameters are fitted on the complement of the
/// split only, then the integrated likelihood of the targets is compared with
/// their plain likelihood at theta.
template <Model M>
double log_ratio_statistic(const M& model, const Dataset<typename M::Record>& data,
                           const HoldoutSplit& split,
                           std::span<const typename M::Parameter> theta) {
  const auto complement = data.complement(split);
  const auto hyper = model.fit_hyper(std::span<const typename M::Record>(complement));
  const auto targets = data.targets(split);
  return log_ratio_given_hyper(model, std::span<const typename M::Record>(targets), hyper,
                               theta);
}

} // namespace fseb

#endif
