#ifndef FSEB_ENGINE_VALIDITY_HPP
#define FSEB_ENGINE_VALIDITY_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "fseb/engine/confidence_set.hpp"
#include "fseb/engine/dataset.hpp"
#include "fseb/engine/evalue_test.hpp"
#include "fseb/engine/model.hpp"
#include "fseb/error.hpp"
#include "fseb/numerics/rng.hpp"

namespace fseb {

/// Monte Carlo estimate of a proportion with its binomial standard error.
struct ValidityEstimate {
  double proportion = 0.0;
  double standard_error = 0.0;
  std::size_t hits = 0;
  std::size_t replications = 0;

  /// True if `bound` is exceeded (from below for coverage) by more than
  /// `k` standard errors.
  [[nodiscard]] bool below(double bound, double k) const {
    return proportion < bound - k * standard_error;
  }
};

template <class Record>
struct CoverageCase {
  Dataset<Record> data;
  std::size_t index = 0;
  double truth = 0.0;
};

template <class Record>
struct TestCase {
  Dataset<Record> data;
  std::vector<std::size_t> targets;
  NullConstraint null = NullConstraint::equal();
};

/// Runs `trial(stream)` once per replication, each on its own stream, and
/// counts how often it returns true.
template <class Trial>
ValidityEstimate monte_carlo_proportion(Trial&& trial, std::size_t replications,
                                        std::uint64_t seed, std::string_view scenario_id) {
  if (replications == 0)
    throw DomainError("monte_carlo_proportion: need at least one replication");
  std::size_t hits = 0;
  for (std::size_t r = 0; r < replications; ++r) {
    numerics::RngStream stream(seed, numerics::stream_index_for(scenario_id, r));
    if (trial(stream))
      ++hits;
  }
  ValidityEstimate est;
  est.hits = hits;
  est.replications = replications;
  est.proportion = static_cast<double>(hits) / static_cast<double>(replications);
  est.standard_error = std::sqrt(est.proportion * (1.0 - est.proportion) /
                                 static_cast<double>(replications));
  return est;
}

/// Empirical coverage of the level-alpha confidence set under `generator`.
template <ScalarModel M, class Gen>
ValidityEstimate markov_validity_check(const M& model, Gen&& generator,
                                       std::size_t replications, double alpha,
                                       std::uint64_t seed,
                                       std::string_view scenario_id = "coverage") {
  if (replications < 100)
    throw DomainError("validity check needs at least 100 replications");
  return monte_carlo_proportion(
      [&](numerics::RngStream& s) {
        const CoverageCase<typename M::Record> c = generator(s);
        return confidence_set(model, c.data, c.index, alpha).contains(c.truth);
      },
      replications, seed, scenario_id);
}

/// Empirical rejection rate of the e-value test when `generator` draws data
/// satisfying the null.
template <Model M, class Gen>
ValidityEstimate markov_size_check(const M& model, Gen&& generator, std::size_t replications,
                                   double alpha, std::uint64_t seed,
                                   std::string_view scenario_id = "size") {
  if (replications < 100)
    throw DomainError("validity check needs at least 100 replications");
  return monte_carlo_proportion(
      [&](numerics::RngStream& s) {
        const TestCase<typename M::Record> c = generator(s);
        return evalue_test(model, c.data, c.targets, c.null).rejects(alpha);
      },
      replications, seed, scenario_id);
}

} // namespace fseb

#endif
