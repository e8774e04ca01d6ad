#ifndef FSEB_SIMLAB_SCENARIO_HPP
#define FSEB_SIMLAB_SCENARIO_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "fseb/error.hpp"

namespace fseb::simlab {

/// Configuration problems; the CLI maps these to its usage exit code.
class ConfigError : public Error {
public:
  using Error::Error;
};

enum class Study {
  Stein,        // normal-normal intervals vs Morris-Efron
  PoissonCI,    // Poisson-gamma interval for the last unit
  PoissonTest,  // Poisson-gamma test of equal rates for the last two units
  BinomialTest, // paired beta-binomial per-site tests
  BinomialPower,
  BinomialNull, // null scatter of per-site log statistics
};

inline const char* study_tag(Study s) {
  switch (s) {
  case Study::Stein: return "stein";
  case Study::PoissonCI: return "pg_ci";
  case Study::PoissonTest: return "pg_test";
  case Study::BinomialTest: return "bb_test";
  case Study::BinomialPower: return "bb_power";
  case Study::BinomialNull: return "bb_null";
  }
  return "?";
}

inline std::optional<Study> study_from_tag(const std::string& tag) {
  for (Study s : {Study::Stein, Study::PoissonCI, Study::PoissonTest, Study::BinomialTest,
                  Study::BinomialPower, Study::BinomialNull})
    if (tag == study_tag(s))
      return s;
  return std::nullopt;
}

/// How the second series is shifted by delta in the paired binomial study.
/// Scale draws theta_1 = (1 - delta) B with B from the prior, so the gap is
/// exactly delta; Clamp draws theta_1 from the prior and caps theta_1 + delta
/// just below 1, which shrinks the gap for large theta_1.
enum class ShiftRule { Scale, Clamp };

inline const char* shift_tag(ShiftRule r) { return r == ShiftRule::Scale ? "scale" : "clamp"; }

struct ScenarioConfig {
  std::string id;
  Study study = Study::Stein;
  std::size_t n = 100;
  // {psi_sq} | {a, b} | {gamma, beta}; unused by the fixed-theta binomial studies
  std::vector<double> hyper;
  double delta = 0.0;
  std::vector<double> alphas{0.05};
  std::size_t replications = 1000;
  std::uint64_t base_seed = 1;
  // exposures w ~ Uniform(w_lo, w_hi); trials m ~ integer Uniform[m_lo, m_hi]
  double w_lo = 0.0;
  double w_hi = 10.0;
  std::int64_t m_lo = 15;
  std::int64_t m_hi = 40;
  ShiftRule shift = ShiftRule::Scale;
  // effect grid for the power curve
  std::vector<double> deltas;

  [[nodiscard]] std::size_t hyper_arity() const {
    switch (study) {
    case Study::Stein: return 1;
    case Study::BinomialPower:
    case Study::BinomialNull: return 0;
    default: return 2;
    }
  }

  [[nodiscard]] std::string model_tag() const {
    switch (study) {
    case Study::Stein: return "nn";
    case Study::PoissonCI:
    case Study::PoissonTest: return "pg";
    default: return "bb";
    }
  }

  [[nodiscard]] std::string hyper_label() const {
    char buf[96];
    switch (study) {
    case Study::Stein:
      std::snprintf(buf, sizeof buf, "psi_sq=%g", hyper.at(0));
      break;
    case Study::PoissonCI:
    case Study::PoissonTest:
      std::snprintf(buf, sizeof buf, "a=%g;b=%g", hyper.at(0), hyper.at(1));
      break;
    case Study::BinomialTest:
      std::snprintf(buf, sizeof buf, "gamma=%g;beta=%g", hyper.at(0), hyper.at(1));
      break;
    case Study::BinomialPower:
      std::snprintf(buf, sizeof buf, "theta1=grid");
      break;
    case Study::BinomialNull:
      std::snprintf(buf, sizeof buf, "theta=grid");
      break;
    }
    return buf;
  }

  void validate() const {
    if (id.empty())
      throw ConfigError("scenario id must not be empty");
    if (replications < 1)
      throw ConfigError(id + ": reps must be >= 1");
    if (n < 3)
      throw ConfigError(id + ": n must be >= 3");
    if (study == Study::PoissonTest && n < 4)
      throw ConfigError(id + ": n must be >= 4 for the two-unit test");
    if (alphas.empty())
      throw ConfigError(id + ": alpha list is empty");
    for (double a : alphas)
      if (!(a > 0.0 && a < 1.0))
        throw ConfigError(id + ": alpha must lie in (0, 1)");
    if (hyper.size() != hyper_arity())
      throw ConfigError(id + ": expected " + std::to_string(hyper_arity()) +
                        " hyperparameter value(s)");
    for (double h : hyper)
      if (!(h > 0.0) || !std::isfinite(h))
        throw ConfigError(id + ": hyperparameters must be positive");
    if (!(delta >= 0.0) || !std::isfinite(delta))
      throw ConfigError(id + ": delta must be >= 0");
    if (!(w_lo >= 0.0 && w_hi > w_lo) || !std::isfinite(w_hi))
      throw ConfigError(id + ": need 0 <= w_lo < w_hi");
    if (!(m_lo >= 1 && m_hi >= m_lo))
      throw ConfigError(id + ": need 1 <= m_lo <= m_hi");
    if (study == Study::BinomialTest && !(delta < 1.0))
      throw ConfigError(id + ": delta must be < 1 for proportions");
    if (study == Study::BinomialPower) {
      if (deltas.empty())
        throw ConfigError(id + ": power curve needs a delta grid");
      for (double d : deltas)
        if (!(d > 0.0 && d < 0.9))
          throw ConfigError(id + ": power-curve deltas must lie in (0, 0.9)");
    }
  }
};

/// One output line: a (model, delta, alpha) cell of a scenario. Counts are in
/// trials, which is replications times tests per replication.
struct SummaryRow {
  std::string scenario_id;
  std::string model;
  std::size_t n = 0;
  std::string hyper;
  double delta = 0.0;
  double alpha = 0.0;
  double proportion = 0.0;   // coverage or rejection
  std::optional<double> mean_width;
  std::optional<double> rel_width;
  std::size_t trials = 0;
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t empty_ct = 0;
  std::size_t uncomputable_ct = 0;
  double se = 0.0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
};

struct RunSummary {
  ScenarioConfig config;
  std::vector<SummaryRow> rows;
  double wall_seconds = 0.0;
  std::size_t workers = 1;
};

} // namespace fseb::simlab

#endif
