#ifndef FSEB_SIMLAB_RUNS_HPP
#define FSEB_SIMLAB_RUNS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fseb/engine/confidence_set.hpp"
#include "fseb/engine/evalue_test.hpp"
#include "fseb/models/beta_binomial.hpp"
#include "fseb/models/normal_normal.hpp"
#include "fseb/models/poisson_gamma.hpp"
#include "fseb/numerics/rng.hpp"
#include "fseb/simlab/parallel.hpp"
#include "fseb/simlab/scenario.hpp"

namespace fseb::simlab {

struct RunOptions {
  std::optional<std::size_t> workers;   // default: worker_count()
};

namespace detail {

// Per-replication tallies for one output row.
struct Cell {
  std::size_t trials = 0;
  std::size_t hits = 0;
  std::size_t empty = 0;
  std::size_t uncomputable = 0;
  double width_sum = 0.0;
  std::size_t width_n = 0;
  double rel_sum = 0.0;
  std::size_t rel_n = 0;

  void interval(const IntervalResult& iv, double truth) {
    ++trials;
    if (iv.empty) {
      ++empty;
      return;
    }
    if (iv.contains(truth))
      ++hits;
    width_sum += iv.width();
    ++width_n;
  }
  void rejection(bool reject) {
    ++trials;
    if (reject)
      ++hits;
  }
  void failed() {
    ++trials;
    ++uncomputable;
  }
};

struct RowKey {
  std::string model;
  double delta = 0.0;
  double alpha = 0.0;
  bool widths = false;
  bool relative = false;
};

// Ordered fold of the per-replication cells into output rows.
inline std::vector<SummaryRow> reduce(const ScenarioConfig& cfg, const std::vector<RowKey>& keys,
                                      const std::vector<std::vector<Cell>>& per_rep) {
  std::vector<SummaryRow> rows;
  rows.reserve(keys.size());
  for (std::size_t k = 0; k < keys.size(); ++k) {
    Cell sum;
    double rep_sum = 0.0, rep_sq = 0.0;
    std::size_t rep_n = 0;
    for (const auto& cells : per_rep) {
      const Cell& c = cells[k];
      sum.trials += c.trials;
      sum.hits += c.hits;
      sum.empty += c.empty;
      sum.uncomputable += c.uncomputable;
      sum.width_sum += c.width_sum;
      sum.width_n += c.width_n;
      sum.rel_sum += c.rel_sum;
      sum.rel_n += c.rel_n;
      const std::size_t usable = c.trials - c.uncomputable;
      if (usable > 0) {
        const double p = static_cast<double>(c.hits) / static_cast<double>(usable);
        rep_sum += p;
        rep_sq += p * p;
        ++rep_n;
      }
    }
    SummaryRow row;
    row.scenario_id = cfg.id;
    row.model = keys[k].model;
    row.n = cfg.n;
    row.hyper = cfg.hyper_label();
    row.delta = keys[k].delta;
    row.alpha = keys[k].alpha;
    row.trials = sum.trials;
    row.hits = sum.hits;
    row.empty_ct = sum.empty;
    row.uncomputable_ct = sum.uncomputable;
    const std::size_t usable = sum.trials - sum.uncomputable;
    row.misses = usable - sum.hits;
    row.proportion = usable > 0 ? static_cast<double>(sum.hits) / static_cast<double>(usable)
                                : std::nan("");
    if (rep_n > 0) {
      // spread of per-replication proportions; binomial SE when one test per replication
      const double mean = rep_sum / static_cast<double>(rep_n);
      const double var = std::max(0.0, rep_sq / static_cast<double>(rep_n) - mean * mean);
      row.se = std::sqrt(var / static_cast<double>(rep_n));
    }
    if (keys[k].widths && sum.width_n > 0)
      row.mean_width = sum.width_sum / static_cast<double>(sum.width_n);
    if (keys[k].relative && sum.rel_n > 0)
      row.rel_width = sum.rel_sum / static_cast<double>(sum.rel_n);
    row.reps = cfg.replications;
    row.seed = cfg.base_seed;
    rows.push_back(std::move(row));
  }
  return rows;
}

// Runs `rep(stream, cells, r)` for every replication on its own stream and folds.
template <class Rep>
RunSummary drive(const ScenarioConfig& cfg, const std::vector<RowKey>& keys,
                 const RunOptions& opt, Rep&& rep) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::vector<Cell>> per_rep(cfg.replications, std::vector<Cell>(keys.size()));
  const std::size_t workers = worker_count(opt.workers);
  parallel_for(cfg.replications, workers, [&](std::size_t r) {
    numerics::RngStream stream(cfg.base_seed, numerics::stream_index_for(cfg.id, r));
    rep(stream, per_rep[r], r);
  });
  RunSummary out;
  out.config = cfg;
  out.rows = reduce(cfg, keys, per_rep);
  out.workers = workers;
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

inline double clamp_below_one(double p) { return std::min(p, 1.0 - 1e-9); }

struct Site {
  models::BBPairRecord rec;
  double theta1 = 0.0;
  double theta2 = 0.0;
};

inline Site draw_site(numerics::RngStream& rng, const ScenarioConfig& cfg, double theta1,
                      double theta2) {
  Site s;
  s.theta1 = theta1;
  s.theta2 = theta2;
  s.rec.m1 = rng.uniform_int(cfg.m_lo, cfg.m_hi);
  s.rec.m2 = rng.uniform_int(cfg.m_lo, cfg.m_hi);
  s.rec.x1 = rng.binomial(s.rec.m1, theta1);
  s.rec.x2 = rng.binomial(s.rec.m2, theta2);
  return s;
}

// Per-site leave-two-out log statistics; nullopt where the moment fit fails.
inline std::vector<std::optional<double>> site_log_stats(const std::vector<Site>& sites) {
  models::BBMoments all;
  for (const auto& s : sites)
    all.add(s.rec);
  std::vector<std::optional<double>> out(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    models::BBMoments rest = all;
    rest.remove(sites[i].rec);
    try {
      out[i] = models::bb_two_group_log_T(sites[i].rec, models::bb_hyper_from_moments(rest));
    } catch (const FitError&) {
    } catch (const InsufficientDataError&) {
    }
  }
  return out;
}

// theta values spread evenly over [lo, hi].
inline double grid_point(std::size_t i, std::size_t n, double lo, double hi) {
  return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

} // namespace detail

/// Normal means: coverage of the holdout interval (model "nn") and of the
/// Morris-Efron interval ("nn_me") for the last unit, plus the mean width
/// ratio over replications where Morris-Efron is computable.
inline RunSummary run_stein(const ScenarioConfig& cfg, const RunOptions& opt = {}) {
  std::vector<detail::RowKey> keys;
  for (double a : cfg.alphas) {
    keys.push_back({"nn", 0.0, a, true, true});
    keys.push_back({"nn_me", 0.0, a, true, false});
  }
  return detail::drive(cfg, keys, opt, [&](numerics::RngStream& rng, std::vector<detail::Cell>& cells, std::size_t) {
    const double psi_sq = cfg.hyper.at(0);
    std::vector<models::NormalRecord> recs(cfg.n);
    double truth = 0.0;
    for (auto& r : recs) {
      truth = rng.normal(0.0, psi_sq);
      r.x = rng.normal(truth, 1.0);
    }
    const std::size_t last = cfg.n - 1;
    const double psi_hat =
        models::nn_fit_holdout(std::span<const models::NormalRecord>(recs).first(last)).psi_sq;
    std::optional<double> g;
    try {
      g = models::morris_efron_shrinkage(recs);
    } catch (const UncomputableError&) {
    }
    for (std::size_t k = 0; k < cfg.alphas.size(); ++k) {
      const double alpha = cfg.alphas[k];
      const auto fseb = models::nn_fseb_ci(recs[last].x, psi_hat, alpha, last);
      cells[2 * k].interval(fseb, truth);
      try {
        if (!g)
          throw UncomputableError("no shrinkage factor");
        const auto me = models::morris_efron_interval(recs[last].x, *g, cfg.n, alpha, last);
        cells[2 * k + 1].interval(me, truth);
        if (me.width() > 0.0) {
          cells[2 * k].rel_sum += fseb.width() / me.width();
          ++cells[2 * k].rel_n;
        }
      } catch (const UncomputableError&) {
        cells[2 * k + 1].failed();
      }
    }
  });
}

/// Poisson-gamma: coverage and mean length of the interval for the last unit,
/// with (a, b) fitted on the other n - 1.
inline RunSummary run_pg_ci(const ScenarioConfig& cfg, const RunOptions& opt = {}) {
  std::vector<detail::RowKey> keys;
  for (double a : cfg.alphas)
    keys.push_back({"pg", 0.0, a, true, false});
  return detail::drive(cfg, keys, opt, [&](numerics::RngStream& rng, std::vector<detail::Cell>& cells, std::size_t) {
    std::vector<models::PGRecord> recs(cfg.n);
    double truth = 0.0;
    for (auto& r : recs) {
      r.w = rng.uniform(cfg.w_lo, cfg.w_hi);
      truth = rng.gamma(cfg.hyper[0], cfg.hyper[1]);
      r.x = rng.poisson(truth * r.w);
    }
    const std::size_t last = cfg.n - 1;
    const models::PoissonGamma model;
    std::optional<models::PGHyper> hyper;
    try {
      hyper = model.fit_hyper(std::span<const models::PGRecord>(recs).first(last));
    } catch (const FitError&) {
    }
    for (std::size_t k = 0; k < cfg.alphas.size(); ++k) {
      if (!hyper)
        cells[k].failed();
      else
        cells[k].interval(confidence_set_given_hyper(model, recs[last], *hyper, cfg.alphas[k], last),
                          truth);
    }
  });
}

/// Poisson-gamma: rejection rate of the equal-rate test on the last two
/// units, whose rates differ by delta, with (a, b) fitted on the first n - 2.
inline RunSummary run_pg_test(const ScenarioConfig& cfg, const RunOptions& opt = {}) {
  std::vector<detail::RowKey> keys;
  for (double a : cfg.alphas)
    keys.push_back({"pg", cfg.delta, a, false, false});
  return detail::drive(cfg, keys, opt, [&](numerics::RngStream& rng, std::vector<detail::Cell>& cells, std::size_t) {
    std::vector<models::PGRecord> recs(cfg.n);
    double prev = 0.0;
    for (std::size_t i = 0; i < cfg.n; ++i) {
      recs[i].w = rng.uniform(cfg.w_lo, cfg.w_hi);
      const double theta = i + 1 == cfg.n ? prev + cfg.delta : rng.gamma(cfg.hyper[0], cfg.hyper[1]);
      recs[i].x = rng.poisson(theta * recs[i].w);
      prev = theta;
    }
    const std::span<const models::PGRecord> all(recs);
    const models::PoissonGamma model;
    std::optional<EValueReport> rep;
    try {
      const auto hyper = model.fit_hyper(all.first(cfg.n - 2));
      rep = evalue_test_given_hyper(model, all.last(2), hyper, NullConstraint::equal(),
                                    {cfg.n - 2, cfg.n - 1});
    } catch (const FitError&) {
    }
    for (std::size_t k = 0; k < cfg.alphas.size(); ++k) {
      if (!rep)
        cells[k].failed();
      else
        cells[k].rejection(rep->rejects(cfg.alphas[k]));
    }
  });
}

/// Paired beta-binomial series: every site tested for equal proportions with
/// a leave-two-out moment fit, theta_2 shifted per cfg.shift. The rejection
/// rate is over all sites of all replications.
inline RunSummary run_bb_test(const ScenarioConfig& cfg, const RunOptions& opt = {}) {
  std::vector<detail::RowKey> keys;
  for (double a : cfg.alphas)
    keys.push_back({"bb", cfg.delta, a, false, false});
  return detail::drive(cfg, keys, opt, [&](numerics::RngStream& rng, std::vector<detail::Cell>& cells, std::size_t) {
    std::vector<detail::Site> sites(cfg.n);
    for (auto& s : sites) {
      const double b = rng.beta(cfg.hyper[0], cfg.hyper[1]);
      if (cfg.shift == ShiftRule::Scale) {
        const double t1 = (1.0 - cfg.delta) * b;
        s = detail::draw_site(rng, cfg, t1, detail::clamp_below_one(t1 + cfg.delta));
      } else {
        s = detail::draw_site(rng, cfg, b, detail::clamp_below_one(b + cfg.delta));
      }
    }
    const auto stats = detail::site_log_stats(sites);
    for (std::size_t k = 0; k < cfg.alphas.size(); ++k) {
      const double cut = -std::log(cfg.alphas[k]);
      for (const auto& s : stats) {
        if (!s)
          cells[k].failed();
        else
          cells[k].rejection(*s >= cut);
      }
    }
  });
}

/// Power curve: for each delta in the grid, n sites with theta_1 spread over
/// [0.05, 0.95 - delta] and theta_2 = theta_1 + delta.
inline RunSummary run_bb_power(const ScenarioConfig& cfg, const RunOptions& opt = {}) {
  std::vector<detail::RowKey> keys;
  for (double d : cfg.deltas)
    for (double a : cfg.alphas)
      keys.push_back({"bb", d, a, false, false});
  return detail::drive(cfg, keys, opt, [&](numerics::RngStream& rng, std::vector<detail::Cell>& cells, std::size_t) {
    for (std::size_t j = 0; j < cfg.deltas.size(); ++j) {
      const double d = cfg.deltas[j];
      std::vector<detail::Site> sites(cfg.n);
      for (std::size_t i = 0; i < cfg.n; ++i) {
        const double t1 = detail::grid_point(i, cfg.n, 0.05, 0.95 - d);
        sites[i] = detail::draw_site(rng, cfg, t1, t1 + d);
      }
      const auto stats = detail::site_log_stats(sites);
      for (std::size_t k = 0; k < cfg.alphas.size(); ++k) {
        auto& cell = cells[j * cfg.alphas.size() + k];
        const double cut = -std::log(cfg.alphas[k]);
        for (const auto& s : stats) {
          if (!s)
            cell.failed();
          else
            cell.rejection(*s >= cut);
        }
      }
    }
  });
}

struct ScatterPoint {
  std::size_t rep = 0;
  std::size_t site = 0;
  double theta = 0.0;
  std::optional<double> log_T;
};

struct NullScatter {
  RunSummary summary;             // fraction of statistics at or above each log(1/alpha)
  std::vector<ScatterPoint> points;
  std::vector<double> thresholds; // log(1/alpha), in alpha order
};

/// Null scatter: n sites with theta spread over [0.1, 0.9] in both series.
inline NullScatter run_bb_null_scatter(const ScenarioConfig& cfg, const RunOptions& opt = {}) {
  std::vector<detail::RowKey> keys;
  for (double a : cfg.alphas)
    keys.push_back({"bb", 0.0, a, false, false});
  std::vector<std::vector<ScatterPoint>> slots(cfg.replications);
  NullScatter out;
  out.summary = detail::drive(
      cfg, keys, opt,
      [&](numerics::RngStream& rng, std::vector<detail::Cell>& cells, std::size_t r) {
        std::vector<detail::Site> sites(cfg.n);
        for (std::size_t i = 0; i < cfg.n; ++i) {
          const double t = detail::grid_point(i, cfg.n, 0.1, 0.9);
          sites[i] = detail::draw_site(rng, cfg, t, t);
        }
        const auto stats = detail::site_log_stats(sites);
        for (std::size_t k = 0; k < cfg.alphas.size(); ++k) {
          const double cut = -std::log(cfg.alphas[k]);
          for (const auto& s : stats) {
            if (!s)
              cells[k].failed();
            else
              cells[k].rejection(*s >= cut);
          }
        }
        auto& pts = slots[r];
        pts.resize(cfg.n);
        for (std::size_t i = 0; i < cfg.n; ++i)
          pts[i] = {r, i, sites[i].theta1, stats[i]};
      });
  for (auto& pts : slots)
    out.points.insert(out.points.end(), pts.begin(), pts.end());
  for (double a : cfg.alphas)
    out.thresholds.push_back(-std::log(a));
  return out;
}

/// Dispatch on the study kind; the null scatter contributes its summary only.
inline RunSummary run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {}) {
  switch (cfg.study) {
  case Study::Stein: return run_stein(cfg, opt);
  case Study::PoissonCI: return run_pg_ci(cfg, opt);
  case Study::PoissonTest: return run_pg_test(cfg, opt);
  case Study::BinomialTest: return run_bb_test(cfg, opt);
  case Study::BinomialPower: return run_bb_power(cfg, opt);
  case Study::BinomialNull: return run_bb_null_scatter(cfg, opt).summary;
  }
  throw ConfigError("unknown study");
}

} // namespace fseb::simlab

#endif
