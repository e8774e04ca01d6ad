#ifndef FSEB_CLI_COMMANDS_HPP
#define FSEB_CLI_COMMANDS_HPP

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fseb/adjust/comparators.hpp"
#include "fseb/adjust/multiplicity.hpp"
#include "fseb/engine/confidence_set.hpp"
#include "fseb/engine/validity.hpp"
#include "fseb/io/config.hpp"
#include "fseb/io/csv.hpp"
#include "fseb/io/report.hpp"
#include "fseb/models/beta_binomial.hpp"
#include "fseb/models/normal_normal.hpp"
#include "fseb/models/poisson_gamma.hpp"
#include "fseb/simlab/runs.hpp"

namespace fseb::cli {

inline constexpr const char* version = "0.1.0";

enum ExitCode : int { exit_ok = 0, exit_usage = 2, exit_data = 3, exit_numeric = 4 };

class UsageError : public Error {
public:
  using Error::Error;
};

// An empirical check found a finite-sample guarantee broken beyond noise.
class GuaranteeError : public Error {
public:
  using Error::Error;
};

struct AdjustMode {
  enum class Kind { None, Bonferroni, Fcr, BH };
  Kind kind = Kind::None;
  double threshold = 0.0;   // fcr selection: lower bound above this

  static AdjustMode parse(const std::string& s) {
    if (s == "none")
      return {};
    if (s == "bonferroni")
      return {Kind::Bonferroni, 0.0};
    if (s == "bh")
      return {Kind::BH, 0.0};
    if (s.rfind("fcr:", 0) == 0) {
      double thr = 0.0;
      const std::string v = s.substr(4);
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), thr);
      if (ec == std::errc() && p == v.data() + v.size() && std::isfinite(thr))
        return {Kind::Fcr, thr};
    }
    throw UsageError("--adjust: expected none, bonferroni, fcr:<threshold> or bh, got '" + s + "'");
  }
};

struct Options {
  std::string input;
  std::string output;   // empty: stdout, no sidecar
  std::string model;
  std::string scenario;
  std::vector<double> alphas;
  std::string adjust = "none";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> threads;
  bool comparators = false;
  std::size_t window = 10;
  std::optional<std::int64_t> min_m;
  std::optional<std::int64_t> max_m;
};

/// Maps every library and I/O failure onto the exit-code contract.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const simlab::ConfigError*>(&e) ||
      dynamic_cast<const io::SchemaError*>(&e))
    return exit_usage;
  if (dynamic_cast<const io::DataError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const InsufficientDataError*>(&e) ||
      dynamic_cast<const DegenerateDataError*>(&e))
    return exit_data;
  return exit_numeric;
}

namespace detail {

inline std::vector<double> alphas_or_default(const Options& o) {
  const std::vector<double> a = o.alphas.empty() ? std::vector<double>{0.05} : o.alphas;
  for (double v : a)
    if (!(v > 0.0 && v < 1.0))
      throw UsageError("--alpha: " + io::alpha_label(v) + " is outside (0, 1)");
  return a;
}

inline io::CsvTable read_input(const Options& o) {
  if (o.input.empty())
    throw UsageError("--input is required");
  std::ifstream in(o.input);
  if (!in)
    throw UsageError("cannot open input '" + o.input + "'");
  return io::read_csv(in, o.input);
}

inline void write_output(const Options& o, const io::CsvTable& t) {
  if (o.output.empty()) {
    io::write_csv(std::cout, t);
    return;
  }
  std::ofstream out(o.output, std::ios::binary);
  if (!out)
    throw UsageError("cannot write output '" + o.output + "'");
  io::write_csv(out, t);
}

inline void write_sidecar(const std::string& path, const nlohmann::json& j) {
  if (path.empty())
    return;
  std::ofstream out(path + ".json", std::ios::binary);
  if (!out)
    throw UsageError("cannot write sidecar '" + path + ".json'");
  out << j.dump(2) << '\n';
}

inline std::string row_where(const io::CsvTable& t, std::size_t row) {
  return t.source + ":" + std::to_string(t.lines.at(row));
}

inline std::vector<models::PGRecord> pg_records(const io::CsvTable& t) {
  io::require_header(t, {"index", "x", "w"});
  std::vector<models::PGRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    models::PGRecord r{io::parse_int(t, i, 1), io::parse_double(t, i, 2)};
    if (r.x < 0)
      throw io::DataError(io::cell_where(t, i, 1) + ": count must be >= 0");
    if (!(r.w > 0.0))
      throw io::DataError(io::cell_where(t, i, 2) + ": exposure must be > 0");
    out.push_back(r);
  }
  return out;
}

inline std::vector<models::NormalRecord> nn_records(const io::CsvTable& t) {
  io::require_header(t, {"index", "x"});
  std::vector<models::NormalRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    out.push_back({io::parse_double(t, i, 1)});
  return out;
}

inline models::BBRecord bb_cell(const io::CsvTable& t, std::size_t row, std::size_t xc,
                                std::size_t mc) {
  const models::BBRecord r{io::parse_int(t, row, xc), io::parse_int(t, row, mc)};
  if (r.m < 1)
    throw io::DataError(io::cell_where(t, row, mc) + ": trials must be >= 1 (row rejected)");
  if (r.x < 0 || r.x > r.m)
    throw io::DataError(io::cell_where(t, row, xc) + ": successes must lie in [0, " +
                        std::to_string(r.m) + "]");
  return r;
}

inline std::vector<models::BBRecord> bb_records(const io::CsvTable& t) {
  io::require_header(t, {"index", "x", "m"});
  std::vector<models::BBRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    out.push_back(bb_cell(t, i, 1, 2));
  return out;
}

inline std::vector<models::BBPairRecord> paired_records(const io::CsvTable& t) {
  io::require_header(t, {"index", "x1", "m1", "x2", "m2"});
  std::vector<models::BBPairRecord> out;
  std::vector<std::string> bad;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    try {
      const auto a = bb_cell(t, i, 1, 2);
      const auto b = bb_cell(t, i, 3, 4);
      out.push_back({a.x, a.m, b.x, b.m});
    } catch (const io::DataError& e) {
      bad.push_back(e.what());
    }
  }
  if (!bad.empty()) {
    std::string msg = std::to_string(bad.size()) + " invalid row(s):";
    for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 20); ++k)
      msg += "\n  " + bad[k];
    throw io::DataError(msg);
  }
  return out;
}

// Per-unit intervals for one model, in the common report layout.
template <class M>
void interval_rows(const M& model, const std::vector<typename M::Record>& recs,
                   const std::vector<double>& estimates, const io::CsvTable& in,
                   const std::vector<double>& alphas, const AdjustMode& adj, io::CsvTable& out,
                   nlohmann::json& meta) {
  const Dataset<typename M::Record> data(recs);
  const IntervalMaker<M> maker(model, data);
  const std::size_t n = recs.size();
  auto add = [&](std::size_t i, double alpha, const IntervalResult& iv,
                 std::optional<bool> selected) {
    std::vector<std::string> row = in.rows[i];
    row.push_back(io::fmt(alpha));
    row.push_back(io::fmt(estimates[i]));
    row.push_back(iv.empty ? "" : io::fmt(iv.lower));
    row.push_back(iv.empty ? "" : io::fmt(iv.upper));
    row.push_back(io::fmt(iv.alpha));
    row.push_back(iv.empty ? "1" : "0");
    if (selected)
      row.push_back(*selected ? "1" : "0");
    out.rows.push_back(std::move(row));
    out.lines.push_back(out.rows.size() + 1);
  };
  nlohmann::json adjusted = nlohmann::json::array();
  for (double alpha : alphas) {
    switch (adj.kind) {
    case AdjustMode::Kind::None:
      for (std::size_t i = 0; i < n; ++i)
        add(i, alpha, maker(i, alpha), std::nullopt);
      break;
    case AdjustMode::Kind::Bonferroni: {
      const auto s = adjust::bonferroni_simultaneous(maker, alpha);
      for (std::size_t i = 0; i < n; ++i)
        add(i, alpha, s.intervals[i], std::nullopt);
      adjusted.push_back({{"alpha", alpha}, {"per_interval_alpha", s.per_interval_alpha}});
      break;
    }
    case AdjustMode::Kind::Fcr: {
      const auto r = adjust::fcr_adjust(maker, adjust::SelectionRule::lower_above(adj.threshold),
                                        alpha);
      std::vector<std::optional<IntervalResult>> chosen(n);
      for (std::size_t k = 0; k < r.selected.size(); ++k)
        chosen[r.selected[k]] = r.intervals[k];
      const double per = alpha / static_cast<double>(n);
      std::vector<std::string> labels;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) {
          add(i, alpha, *chosen[i], true);
          labels.push_back(in.rows[i][0]);
        } else {
          add(i, alpha, maker(i, per), false);
        }
      }
      adjusted.push_back({{"alpha", alpha}, {"selected", labels}, {"selected_level", r.level}});
      break;
    }
    case AdjustMode::Kind::BH:
      throw UsageError("--adjust bh applies to p-values (test, adjust), not to intervals");
    }
  }
  meta["adjustment"] = adjusted;
}

template <class M>
std::vector<double> posterior_estimates(const M& model, const std::vector<typename M::Record>& recs) {
  const auto hyper = model.fit_hyper(std::span<const typename M::Record>(recs));
  std::vector<double> out;
  for (const auto& r : recs)
    out.push_back(model.posterior_mean(r, hyper));
  return out;
}

inline std::vector<double> trailing_mean(const std::vector<int>& calls, std::size_t window) {
  std::vector<double> out(calls.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < calls.size(); ++i) {
    sum += calls[i];
    if (i >= window)
      sum -= calls[i - window];
    out[i] = sum / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

} // namespace detail

/// Per-unit confidence intervals for index,x[,w|,m] data.
inline int cmd_ci(const Options& o, std::ostream& log) {
  const auto alphas = detail::alphas_or_default(o);
  const AdjustMode adj = AdjustMode::parse(o.adjust);
  const io::CsvTable in = detail::read_input(o);
  io::CsvTable out;
  out.header = in.header;
  for (const char* c : {"alpha", "estimate", "lower", "upper", "level", "empty"})
    out.header.push_back(c);
  if (adj.kind == AdjustMode::Kind::Fcr)
    out.header.push_back("selected");
  nlohmann::json meta;
  if (o.model == "pg") {
    const auto recs = detail::pg_records(in);
    const models::PoissonGamma m;
    detail::interval_rows(m, recs, detail::posterior_estimates(m, recs), in, alphas, adj, out, meta);
  } else if (o.model == "nn") {
    const auto recs = detail::nn_records(in);
    const models::NormalNormal m;
    detail::interval_rows(m, recs, detail::posterior_estimates(m, recs), in, alphas, adj, out, meta);
  } else if (o.model == "bb") {
    const auto recs = detail::bb_records(in);
    const models::BetaBinomial m;
    detail::interval_rows(m, recs, detail::posterior_estimates(m, recs), in, alphas, adj, out, meta);
  } else {
    throw UsageError("--model: expected nn, pg or bb, got '" + o.model + "'");
  }
  std::size_t empties = 0;
  for (const auto& r : out.rows)
    empties += r[in.header.size() + 5] == "1";
  log << "fseb ci: " << in.rows.size() << " units, model " << o.model << ", " << empties
      << " empty set(s)\n";
  detail::write_output(o, out);
  meta["command"] = "ci";
  meta["version"] = version;
  meta["model"] = o.model;
  meta["input"] = o.input;
  meta["alphas"] = alphas;
  meta["adjust"] = o.adjust;
  meta["units"] = in.rows.size();
  meta["empty_sets"] = empties;
  detail::write_sidecar(o.output, meta);
  return exit_ok;
}

struct ConcordanceRow {
  double alpha;
  std::string a, b;
  std::size_t both = 0, only_a = 0, only_b = 0, neither = 0;
  [[nodiscard]] double matching() const {
    const double total = static_cast<double>(both + only_a + only_b + neither);
    return total > 0 ? static_cast<double>(both + neither) / total : std::nan("");
  }
};

inline ConcordanceRow concordance(double alpha, const std::string& a, const std::vector<int>& ca,
                                  const std::string& b, const std::vector<int>& cb) {
  ConcordanceRow r{alpha, a, b};
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (ca[i] && cb[i])
      ++r.both;
    else if (ca[i])
      ++r.only_a;
    else if (cb[i])
      ++r.only_b;
    else
      ++r.neither;
  }
  return r;
}

/// Per-site equal-proportion tests on paired series index,x1,m1,x2,m2.
inline int cmd_test(const Options& o, std::ostream& log) {
  const auto alphas = detail::alphas_or_default(o);
  const AdjustMode adj = AdjustMode::parse(o.adjust);
  if (adj.kind == AdjustMode::Kind::Fcr)
    throw UsageError("--adjust fcr applies to intervals (ci), not to tests");
  if (o.window < 1)
    throw UsageError("--window must be >= 1");
  if (!o.model.empty() && o.model != "bb")
    throw UsageError("test supports --model bb only");
  const io::CsvTable raw = detail::read_input(o);
  const auto all = detail::paired_records(raw);

  // coverage filters
  io::CsvTable in;
  in.header = raw.header;
  in.source = raw.source;
  std::vector<models::BBPairRecord> recs;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto lo = std::min(all[i].m1, all[i].m2);
    const auto hi = std::max(all[i].m1, all[i].m2);
    if ((o.min_m && lo < *o.min_m) || (o.max_m && hi > *o.max_m))
      continue;
    recs.push_back(all[i]);
    in.rows.push_back(raw.rows[i]);
    in.lines.push_back(raw.lines[i]);
  }
  const std::size_t n = recs.size();
  if (n < 3)
    throw InsufficientDataError("test needs at least 3 sites after filtering, have " +
                                std::to_string(n));

  // leave-two-out: each site's prior is fitted on all other sites, both series
  models::BBMoments total;
  for (const auto& r : recs)
    total.add(r);
  std::vector<double> log_T(n), p(n);
  for (std::size_t i = 0; i < n; ++i) {
    models::BBMoments rest = total;
    rest.remove(recs[i]);
    try {
      log_T[i] = models::bb_two_group_log_T(recs[i], models::bb_hyper_from_moments(rest));
    } catch (const FitError& e) {
      throw DegenerateDataError(detail::row_where(in, i) + ": " + e.what());
    }
    p[i] = log_T[i] <= 0.0 ? 1.0 : std::exp(-log_T[i]);
  }
  const auto bh = adjust::bh_adjust(p);

  std::vector<std::vector<int>> calls(alphas.size(), std::vector<int>(n));
  for (std::size_t k = 0; k < alphas.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) {
      switch (adj.kind) {
      case AdjustMode::Kind::Bonferroni:
        calls[k][i] = p[i] <= alphas[k] / static_cast<double>(n);
        break;
      case AdjustMode::Kind::BH: calls[k][i] = bh[i] <= alphas[k]; break;
      default: calls[k][i] = log_T[i] >= -std::log(alphas[k]); break;
      }
    }

  std::vector<double> fisher, score, fisher_bh, score_bh;
  std::vector<std::vector<int>> fisher_calls, score_calls;
  if (o.comparators) {
    for (const auto& r : recs) {
      fisher.push_back(adjust::fisher_exact_2x2(r.x1, r.m1, r.x2, r.m2));
      score.push_back(adjust::score_test_2prop(r.x1, r.m1, r.x2, r.m2));
    }
    fisher_bh = adjust::bh_adjust(fisher);
    score_bh = adjust::bh_adjust(score);
    for (double a : alphas) {
      std::vector<int> fc(n), sc(n);
      for (std::size_t i = 0; i < n; ++i) {
        fc[i] = fisher_bh[i] <= a;
        sc[i] = score_bh[i] <= a;
      }
      fisher_calls.push_back(std::move(fc));
      score_calls.push_back(std::move(sc));
    }
  }

  io::CsvTable out;
  out.header = in.header;
  for (const char* c : {"log_T", "p_value", "bh_p"})
    out.header.push_back(c);
  for (double a : alphas) {
    out.header.push_back("call_" + io::alpha_label(a));
    out.header.push_back("ma_" + io::alpha_label(a));
  }
  if (o.comparators) {
    for (const char* c : {"fisher_p", "fisher_bh", "score_p", "score_bh"})
      out.header.push_back(c);
    for (double a : alphas) {
      out.header.push_back("fisher_call_" + io::alpha_label(a));
      out.header.push_back("score_call_" + io::alpha_label(a));
    }
  }
  std::vector<std::vector<double>> ma;
  for (const auto& c : calls)
    ma.push_back(detail::trailing_mean(c, o.window));
  for (std::size_t i = 0; i < n; ++i) {
    auto row = in.rows[i];
    row.push_back(io::fmt(log_T[i]));
    row.push_back(io::fmt(p[i]));
    row.push_back(io::fmt(bh[i]));
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      row.push_back(std::to_string(calls[k][i]));
      row.push_back(io::fmt(ma[k][i]));
    }
    if (o.comparators) {
      row.push_back(io::fmt(fisher[i]));
      row.push_back(io::fmt(fisher_bh[i]));
      row.push_back(io::fmt(score[i]));
      row.push_back(io::fmt(score_bh[i]));
      for (std::size_t k = 0; k < alphas.size(); ++k) {
        row.push_back(std::to_string(fisher_calls[k][i]));
        row.push_back(std::to_string(score_calls[k][i]));
      }
    }
    out.rows.push_back(std::move(row));
    out.lines.push_back(out.rows.size() + 1);
  }
  detail::write_output(o, out);

  nlohmann::json meta;
  meta["command"] = "test";
  meta["version"] = version;
  meta["input"] = o.input;
  meta["sites_read"] = all.size();
  meta["sites_tested"] = n;
  meta["adjust"] = o.adjust;
  meta["window"] = o.window;
  nlohmann::json rates = nlohmann::json::array();
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    const double rate = static_cast<double>(std::count(calls[k].begin(), calls[k].end(), 1)) /
                        static_cast<double>(n);
    rates.push_back({{"alpha", alphas[k]}, {"rejection_proportion", rate}});
    log << "fseb test: alpha " << io::alpha_label(alphas[k]) << " rejection proportion "
        << io::fmt(rate) << " over " << n << " sites\n";
  }
  meta["rejections"] = rates;

  if (o.comparators) {
    io::CsvTable conc;
    conc.header = {"alpha",   "method_a", "method_b", "both",
                   "only_a",  "only_b",   "neither",  "matching_proportion"};
    nlohmann::json cj = nlohmann::json::array();
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      for (const auto& r : {concordance(alphas[k], "fseb", calls[k], "fisher_bh", fisher_calls[k]),
                            concordance(alphas[k], "fseb", calls[k], "score_bh", score_calls[k]),
                            concordance(alphas[k], "fisher_bh", fisher_calls[k], "score_bh",
                                        score_calls[k])}) {
        conc.rows.push_back({io::fmt(r.alpha), r.a, r.b, std::to_string(r.both),
                             std::to_string(r.only_a), std::to_string(r.only_b),
                             std::to_string(r.neither), io::fmt(r.matching())});
        cj.push_back({{"alpha", r.alpha}, {"a", r.a}, {"b", r.b}, {"matching", r.matching()}});
      }
    }
    meta["concordance"] = cj;
    if (!o.output.empty()) {
      std::ofstream c(o.output + ".concordance.csv", std::ios::binary);
      if (!c)
        throw UsageError("cannot write concordance table");
      io::write_csv(c, conc);
    } else {
      io::write_csv(log, conc);
    }
  }
  detail::write_sidecar(o.output, meta);
  return exit_ok;
}

/// Multiplicity adjustment of a p_value column (other columns pass through).
inline int cmd_adjust(const Options& o, std::ostream& log) {
  const AdjustMode adj = AdjustMode::parse(o.adjust);
  if (adj.kind == AdjustMode::Kind::Fcr || adj.kind == AdjustMode::Kind::None)
    throw UsageError("adjust: --adjust must be bh or bonferroni");
  const io::CsvTable in = detail::read_input(o);
  const auto col = in.column("p_value");
  if (!col)
    throw io::SchemaError(in.source + ":1: missing column 'p_value'");
  std::vector<double> p;
  for (std::size_t i = 0; i < in.rows.size(); ++i) {
    const double v = io::parse_double(in, i, *col);
    if (!(v >= 0.0 && v <= 1.0))
      throw io::DataError(io::cell_where(in, i, *col) + ": p-value outside [0, 1]");
    p.push_back(v);
  }
  if (p.empty())
    throw io::DataError(in.source + ": no rows");
  std::vector<double> adjusted;
  if (adj.kind == AdjustMode::Kind::BH) {
    adjusted = adjust::bh_adjust(p);
  } else {
    for (double v : p)
      adjusted.push_back(std::min(1.0, v * static_cast<double>(p.size())));
  }
  io::CsvTable out = in;
  out.header.push_back("adjusted_p");
  for (double a : o.alphas)
    out.header.push_back("call_" + io::alpha_label(a));
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    out.rows[i].push_back(io::fmt(adjusted[i]));
    for (double a : o.alphas)
      out.rows[i].push_back(adjusted[i] <= a ? "1" : "0");
  }
  log << "fseb adjust: " << p.size() << " p-values, method " << o.adjust << "\n";
  detail::write_output(o, out);
  return exit_ok;
}

/// Runs every scenario of a config file and writes the summary table.
inline int cmd_simulate(const Options& o, std::ostream& log) {
  if (o.input.empty())
    throw UsageError("simulate: --input <config> is required");
  std::ifstream in(o.input);
  if (!in)
    throw UsageError("cannot open config '" + o.input + "'");
  auto scenarios = io::scenarios_from(io::parse_config(in, o.input));
  for (auto& s : scenarios) {
    if (o.seed)
      s.base_seed = *o.seed;
    if (o.reps) {
      if (*o.reps < 1)
        throw UsageError("--reps must be >= 1");
      s.replications = *o.reps;
    }
  }
  const simlab::RunOptions ro{o.threads};
  std::vector<simlab::SummaryRow> rows;
  nlohmann::json runs = nlohmann::json::array();
  io::CsvTable scatter;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& s : scenarios) {
    log << "fseb simulate: " << s.id << " (" << simlab::study_tag(s.study) << ", n=" << s.n
        << ", reps=" << s.replications << ") seed=" << s.base_seed << "\n";
    simlab::RunSummary summary;
    if (s.study == simlab::Study::BinomialNull) {
      auto ns = simlab::run_bb_null_scatter(s, ro);
      auto part = io::scatter_table(ns);
      if (scatter.header.empty())
        scatter.header.insert(scatter.header.end(), {"scenario_id"});
      for (auto& r : part.rows) {
        r.insert(r.begin(), s.id);
        scatter.rows.push_back(std::move(r));
      }
      if (scatter.header.size() == 1)
        scatter.header.insert(scatter.header.end(), part.header.begin(), part.header.end());
      summary = std::move(ns.summary);
    } else {
      summary = simlab::run_scenario(s, ro);
    }
    rows.insert(rows.end(), summary.rows.begin(), summary.rows.end());
    runs.push_back({{"scenario_id", s.id},
                    {"study", simlab::study_tag(s.study)},
                    {"seed", s.base_seed},
                    {"reps", s.replications},
                    {"workers", summary.workers},
                    {"wall_seconds", summary.wall_seconds}});
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  detail::write_output(o, io::summary_table(rows));
  if (!o.output.empty() && !scatter.rows.empty()) {
    std::ofstream sc(o.output + ".scatter.csv", std::ios::binary);
    if (!sc)
      throw UsageError("cannot write scatter table");
    io::write_csv(sc, scatter);
  }
  nlohmann::json meta;
  meta["command"] = "simulate";
  meta["version"] = version;
  meta["config"] = o.input;
  meta["seed_override"] = o.seed ? nlohmann::json(*o.seed) : nlohmann::json(nullptr);
  meta["scenarios"] = runs;
  meta["wall_seconds"] = wall;
  detail::write_sidecar(o.output, meta);
  return exit_ok;
}

/// Empirical check of the finite-sample guarantee on a named scenario.
struct ValidityReport {
  std::string model, scenario, kind;
  double alpha = 0.05;
  ValidityEstimate estimate;
  double bound = 0.0;
  bool violated = false;
};

inline ValidityReport run_validity(const std::string& model, const std::string& scenario,
                                   double alpha, std::size_t reps, std::uint64_t seed) {
  using namespace models;
  ValidityReport rep{model, scenario, "coverage", alpha, {}, 0.0, false};
  const std::string id = model + "/" + scenario;
  auto pg_data = [](numerics::RngStream& s, std::size_t n, double a, double b, double& last) {
    std::vector<PGRecord> recs(n);
    for (auto& r : recs) {
      r.w = s.uniform(0.0, 10.0);
      last = a > 0.0 ? s.gamma(a, b) : 0.0;
      r.x = s.poisson(last * r.w);
    }
    return recs;
  };
  if (model == "nn" && (scenario == "table1" || scenario == "table1-small")) {
    const std::size_t n = scenario == "table1" ? 100 : 10;
    rep.estimate = markov_validity_check(
        NormalNormal{},
        [n](numerics::RngStream& s) {
          std::vector<NormalRecord> recs(n);
          double truth = 0.0;
          for (auto& r : recs) {
            truth = s.normal(0.0, 1.0);
            r.x = s.normal(truth, 1.0);
          }
          return CoverageCase<NormalRecord>{Dataset<NormalRecord>(recs), n - 1, truth};
        },
        reps, alpha, seed, id);
  } else if (model == "pg" && (scenario == "table2" || scenario == "table2-small" ||
                               scenario == "point-mass")) {
    const std::size_t n = scenario == "table2" ? 100 : 10;
    const double a = scenario == "point-mass" ? 0.0 : 2.0;
    const double b = scenario == "table2" ? 5.0 : 2.0;
    rep.estimate = markov_validity_check(
        PoissonGamma{},
        [&, n, a, b](numerics::RngStream& s) {
          double truth = 0.0;
          auto recs = pg_data(s, n, a, b, truth);
          return CoverageCase<PGRecord>{Dataset<PGRecord>(recs), n - 1, truth};
        },
        reps, alpha, seed, id);
  } else if (model == "pg" && scenario == "table3-null") {
    rep.kind = "size";
    rep.estimate = markov_size_check(
        PoissonGamma{},
        [&](numerics::RngStream& s) {
          double truth = 0.0;
          auto recs = pg_data(s, 99, 2.0, 2.0, truth);
          // the added last unit shares the rate of the one before it
          const double w = s.uniform(0.0, 10.0);
          recs.push_back({s.poisson(truth * w), w});
          return TestCase<PGRecord>{Dataset<PGRecord>(recs), {98, 99}, NullConstraint::equal()};
        },
        reps, alpha, seed, id);
  } else if (model == "bb" && scenario == "bb-ci") {
    rep.estimate = markov_validity_check(
        BetaBinomial{},
        [](numerics::RngStream& s) {
          std::vector<BBRecord> recs(10);
          double truth = 0.0;
          for (auto& r : recs) {
            truth = s.beta(10.0, 10.0);
            r.m = s.uniform_int(15, 40);
            r.x = s.binomial(r.m, truth);
          }
          return CoverageCase<BBRecord>{Dataset<BBRecord>(recs), 9, truth};
        },
        reps, alpha, seed, id);
  } else if (model == "bb" && (scenario == "table4-null" || scenario == "fig2a-null")) {
    rep.kind = "size";
    const bool grid = scenario == "fig2a-null";
    const std::size_t n = grid ? 20 : 100;
    rep.estimate = markov_size_check(
        BetaBinomialPaired{},
        [grid, n](numerics::RngStream& s) {
          std::vector<BBPairRecord> recs(n);
          for (std::size_t i = 0; i < n; ++i) {
            const double t = grid ? 0.1 + 0.8 * static_cast<double>(i) / static_cast<double>(n - 1)
                                  : s.beta(2.0, 2.0);
            recs[i].m1 = s.uniform_int(15, 40);
            recs[i].m2 = s.uniform_int(15, 40);
            recs[i].x1 = s.binomial(recs[i].m1, t);
            recs[i].x2 = s.binomial(recs[i].m2, t);
          }
          return TestCase<BBPairRecord>{Dataset<BBPairRecord>(recs), {n - 1},
                                        NullConstraint::equal()};
        },
        reps, alpha, seed, id);
  } else {
    throw UsageError("validate: unknown scenario '" + scenario + "' for model '" + model +
                     "' (nn: table1, table1-small; pg: table2, table2-small, table3-null, "
                     "point-mass; bb: bb-ci, table4-null, fig2a-null)");
  }
  // the guarantee is judged against the nominal-level binomial noise
  const double se = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(reps));
  if (rep.kind == "coverage") {
    rep.bound = 1.0 - alpha - 4.0 * se;
    rep.violated = rep.estimate.proportion < rep.bound;
  } else {
    rep.bound = alpha + 4.0 * se;
    rep.violated = rep.estimate.proportion > rep.bound;
  }
  return rep;
}

inline int cmd_validate(const Options& o, std::ostream& log) {
  if (o.model.empty() || o.scenario.empty())
    throw UsageError("validate: --model and --scenario are required");
  const auto alphas = detail::alphas_or_default(o);
  const std::size_t reps = o.reps.value_or(1000);
  if (reps < 100)
    throw UsageError("validate: --reps must be >= 100");
  const std::uint64_t seed = o.seed.value_or(1);
  io::CsvTable out;
  out.header = {"model", "scenario", "kind", "alpha", "estimate", "se",
                "reps",  "seed",     "bound", "violated"};
  bool any = false;
  for (double a : alphas) {
    const auto r = run_validity(o.model, o.scenario, a, reps, seed);
    out.rows.push_back({r.model, r.scenario, r.kind, io::fmt(a), io::fmt(r.estimate.proportion),
                        io::fmt(r.estimate.standard_error), std::to_string(reps),
                        std::to_string(seed), io::fmt(r.bound), r.violated ? "1" : "0"});
    log << "fseb validate: " << r.model << "/" << r.scenario << " " << r.kind << " at alpha "
        << io::alpha_label(a) << " = " << io::fmt(r.estimate.proportion) << " (se "
        << io::fmt(r.estimate.standard_error) << ", seed=" << seed << ")"
        << (r.violated ? " VIOLATED" : "") << "\n";
    any = any || r.violated;
  }
  detail::write_output(o, out);
  if (any)
    throw GuaranteeError("validity guarantee violated beyond 4 standard errors");
  return exit_ok;
}

/// Runs `body` and converts any failure into its exit code, reporting on `err`.
inline int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "fseb: error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

} // namespace fseb::cli

#endif
