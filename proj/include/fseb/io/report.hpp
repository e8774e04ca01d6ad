#ifndef FSEB_IO_REPORT_HPP
#define FSEB_IO_REPORT_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fseb/io/csv.hpp"
#include "fseb/simlab/runs.hpp"

namespace fseb::io {

inline const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> cols = {
      "scenario_id", "model",       "n",        "hyper",           "delta",
      "alpha",       "coverage_or_rejection",   "mean_width",      "rel_width",
      "empty_ct",    "uncomputable_ct",         "se",              "reps",
      "seed"};
  return cols;
}

inline CsvTable summary_table(const std::vector<simlab::SummaryRow>& rows) {
  CsvTable t;
  t.header = summary_columns();
  for (const auto& r : rows) {
    t.rows.push_back({r.scenario_id, r.model, std::to_string(r.n), r.hyper, fmt(r.delta),
                      fmt(r.alpha), fmt(r.proportion), fmt(r.mean_width), fmt(r.rel_width),
                      std::to_string(r.empty_ct), std::to_string(r.uncomputable_ct), fmt(r.se),
                      std::to_string(r.reps), std::to_string(r.seed)});
    t.lines.push_back(t.rows.size() + 1);
  }
  return t;
}

inline void write_summary_csv(std::ostream& out, const std::vector<simlab::SummaryRow>& rows) {
  write_csv(out, summary_table(rows));
}

/// Reads a summary CSV back. Counts that the CSV does not carry (hits,
/// trials) are left at zero.
inline std::vector<simlab::SummaryRow> parse_summary(const CsvTable& t) {
  require_header(t, summary_columns());
  auto opt = [&](std::size_t row, std::size_t col) -> std::optional<double> {
    if (t.rows[row][col].empty())
      return std::nullopt;
    return parse_double(t, row, col);
  };
  auto num = [&](std::size_t row, std::size_t col) {
    const std::string& s = t.rows[row][col];
    return s == "nan" ? std::nan("") : parse_double(t, row, col);
  };
  std::vector<simlab::SummaryRow> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    simlab::SummaryRow r;
    r.scenario_id = t.rows[i][0];
    r.model = t.rows[i][1];
    r.n = static_cast<std::size_t>(parse_int(t, i, 2));
    r.hyper = t.rows[i][3];
    r.delta = parse_double(t, i, 4);
    r.alpha = parse_double(t, i, 5);
    r.proportion = num(i, 6);
    r.mean_width = opt(i, 7);
    r.rel_width = opt(i, 8);
    r.empty_ct = static_cast<std::size_t>(parse_int(t, i, 9));
    r.uncomputable_ct = static_cast<std::size_t>(parse_int(t, i, 10));
    r.se = parse_double(t, i, 11);
    r.reps = static_cast<std::size_t>(parse_int(t, i, 12));
    r.seed = parse_uint(t, i, 13);
    out.push_back(std::move(r));
  }
  return out;
}

/// Per-site log statistics of the null scatter, one row per (rep, site).
inline CsvTable scatter_table(const simlab::NullScatter& s) {
  CsvTable t;
  t.header = {"rep", "site", "theta", "log_T"};
  for (const auto& p : s.points) {
    t.rows.push_back({std::to_string(p.rep), std::to_string(p.site), fmt(p.theta),
                      fmt(p.log_T)});
    t.lines.push_back(t.rows.size() + 1);
  }
  return t;
}

} // namespace fseb::io

#endif
