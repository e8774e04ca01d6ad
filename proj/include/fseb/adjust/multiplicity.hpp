#ifndef FSEB_ADJUST_MULTIPLICITY_HPP
#define FSEB_ADJUST_MULTIPLICITY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "fseb/engine/confidence_set.hpp"
#include "fseb/error.hpp"

namespace fseb::adjust {

/// Per-index intervals at level alpha / n, jointly valid at level alpha.
struct SimultaneousSet {
  std::vector<IntervalResult> intervals;
  double alpha = 0.05;
  double per_interval_alpha = 0.05;
};

/// Data-dependent selection of indices, applied to the alpha/n intervals.
struct SelectionRule {
  std::function<bool(const IntervalResult&)> predicate;
  std::string description;

  static SelectionRule lower_above(double threshold) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "lower > %.17g", threshold);
    return {[threshold](const IntervalResult& r) { return !r.empty && r.lower > threshold; },
            buf};
  }
  static SelectionRule all() {
    return {[](const IntervalResult&) { return true; }, "all"};
  }
};

struct FcrResult {
  std::vector<std::size_t> selected;
  std::vector<IntervalResult> intervals;   // one per selected index, same order
  double alpha = 0.05;
  double level = 0.05;                     // |I| alpha / n
};

// A Maker is anything with size() and operator()(index, alpha) returning an
// IntervalResult, e.g. fseb::IntervalMaker.
template <class Maker>
SimultaneousSet bonferroni_simultaneous(const Maker& maker, double alpha) {
  check_level(alpha);
  const std::size_t n = maker.size();
  if (n < 3)
    throw InsufficientDataError("Bonferroni set needs n >= 3");
  SimultaneousSet s;
  s.alpha = alpha;
  s.per_interval_alpha = alpha / static_cast<double>(n);
  s.intervals.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    s.intervals.push_back(maker(i, s.per_interval_alpha));
  return s;
}

/// Select on the alpha/n intervals, then report the selected ones at level
/// |I| alpha / n.
template <class Maker>
FcrResult fcr_adjust(const Maker& maker, const SelectionRule& rule, double alpha) {
  const SimultaneousSet bonf = bonferroni_simultaneous(maker, alpha);
  FcrResult out;
  out.alpha = alpha;
  for (std::size_t i = 0; i < bonf.intervals.size(); ++i)
    if (rule.predicate(bonf.intervals[i]))
      out.selected.push_back(i);
  if (out.selected.empty()) {
    out.level = 0.0;
    return out;
  }
  out.level = static_cast<double>(out.selected.size()) * alpha /
              static_cast<double>(bonf.intervals.size());
  for (std::size_t i : out.selected)
    out.intervals.push_back(maker(i, out.level));
  return out;
}

/// Benjamini-Hochberg step-up adjusted p-values, in input order.
inline std::vector<double> bh_adjust(const std::vector<double>& p) {
  if (p.empty())
    throw DomainError("bh_adjust: empty p-value list");
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0))
      throw DomainError("bh_adjust: p-values must lie in [0, 1]");
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> out(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const std::size_t idx = order[k];
    const double v = std::min(1.0, static_cast<double>(m) * p[idx] / static_cast<double>(k + 1));
    running = std::min(running, v);
    // m*p/m can round one ulp below p
    out[idx] = std::max(p[idx], running);
  }
  return out;
}

} // namespace fseb::adjust

#endif
