#ifndef FSEB_NUMERICS_QUADRATURE_HPP
#define FSEB_NUMERICS_QUADRATURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <limits>
#include <queue>
#include <vector>

#include "fseb/error.hpp"

namespace fseb::numerics {

struct QuadratureOptions {
  double rel_tol = 1e-12;
  double abs_tol = 0.0;
  std::size_t max_subdivisions = 4000;
  // Semi-infinite ranges are cut where the integrand drops below
  // tail_ratio times the largest value seen so far.
  double tail_ratio = 1e-16;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> gk15_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> gk15_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss7_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double lo, hi, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * gk15_weights[7];
  double gauss = fc * gauss7_weights[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * gk15_nodes[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    kronrod += gk15_weights[j] * (f1 + f2);
    if (j % 2 == 1)
      gauss += gauss7_weights[j / 2] * (f1 + f2);
  }
  const double value = kronrod * half;
  const double error = std::abs((kronrod - gauss) * half);
  if (!std::isfinite(value))
    throw EvaluationError("quadrature: non-finite integrand", {lo, hi});
  return {lo, hi, value, error};
}

template <class F>
double adaptive_gk(F& f, double lo, double hi, const QuadratureOptions& opt) {
  std::priority_queue<Segment> work;
  Segment first = gk15(f, lo, hi);
  double total = first.value;
  double total_err = first.error;
  work.push(first);
  std::size_t splits = 0;
  while (total_err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (splits >= opt.max_subdivisions)
      throw AccuracyError("quadrature: subdivision limit reached", total, total_err);
    Segment worst = work.top();
    work.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      // interval below machine resolution: accept what we have
      if (total_err <= 1e3 * std::max(opt.abs_tol, opt.rel_tol * std::abs(total)))
        break;
      throw AccuracyError("quadrature: interval collapsed", total, total_err);
    }
    Segment left = gk15(f, worst.lo, mid);
    Segment right = gk15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    work.push(left);
    work.push(right);
    ++splits;
  }
  // recompute to shed accumulated rounding from the running updates
  double sum = 0.0;
  while (!work.empty()) {
    sum += work.top().value;
    work.pop();
  }
  return sum;
}

} // namespace detail

/// Adaptive Gauss-Kronrod (7/15) integration. Either endpoint may be
/// infinite; the infinite side is truncated once the integrand becomes
/// negligible and the cutoff is doubled until the added tail stops mattering.
template <std::invocable<double> F>
double quadrature(F&& f, double lo, double hi, const QuadratureOptions& opt = {}) {
  if (std::isnan(lo) || std::isnan(hi))
    throw DomainError("quadrature: NaN limit");
  if (lo == hi)
    return 0.0;
  if (lo > hi)
    return -quadrature(f, hi, lo, opt);

  auto g = [&](double x) { return static_cast<double>(f(x)); };
  const bool lo_inf = std::isinf(lo);
  const bool hi_inf = std::isinf(hi);
  if (!lo_inf && !hi_inf)
    return detail::adaptive_gk(g, lo, hi, opt);

  if (lo_inf && hi_inf) {
    return quadrature(f, -std::numeric_limits<double>::infinity(), 0.0, opt) +
           quadrature(f, 0.0, std::numeric_limits<double>::infinity(), opt);
  }

  // reflect so that the infinite side is always the upper one
  const double sign = hi_inf ? 1.0 : -1.0;
  const double anchor = hi_inf ? lo : hi;
  auto h = [&](double t) { return g(anchor + sign * t); };

  // Integrate over the shells [0, 1], [1, 2], [2, 4], ... A shell is
  // scanned before it is accepted as negligible, so a narrow bump far from
  // the anchor is not stepped over while the integrand is still zero.
  double peak = 0.0;
  double total = 0.0;
  double lo_edge = 0.0;
  double width = 1.0;
  int quiet = 0;
  while (std::isfinite(width)) {
    double shell_peak = 0.0;
    for (int j = 0; j <= 32; ++j)
      shell_peak = std::max(shell_peak, std::abs(h(lo_edge + (width - lo_edge) * j / 32.0)));
    peak = std::max(peak, shell_peak);
    const double part = detail::adaptive_gk(h, lo_edge, width, opt);
    total += part;
    const bool small = peak > 0.0 && shell_peak <= opt.tail_ratio * peak &&
                       std::abs(part) <= std::max(opt.abs_tol, 1e-3 * opt.rel_tol * std::abs(total));
    quiet = small ? quiet + 1 : 0;
    if (quiet >= 2)
      return total;
    lo_edge = width;
    width *= 2.0;
  }
  throw AccuracyError("quadrature: integrand does not decay", total,
                      std::numeric_limits<double>::infinity());
}

} // namespace fseb::numerics

#endif
