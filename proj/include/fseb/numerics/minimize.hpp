#ifndef FSEB_NUMERICS_MINIMIZE_HPP
#define FSEB_NUMERICS_MINIMIZE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "fseb/error.hpp"

namespace fseb::numerics {

struct MinimizeResult {
  std::vector<double> argmin;
  double min = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  double xtol = 1e-10;          // simplex diameter
  double ftol = 1e-12;          // spread of vertex values
  double initial_step = 0.5;
  std::size_t max_evals = 20000;
  int restarts = 1;             // re-seed a fresh simplex at the optimum
};

namespace detail {

template <class F>
double checked_eval(F& f, std::span<const double> x, std::size_t& count) {
  ++count;
  const double v = f(x);
  if (!std::isfinite(v))
    throw EvaluationError("minimize: non-finite objective",
                          std::vector<double>(x.begin(), x.end()));
  return v;
}

template <class F>
MinimizeResult nelder_mead_once(F& f, std::vector<double> start,
                                const NelderMeadOptions& opt,
                                std::size_t& evals) {
  const std::size_t dim = start.size();
  std::vector<std::vector<double>> simplex(dim + 1, start);
  for (std::size_t i = 0; i < dim; ++i) {
    const double step = std::max(opt.initial_step, 0.1 * std::abs(start[i]));
    simplex[i + 1][i] += step;
  }
  std::vector<double> values(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i)
    values[i] = checked_eval(f, simplex[i], evals);

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim), trial(dim), trial2(dim);
  auto blend = [&](double t, std::vector<double>& out,
                   const std::vector<double>& worst) {
    for (std::size_t j = 0; j < dim; ++j)
      out[j] = centroid[j] + t * (worst[j] - centroid[j]);
  };

  bool converged = false;
  while (evals < opt.max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[dim - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
    if (diameter <= opt.xtol && values[worst] - values[best] <= opt.ftol) {
      converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == worst)
        continue;
      for (std::size_t j = 0; j < dim; ++j)
        centroid[j] += simplex[i][j] / static_cast<double>(dim);
    }

    blend(-1.0, trial, simplex[worst]);
    const double fr = checked_eval(f, trial, evals);
    if (fr < values[best]) {
      blend(-2.0, trial2, simplex[worst]);
      const double fe = checked_eval(f, trial2, evals);
      if (fe < fr) {
        simplex[worst] = trial2;
        values[worst] = fe;
      } else {
        simplex[worst] = trial;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second_worst]) {
      simplex[worst] = trial;
      values[worst] = fr;
      continue;
    }
    // contraction, outside if the reflection improved on the worst point
    const bool outside = fr < values[worst];
    blend(outside ? -0.5 : 0.5, trial2, simplex[worst]);
    const double fc = checked_eval(f, trial2, evals);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = trial2;
      values[worst] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == best)
        continue;
      for (std::size_t j = 0; j < dim; ++j)
        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      values[i] = checked_eval(f, simplex[i], evals);
    }
  }
  const auto best = static_cast<std::size_t>(
      std::min_element(values.begin(), values.end()) - values.begin());
  return {simplex[best], values[best], evals, converged};
}

} // namespace detail

/// Nelder-Mead simplex search. The objective takes a span of coordinates.
template <class F>
MinimizeResult nelder_mead(F&& f, std::vector<double> init,
                           const NelderMeadOptions& opt = {}) {
  if (init.empty())
    throw DomainError("nelder_mead: empty starting point");
  std::size_t evals = 0;
  auto result = detail::nelder_mead_once(f, std::move(init), opt, evals);
  for (int r = 0; r < opt.restarts; ++r) {
    auto again = detail::nelder_mead_once(f, result.argmin, opt, evals);
    if (again.min <= result.min)
      result = std::move(again);
  }
  result.evaluations = evals;
  return result;
}

/// Brent's derivative-free minimizer on [lo, hi].
template <std::invocable<double> F>
MinimizeResult brent_minimize(F&& f, double lo, double hi, double tol = 1e-10,
                              int max_iter = 500) {
  constexpr double golden = 0.3819660112501051;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::size_t evals = 0;
  auto eval = [&](double x) {
    ++evals;
    const double v = f(x);
    if (!std::isfinite(v))
      throw EvaluationError("brent_minimize: non-finite objective", {x});
    return v;
  };
  double a = std::min(lo, hi), b = std::max(lo, hi);
  double x = a + golden * (b - a), w = x, v = x;
  double fx = eval(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  bool converged = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double xm = 0.5 * (a + b);
    const double tol1 = std::sqrt(eps) * std::abs(x) + tol / 3.0;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) {
      converged = true;
      break;
    }
    bool golden_step = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0)
        p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2)
          d = std::copysign(tol1, xm - x);
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x >= xm) ? a - x : b - x;
      d = golden * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + std::copysign(tol1, d);
    const double fu = eval(u);
    if (fu <= fx) {
      if (u >= x)
        a = x;
      else
        b = x;
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      if (u < x)
        a = u;
      else
        b = u;
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }
  return {{x}, fx, evals, converged};
}

/// General entry point: 1-D problems bracket outward from the start and use
/// Brent; higher dimensions use Nelder-Mead with one restart.
template <class F>
MinimizeResult minimize(F&& f, std::vector<double> init, double tol) {
  if (!(tol > 0.0))
    throw DomainError("minimize: tol must be positive");
  if (init.size() == 1) {
    std::vector<double> point(1);
    auto g = [&](double x) {
      point[0] = x;
      return static_cast<double>(f(std::span<const double>(point)));
    };
    // golden expansion until the middle point is lowest
    double a = init[0];
    double step = std::max(1.0, std::abs(a)) * 0.1;
    double b = a + step;
    double fa = g(a), fb = g(b);
    if (fb > fa) {
      std::swap(a, b);
      std::swap(fa, fb);
    }
    double c = b + 1.618034 * (b - a);
    double fc = g(c);
    int guard = 0;
    while (fc < fb) {
      if (++guard > 200)
        throw FitError("minimize: no bracket found, objective may be unbounded");
      a = b;
      fa = fb;
      b = c;
      fb = fc;
      c = b + 1.618034 * (b - a);
      fc = g(c);
    }
    auto r = brent_minimize(g, std::min(a, c), std::max(a, c), tol);
    return r;
  }
  NelderMeadOptions opt;
  opt.xtol = tol;
  opt.ftol = tol * tol;
  return nelder_mead(std::forward<F>(f), std::move(init), opt);
}

} // namespace fseb::numerics

#endif
