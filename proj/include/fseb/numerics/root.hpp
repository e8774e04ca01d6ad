#ifndef FSEB_NUMERICS_ROOT_HPP
#define FSEB_NUMERICS_ROOT_HPP

#include <cmath>
#include <concepts>
#include <limits>
#include <utility>

#include "fseb/error.hpp"

namespace fseb::numerics {

struct RootOptions {
  double xtol = 1e-12;   // stop once the bracket is narrower than this
  double ftol = 0.0;     // or once |f(x)| falls to this
  int max_iter = 200;
};

/// Brent's method on a sign-changing bracket [lo, hi].
template <std::invocable<double> F>
double brent_root(F&& f, double lo, double hi, const RootOptions& opt) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  auto eval = [&](double x) {
    const double v = static_cast<double>(f(x));
    if (std::isnan(v))
      throw EvaluationError("brent_root: NaN objective", {x});
    return v;
  };

  double a = lo, b = hi;
  double fa = eval(a), fb = eval(b);
  if (fa == 0.0)
    return a;
  if (fb == 0.0)
    return b;
  if ((fa > 0.0) == (fb > 0.0))
    throw BracketError("brent_root: f(lo) and f(hi) have the same sign", lo, hi);

  double c = b, fc = fb;
  double d = b - a, e = d;
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * opt.xtol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0 || std::abs(fb) <= opt.ftol)
      return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb) &&
        std::isfinite(fa) && std::isfinite(fc)) {
      const double s = fb / fa;
      double p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0)
        q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : std::copysign(tol1, xm);
    fb = eval(b);
  }
  return b;
}

/// Convenience form: the same tolerance on bracket width and on |f|.
template <std::invocable<double> F>
double brent_root(F&& f, double lo, double hi, double tol) {
  if (!(tol > 0.0))
    throw DomainError("brent_root: tol must be positive");
  return brent_root(std::forward<F>(f), lo, hi, RootOptions{tol, tol, 200});
}

} // namespace fseb::numerics

#endif
