#ifndef FSEB_NUMERICS_SPECIAL_HPP
#define FSEB_NUMERICS_SPECIAL_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "fseb/error.hpp"

namespace fseb::numerics {

namespace detail {

// Lanczos approximation, g = 7, nine coefficients.
inline constexpr double lanczos_g = 7.0;
inline constexpr std::array<double, 9> lanczos_coef = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

inline double log_gamma_lanczos(double x) {
  // x >= 0.5 here
  const double z = x - 1.0;
  double sum = lanczos_coef[0];
  for (std::size_t i = 1; i < lanczos_coef.size(); ++i)
    sum += lanczos_coef[i] / (z + static_cast<double>(i));
  const double t = z + lanczos_g + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) -
         t + std::log(sum);
}

} // namespace detail

/// Natural log of the gamma function for x > 0.
inline double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError("log_gamma: argument must be positive and finite, got " +
                      std::to_string(x));
  if (x == 1.0 || x == 2.0)
    return 0.0;
  if (x < 0.5) {
    // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) -
           detail::log_gamma_lanczos(1.0 - x);
  }
  return detail::log_gamma_lanczos(x);
}

/// log Gamma(a + x) - log Gamma(a) for a > 0, x >= 0. For large a the two
/// log-gammas are huge and nearly equal, so the difference is taken from the
/// Stirling series term by term instead.
inline double log_rising(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0) || !std::isfinite(a) || !std::isfinite(x))
    throw DomainError("log_rising: need a > 0 and x >= 0");
  if (x == 0.0)
    return 0.0;
  if (a < 50.0)
    return log_gamma(a + x) - log_gamma(a);
  auto corr = [](double z) {
    const double r = 1.0 / z;
    const double r2 = r * r;
    return r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)));
  };
  const double z = a + x;
  return (a - 0.5) * std::log1p(x / a) + x * std::log(z) - x + (corr(z) - corr(a));
}

/// log B(a, b) = log Gamma(a) + log Gamma(b) - log Gamma(a + b).
inline double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw DomainError("log_beta: arguments must be positive");
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

/// Generalized log binomial coefficient log C(n, k) for real n >= k >= 0.
inline double log_binom(double n, double k) {
  if (!(k >= 0.0) || !(n >= k))
    throw DomainError("log_binom: need n >= k >= 0");
  if (k == 0.0 || k == n)
    return 0.0;
  return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
}

/// x * log(y) with the convention 0 * log(0) = 0.
inline double xlogy(double x, double y) {
  if (x == 0.0)
    return 0.0;
  return x * std::log(y);
}

inline double log_normal_pdf(double x, double mean, double variance) {
  if (!(variance > 0.0))
    throw DomainError("log_normal_pdf: variance must be positive");
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) +
                 d * d / variance);
}

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Two-sided tail P(|Z| >= |z|).
inline double normal_two_sided_p(double z) {
  return std::erfc(std::abs(z) / std::numbers::sqrt2);
}

/// Standard normal quantile. Acklam's rational approximation followed by one
/// Halley step against erfc, giving full double precision.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("normal_quantile: p must lie in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

} // namespace fseb::numerics

#endif
