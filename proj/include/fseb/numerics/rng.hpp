#ifndef FSEB_NUMERICS_RNG_HPP
#define FSEB_NUMERICS_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>

#include "fseb/error.hpp"
#include "fseb/numerics/special.hpp"

namespace fseb::numerics {

/// Philox-4x32-10 block function (Salmon et al., counter-based).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// FNV-1a; stable across platforms and runs, unlike std::hash.
inline std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Stream index for replication `rep` of the scenario named `scenario_id`.
inline std::uint64_t stream_index_for(std::string_view scenario_id, std::uint64_t rep) {
  return splitmix64(stable_hash(scenario_id) ^ splitmix64(rep));
}

/// Deterministic random stream. (base_seed, stream_index) fixes the whole
/// sequence; the stream index occupies the upper half of the Philox counter,
/// so distinct indices never share a block. Copying a stream copies its
/// position.
class RngStream {
public:
  RngStream(std::uint64_t base_seed, std::uint64_t stream_index)
      : seed_(base_seed), stream_(stream_index) {}

  [[nodiscard]] std::uint64_t base_seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream_index() const { return stream_; }

  std::uint32_t next_u32() {
    if (used_ == 4) {
      const std::array<std::uint32_t, 4> ctr = {
          static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
          static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
      const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                                static_cast<std::uint32_t>(seed_ >> 32)};
      buffer_ = philox4x32(ctr, key);
      ++block_;
      used_ = 0;
    }
    return buffer_[used_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    if (!(lo <= hi))
      throw DomainError("uniform: need lo <= hi");
    return lo + (hi - lo) * uniform();
  }

  /// Integer uniform on [lo, hi] inclusive, by rejection (no modulo bias).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo)
      throw DomainError("uniform_int: need lo <= hi");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0)
      return static_cast<std::int64_t>(next_u64());
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return lo + static_cast<std::int64_t>(r % span);
  }

  double normal(double mean = 0.0, double variance = 1.0) {
    if (!(variance > 0.0))
      throw DomainError("normal: variance must be positive");
    const double u1 = uniform();
    const double u2 = uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + std::sqrt(variance) * z;
  }

  /// Gamma with the given shape and rate (mean shape / rate).
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
      throw DomainError("gamma: shape and rate must be positive");
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    // Marsaglia-Tsang
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x)
        return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v / rate;
    }
  }

  std::int64_t poisson(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw DomainError("poisson: lambda must be finite and >= 0");
    if (lambda == 0.0)
      return 0;
    if (lambda < 10.0) {
      // sequential inversion
      double p = std::exp(-lambda);
      double cdf = p;
      const double u = uniform();
      std::int64_t k = 0;
      while (u > cdf) {
        ++k;
        p *= lambda / static_cast<double>(k);
        cdf += p;
        if (p <= 0.0 && cdf < u)
          break;
      }
      return k;
    }
    // PTRS, Hormann (1993)
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::abs(u);
      const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + lambda + 0.43));
      if (us >= 0.07 && v <= vr)
        return k;
      if (k < 0 || (us < 0.013 && v > us))
        continue;
      if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
          -lambda + static_cast<double>(k) * loglam - log_gamma(static_cast<double>(k) + 1.0))
        return k;
    }
  }

  double beta(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
      throw DomainError("beta: parameters must be positive");
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
  }

  std::int64_t binomial(std::int64_t trials, double p) {
    if (trials < 0 || !(p >= 0.0 && p <= 1.0))
      throw DomainError("binomial: need trials >= 0 and p in [0, 1]");
    if (trials == 0 || p == 0.0)
      return 0;
    if (p == 1.0)
      return trials;
    if (p > 0.5)
      return trials - binomial(trials, 1.0 - p);
    if (static_cast<double>(trials) * p < 30.0) {
      // inversion with the pmf recurrence
      const double q = 1.0 - p;
      const double r = p / q;
      const double g = r * static_cast<double>(trials + 1);
      double f = std::pow(q, static_cast<double>(trials));
      double u = uniform();
      std::int64_t k = 0;
      while (u > f && k < trials) {
        u -= f;
        ++k;
        f *= g / static_cast<double>(k) - r;
      }
      return k;
    }
    // Knuth's beta split: the a-th order statistic of `trials` uniforms
    const std::int64_t a = 1 + trials / 2;
    const std::int64_t b = trials + 1 - a;
    const double x = beta(static_cast<double>(a), static_cast<double>(b));
    if (x >= p)
      return binomial(a - 1, p / x);
    return a + binomial(b - 1, (p - x) / (1.0 - x));
  }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

} // namespace fseb::numerics

#endif
