#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "rtbust/errors.hpp"

namespace rtbust {

/// Mixes a 64-bit value (splitmix64 finalizer). Used to derive independent
/// substream seeds from one master seed so per-account generation stays
/// reproducible regardless of generation order.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(master ^ mix64(stream));
}

/// Deterministic random source. The engine (mt19937_64) is fully specified by
/// the standard; the distribution transforms are implemented here instead of
/// relying on std:: distributions, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  Rng fork(std::uint64_t stream) { return Rng(derive_seed(engine_(), stream)); }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [lo, hi], inclusive. Unbiased via rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw ConfigError("uniform_int: empty range");
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(next_u64());  // full span
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % range);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % range);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    if (!have_spare_) {
      double u1 = uniform01();
      double u2 = uniform01();
      while (u1 <= 0.0) u1 = uniform01();
      const double r = std::sqrt(-2.0 * std::log(u1));
      const double a = 2.0 * M_PI * u2;
      spare_ = r * std::sin(a);
      have_spare_ = true;
      return mean + stddev * r * std::cos(a);
    }
    have_spare_ = false;
    return mean + stddev * spare_;
  }

  /// Log-normal parameterized by its median: exp of N(ln(median), sigma_log^2).
  double lognormal_median(double median, double sigma_log) {
    return std::exp(normal(std::log(median), sigma_log));
  }

  double exponential(double rate) {
    double u = uniform01();
    while (u <= 0.0) u = uniform01();
    return -std::log(u) / rate;
  }

  /// Poisson count by summing unit-rate exponential gaps; avoids the
  /// exp(-lambda) underflow of the product method for large means.
  std::int64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::int64_t k = 0;
    double acc = exponential(1.0);
    while (acc <= mean) {
      ++k;
      acc += exponential(1.0);
    }
    return k;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rtbust
