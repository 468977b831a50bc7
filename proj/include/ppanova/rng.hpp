#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace ppanova {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from (seed, stream). Used everywhere a
/// replicate, restart or chain needs its own reproducible stream, so results
/// never depend on thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s = stream ^ 0xD1B54A32D192ED03ULL;
  std::uint64_t b = splitmix64(s);
  s = a ^ (b + 0x9E3779B97F4A7C15ULL);
  return splitmix64(s);
}

/// xoshiro256++ with hand-rolled distributions. All sampling in this project
/// goes through this class: identical seeds give identical draws independent
/// of the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 1) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
  }

  Rng child(std::uint64_t stream) const {
    return Rng(derive_seed(state_[0] ^ state_[2], stream));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Debiased multiply-shift (Lemire).
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      const std::uint64_t threshold = (0ULL - bound) % bound;
      while (lo < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  double normal(double mean = 0.0, double sd = 1.0) {
    // Marsaglia polar method; second deviate discarded to keep the stream
    // position independent of call history.
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return mean + sd * u * std::sqrt(-2.0 * std::log(s) / s);
  }

  long poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda < 10.0) return poisson_inversion(lambda);
    return poisson_ptrs(lambda);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  long poisson_inversion(double lambda) {
    double p = std::exp(-lambda);
    double f = p;
    long k = 0;
    const double u = uniform();
    while (u > f) {
      ++k;
      p *= lambda / static_cast<double>(k);
      f += p;
      if (k > 1000000) break;
    }
    return k;
  }

  // Transformed rejection with squeeze (Hoermann's PTRS), exact for large
  // means where sequential inversion would underflow.
  long poisson_ptrs(double lambda) {
    const double log_lambda = std::log(lambda);
    const double b = 0.931 + 2.53 * std::sqrt(lambda);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::abs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      const double k = kf;
      if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
          k * log_lambda - lambda - std::lgamma(k + 1.0)) {
        return static_cast<long>(kf);
      }
    }
  }

  std::uint64_t state_[4];
};

}  // namespace ppanova
