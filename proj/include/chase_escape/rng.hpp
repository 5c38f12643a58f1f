// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace chase {

/*
 * Counter-based splittable random stream in the SplitMix64 family (Steele,
 * Lea & Flood, "Fast splittable pseudorandom number generators", OOPSLA'14;
 * finalizer constants from Vigna's public-domain splitmix64.c).
 *
 * Each output is a hash of a Weyl counter, so a stream is a pure function of
 * (state, increment). `for_replica` derives both from (master_seed, index),
 * which makes replica streams independent of scheduling: replica k draws the
 * same sequence no matter which thread runs it or in what order.
 */
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state,
                      std::uint64_t increment = 0x9E3779B97F4A7C15ull)
      : state_(state), increment_(increment | 1ull) {}

  /// Stream for one replica of one experiment. Distinct indices give distinct
  /// Weyl increments, so streams are different sequences, not offsets of one.
  static SplitMix64 for_replica(std::uint64_t master_seed, std::uint64_t index) {
    const std::uint64_t state = mix(master_seed ^ mix(index * 0x9E3779B97F4A7C15ull + 0x632BE59BD9B4E019ull));
    const std::uint64_t increment = mix(mix(master_seed) + index * 0xD1B54A32D192ED03ull);
    return SplitMix64(state, increment);
  }

  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~0ull; }

  std::uint64_t operator()() {
    state_ += increment_;
    return mix(state_);
  }

  /// Uniform double on the half-open interval [0, 1), 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate. log1p keeps small uniforms accurate and
  /// u in [0,1) guarantees a finite result.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Standard normal via Box-Muller.
  double normal() {
    const double radius = std::sqrt(-2.0 * std::log1p(-uniform()));
    return radius * std::cos(6.283185307179586476925287 * uniform());
  }

  /// Gamma(shape, 1) for shape >= 1 by Marsaglia-Tsang squeeze rejection.
  double gamma(double shape) {
    if (!(shape >= 1.0))
      throw std::invalid_argument("gamma sampler requires shape >= 1");
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v;
    }
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
  std::uint64_t increment_;
};

}  // namespace chase
