#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace logopt {

/// Counter-based random generator.
///
/// Every draw is a pure function of (seed, stream, counter), so any draw can
/// be reproduced without replaying the sequence and disjoint streams never
/// collide. Stream assignment used across the library:
///   - Monte Carlo path p          -> stream p
///   - probe/perturbation sampling -> stream 2^62 + k
///   - recession-descent refinement-> stream 2^61 + k
/// Workers may split paths arbitrarily; results do not depend on the split.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : base_(mix(mix(seed + 0x9E3779B97F4A7C15ULL) ^
                  mix(stream * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL))) {}

  std::uint64_t next_u64() { return mix(base_ + (counter_++) * 0x9E3779B97F4A7C15ULL); }

  /// Uniform in the open interval (0, 1); never returns an endpoint.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Exponential interarrival time with the given rate (> 0).
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  /// Index i with probability weights[i] / sum(weights). Weights must be >= 0
  /// with a positive sum.
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

  static constexpr std::uint64_t kProbeStreamBase = 1ULL << 62;
  static constexpr std::uint64_t kDescentStreamBase = 1ULL << 61;

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

/// Inverse of the standard normal CDF (Acklam's rational approximation
/// followed by one Halley refinement; relative error below 1e-14).
double inverse_normal_cdf(double p);

}  // namespace logopt
