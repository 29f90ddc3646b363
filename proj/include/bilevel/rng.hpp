#pragma once

#include <cmath>
#include <cstdint>

namespace bilevel {

/// Counter-based splittable PRNG (splitmix64). Fully deterministic across
/// platforms, unlike the distributions in <random>.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 bits of mantissa.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Derive an independent stream; hashing keeps streams decorrelated.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 h(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    return h.next();
  }

 private:
  std::uint64_t state_;
};

}  // namespace bilevel
