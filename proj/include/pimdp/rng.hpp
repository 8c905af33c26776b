#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace pimdp {

/// SplitMix64 (Steele, Lea, Flood 2014). Fully specified by its 64-bit state,
/// so streams are reproducible across platforms and compilers. Draw helpers
/// below are written out here instead of using <random> distributions, whose
/// output is implementation-defined.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  /// Recorded in traces; bump the suffix if any draw helper changes.
  static constexpr std::string_view kAlgorithm = "splitmix64-v1";

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Unbiased integer in [0, bound). bound must be positive.
  std::uint64_t uniform(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  bool coin() noexcept { return (next() >> 63) != 0; }

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Independent child stream; advances this stream by one draw.
  SplitMix64 split() noexcept { return SplitMix64(next() ^ 0x6a09e667f3bcc909ULL); }

 private:
  std::uint64_t state_;
};

}  // namespace pimdp
