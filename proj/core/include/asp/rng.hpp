#pragma once

#include <cstdint>

namespace asp {

/// SplitMix64 (Steele, Lea & Flood) with hand-written uniform and Gaussian
/// conversions, so a given seed yields the same stream on every platform
/// and standard library.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept;

  /// Uniform on [0, 1) with 53 random mantissa bits.
  double uniform01() noexcept;

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept;

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept;

  /// Independent stream derived from a seed and a stream label.
  static SplitMix64 derive(std::uint64_t seed, std::uint64_t stream) noexcept;

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace asp
