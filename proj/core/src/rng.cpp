#include "asp/rng.hpp"

#include <cmath>
#include <numbers>

namespace asp {

std::uint64_t SplitMix64::next() noexcept {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform01() noexcept {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::uniform(double lo, double hi) noexcept {
  return lo + (hi - lo) * uniform01();
}

double SplitMix64::normal() noexcept {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // 1 − u keeps the logarithm argument in (0, 1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

SplitMix64 SplitMix64::derive(std::uint64_t seed, std::uint64_t stream) noexcept {
  SplitMix64 mixer(seed ^ (stream * 0xD1B54A32D192ED03ULL));
  return SplitMix64(mixer.next());
}

}  // namespace asp
