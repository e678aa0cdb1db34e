#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tpd {

/// SplitMix64 finaliser; used to derive independent sub-seeds so results do
/// not depend on the order in which parallel work is scheduled.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0x2545f4914f6cdd1dULL));
}

/// Uniform integer in [0, n) by rejection; unlike std::uniform_int_distribution
/// the sequence is the same on every standard library.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

/// Uniform double in (0, 1) from the top 53 bits.
inline double uniform_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw (Box-Muller, one value per call).
inline double gaussian(std::mt19937_64& rng) {
  const double r = std::sqrt(-2.0 * std::log(uniform_open(rng)));
  return r * std::cos(6.283185307179586 * uniform_open(rng));
}

}  // namespace tpd
