#pragma once

#include <cstdint>

namespace cdoqae {

/// Stateless counter-based generator: draw `k` of stream `seed` is a pure
/// function of (seed, k), so any partition of the draws across threads
/// reproduces the same sequence.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : seed_(seed) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix(mix(seed_ ^ 0x6a09e667f3bcc909ULL) + counter * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t seed() const { return seed_; }

 private:
  // splitmix64 finalizer
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

}  // namespace cdoqae
