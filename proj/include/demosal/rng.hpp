#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace demosal {

namespace detail {

// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Stable seed derivation. Every component that forks randomness derives a
/// child seed from its parent seed and a stream index, so results depend only
/// on the master seed and the logical position of the consumer, never on
/// scheduling or call order.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) {
  return detail::mix64(detail::mix64(parent ^ 0x9e3779b97f4a7c15ull) + stream);
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream,
                                 std::uint64_t index) {
  return derive_seed(derive_seed(parent, stream), index);
}

/// Deterministic RNG wrapper. Distributions are implemented here instead of
/// relying on <random> distribution classes, whose output sequences are
/// implementation-defined; this keeps artifacts bit-reproducible across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Unbiased draw from [0, n) by rejection sampling.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t bound = max - max % n;  // largest multiple of n <= max
    std::uint64_t x = next_u64();
    while (x >= bound) x = next_u64();
    return x % n;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (cosine branch only).
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[uniform_int(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace demosal
