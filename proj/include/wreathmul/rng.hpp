#pragma once

#include <cstdint>

namespace wreathmul {

/// Counter-based generator: value(i) depends only on (seed, stream, i), so
/// experiment trials replicate across platforms and thread counts. The mixer
/// is splitmix64 applied to the keyed counter.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ (0x9e3779b97f4a7c15ull * (stream + 1)))) {}

  std::uint64_t bits(std::uint64_t counter) const { return mix(key_ ^ mix(counter + 1)); }

  /// Uniform on [0,1), 53 random bits.
  double uniform01(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1p-53;
  }

  /// Uniform on [-1,1).
  double uniform_pm1(std::uint64_t counter) const { return 2.0 * uniform01(counter) - 1.0; }

  /// Sequential convenience interface.
  std::uint64_t next_bits() { return bits(n_++); }
  double next_uniform01() { return uniform01(n_++); }
  double next_pm1() { return uniform_pm1(n_++); }
  /// Uniform integer in [0, bound).
  std::uint64_t next_below(std::uint64_t bound) { return next_bits() % bound; }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t key_;
  std::uint64_t n_ = 0;
};

}  // namespace wreathmul
