#pragma once

#include <atomic>
#include <cstdint>

namespace wreathmul::flops {

// Complex-scalar operation tally. Incremented in bulk at kernel granularity
// (one atomic add per inner loop, not per scalar op), so it is cheap enough
// to leave on permanently. A complex multiply counts 1, a complex add/sub
// counts 1; index arithmetic and data movement count 0.

struct Count {
  std::uint64_t adds = 0;
  std::uint64_t muls = 0;
  std::uint64_t total() const { return adds + muls; }
  Count operator-(const Count& o) const { return {adds - o.adds, muls - o.muls}; }
  Count operator+(const Count& o) const { return {adds + o.adds, muls + o.muls}; }
};

namespace detail {
inline std::atomic<std::uint64_t> g_adds{0};
inline std::atomic<std::uint64_t> g_muls{0};
}  // namespace detail

inline void add(std::uint64_t n) { detail::g_adds.fetch_add(n, std::memory_order_relaxed); }
inline void mul(std::uint64_t n) { detail::g_muls.fetch_add(n, std::memory_order_relaxed); }

inline Count snapshot() {
  return {detail::g_adds.load(std::memory_order_relaxed),
          detail::g_muls.load(std::memory_order_relaxed)};
}

inline void reset() {
  detail::g_adds.store(0, std::memory_order_relaxed);
  detail::g_muls.store(0, std::memory_order_relaxed);
}

}  // namespace wreathmul::flops
