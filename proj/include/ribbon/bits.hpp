//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#pragma once

#include <bit>
#include <cstdint>
#include <type_traits>

namespace ribbon {

using u128 = unsigned __int128;

// Bit operations over the coefficient-row word types (16/32/64/128 bits).
template <typename Row>
struct RowTraits {
  static_assert(std::is_unsigned_v<Row> && sizeof(Row) <= 8);
  static constexpr unsigned kBits = 8u * sizeof(Row);

  static constexpr bool parity(Row v) { return std::popcount(v) & 1; }
  static constexpr unsigned popcount(Row v) { return std::popcount(v); }
  static constexpr unsigned ctz(Row v) { return std::countr_zero(v); }
  static constexpr std::uint64_t low64(Row v) { return v; }
  static constexpr std::uint64_t high64(Row) { return 0; }
  static constexpr Row from64(std::uint64_t lo, std::uint64_t) {
    return static_cast<Row>(lo);
  }
};

template <>
struct RowTraits<u128> {
  static constexpr unsigned kBits = 128;

  static constexpr bool parity(u128 v) {
    return (std::popcount(low64(v)) ^ std::popcount(high64(v))) & 1;
  }
  static constexpr unsigned popcount(u128 v) {
    return std::popcount(low64(v)) + std::popcount(high64(v));
  }
  // Low word is scanned first.
  static constexpr unsigned ctz(u128 v) {
    const std::uint64_t lo = low64(v);
    return lo != 0 ? std::countr_zero(lo) : 64 + std::countr_zero(high64(v));
  }
  static constexpr std::uint64_t low64(u128 v) {
    return static_cast<std::uint64_t>(v);
  }
  static constexpr std::uint64_t high64(u128 v) {
    return static_cast<std::uint64_t>(v >> 64);
  }
  static constexpr u128 from64(std::uint64_t lo, std::uint64_t hi) {
    return (static_cast<u128>(hi) << 64) | lo;
  }
};

// Mask with the low `bits` bits set; bits in [0, 64].
constexpr std::uint64_t low_mask(unsigned bits) {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

}  // namespace ribbon
