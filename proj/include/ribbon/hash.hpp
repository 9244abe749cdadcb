//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#pragma once

#include "ribbon/bits.hpp"
#include "ribbon/config.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>

namespace ribbon {

// Pinned multipliers. Changing any of them changes the serialized format
// (see FORMAT.md).
inline constexpr std::uint64_t kSeedMultiplier = 0x9E3779B185EBCA87ull;
inline constexpr std::uint64_t kCoeffMultiplier = 0xC2B2AE3D27D4EB4Full;
inline constexpr std::uint64_t kCoeffHighMultiplier = 0x85EBCA77C2B2AE63ull;
inline constexpr std::uint64_t kFingerprintMultiplier = 0x165667B19E3779F9ull;

// Multiply-high range reduction of a 64-bit hash onto [0, range).
constexpr std::uint64_t fast_range64(std::uint64_t h, std::uint64_t range) {
  return static_cast<std::uint64_t>((static_cast<u128>(h) * range) >> 64);
}

// Re-seeding: XOR with the seed, then an odd multiply. Bijective per seed.
constexpr KeyHash derive_seeded_hash(KeyHash h, std::uint64_t seed) {
  return (h ^ seed) * kSeedMultiplier;
}

// Start row in [0, m - w], taken from the high bits of h. With smash l > 0 the
// hash is reduced onto l - 1 extra positions on each side and clamped, so the
// first and last start carry l times the mass of an interior start.
inline std::size_t start_position(KeyHash h, std::size_t num_starts, unsigned smash) {
  const std::int64_t extra = smash > 0 ? smash - 1 : 0;
  const std::uint64_t widened = num_starts + 2 * static_cast<std::uint64_t>(extra);
  const auto sampled = static_cast<std::int64_t>(fast_range64(h, widened)) - extra;
  const auto last = static_cast<std::int64_t>(num_starts) - 1;
  return static_cast<std::size_t>(std::min(std::max(sampled, std::int64_t{0}), last));
}

inline std::size_t start_position(KeyHash h, const RibbonConfig& cfg) {
  return start_position(h, cfg.num_starts(), cfg.smash);
}

// w pseudo-random bits with bit 0 forced to 1. Narrow rows take the high bits
// of the product. 128-bit rows fold the two halves of a full-width product
// into the upper half; low product bits alone would leave columns of the two
// halves GF(2)-dependent (bit 1 of a*K is linear in bits 0 and 1 of a).
template <typename Row>
constexpr Row coefficient_vector(KeyHash h) {
  const std::uint64_t a = h * kCoeffMultiplier;
  if constexpr (RowTraits<Row>::kBits == 128) {
    const u128 wide = static_cast<u128>(a) * kCoeffHighMultiplier;
    const std::uint64_t b = static_cast<std::uint64_t>(wide) ^ static_cast<std::uint64_t>(wide >> 64);
    return RowTraits<Row>::from64(a, b) | Row{1};
  } else {
    constexpr unsigned kShift = 64 - RowTraits<Row>::kBits;
    return static_cast<Row>(a >> kShift) | Row{1};
  }
}

// Low r bits of the byte-swapped product, so the best-mixed high bits of the
// product land in the low columns. fingerprint(h, r') is a prefix of
// fingerprint(h, r) for r' < r, which is what column dropping relies on.
constexpr std::uint64_t fingerprint(KeyHash h, unsigned r) {
  return __builtin_bswap64(h * kFingerprintMultiplier) & low_mask(r);
}

}  // namespace ribbon
