//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace ribbon {

// Avalanche-quality 64-bit hash of a key. The library never sees raw keys.
using KeyHash = std::uint64_t;

enum class Variant : std::uint8_t { kStandard = 0, kHomogeneous = 1, kBalanced = 2 };

enum class Layout : std::uint8_t { kColumnMajor = 0, kInterleaved = 1 };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

// All construction parameters of one ribbon system.
//
// Rows are grouped into blocks of `w` rows. Blocks before `upper_start_block`
// store `r_lower` solution columns, the remaining blocks store `r_lower + 1`,
// which realizes a fractional number of bits per key. For integral r,
// upper_start_block == num_blocks().
struct RibbonConfig {
  std::size_t m = 0;
  unsigned w = 64;
  unsigned r_lower = 7;
  std::size_t upper_start_block = 0;
  unsigned smash = 0;
  std::uint64_t seed = 0;
  Variant variant = Variant::kStandard;

  std::size_t num_blocks() const { return (m + w - 1) / w; }
  std::size_t num_starts() const { return m - w + 1; }
  bool has_upper_blocks() const { return upper_start_block < num_blocks(); }
  // Width of right-hand sides kept during banding (ceil of fractional r).
  unsigned r_upper() const { return r_lower + (has_upper_blocks() ? 1 : 0); }
  unsigned columns_of_block(std::size_t block) const {
    return r_lower + (block >= upper_start_block ? 1 : 0);
  }
  // Average solution bits per row.
  double average_r() const;
  // Total solution bits across all blocks.
  std::size_t solution_bits() const;

  // Throws std::invalid_argument when an invariant is violated. `layout`
  // decides whether m must be a multiple of w.
  void validate(Layout layout = Layout::kInterleaved) const;

  friend bool operator==(const RibbonConfig&, const RibbonConfig&) = default;
};

bool is_supported_width(unsigned w);

}  // namespace ribbon
