//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#include "ribbon/config.hpp"

#include <stdexcept>

namespace ribbon {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kStandard:
      return "standard";
    case Variant::kHomogeneous:
      return "homogeneous";
    case Variant::kBalanced:
      return "balanced";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "standard") return Variant::kStandard;
  if (name == "homogeneous" || name == "homog") return Variant::kHomogeneous;
  if (name == "balanced") return Variant::kBalanced;
  throw std::invalid_argument("unknown variant: " + std::string(name));
}

bool is_supported_width(unsigned w) {
  return w == 16 || w == 32 || w == 64 || w == 128;
}

double RibbonConfig::average_r() const {
  return m == 0 ? 0.0 : static_cast<double>(solution_bits()) / static_cast<double>(m);
}

std::size_t RibbonConfig::solution_bits() const {
  const std::size_t blocks = num_blocks();
  const std::size_t lower = upper_start_block < blocks ? upper_start_block : blocks;
  return w * (blocks * r_lower + (blocks - lower));
}

void RibbonConfig::validate(Layout layout) const {
  if (!is_supported_width(w)) {
    throw std::invalid_argument("ribbon width must be one of 16, 32, 64, 128");
  }
  if (m < w) throw std::invalid_argument("m must be at least w");
  if (m > 0xFFFFFFFFull) throw std::invalid_argument("m must fit in 32 bits");
  if (layout == Layout::kInterleaved && m % w != 0) {
    throw std::invalid_argument("interleaved layout needs m to be a multiple of w");
  }
  if (r_lower < 1 || r_lower > 64) {
    throw std::invalid_argument("r_lower must be in [1, 64]");
  }
  if (upper_start_block > num_blocks()) {
    throw std::invalid_argument("upper_start_block exceeds the number of blocks");
  }
  if (has_upper_blocks() && r_lower == 64) {
    throw std::invalid_argument("at most 64 solution columns are supported");
  }
  if (smash > w / 2) throw std::invalid_argument("smash must not exceed w/2");
}

}  // namespace ribbon
