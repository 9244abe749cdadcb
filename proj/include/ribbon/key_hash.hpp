//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#pragma once

#include "ribbon/config.hpp"

#include <cstdint>
#include <string_view>

namespace ribbon {

// Identifier stored in filter files for the raw-key hash below.
inline constexpr std::uint16_t kKeyHashFnv1aFmix64 = 1;

// FNV-1a 64 over the bytes, then the murmur3 64-bit finalizer.
constexpr KeyHash hash_key(std::string_view key) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : key) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001B3ull;
  }
  h ^= h >> 33;
  h *= 0xFF51AFD7ED558CCDull;
  h ^= h >> 33;
  h *= 0xC4CEB9FE1A85EC53ull;
  h ^= h >> 33;
  return h;
}

}  // namespace ribbon
