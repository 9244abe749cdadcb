//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#pragma once

#include "ribbon/filter.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ribbon {

inline constexpr char kFileMagic[4] = {'R', 'I', 'B', 'N'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderBytes = 48;

// Malformed or truncated filter file; offset is where decoding stopped.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Byte layout is documented in FORMAT.md.
std::vector<std::uint8_t> serialize(const Filter& filter,
                                    std::uint16_t key_hash_id = 1);
Filter deserialize(std::span<const std::uint8_t> bytes, std::uint16_t* key_hash_id = nullptr);

void save_filter(const Filter& filter, const std::filesystem::path& path,
                 std::uint16_t key_hash_id = 1);
Filter load_filter(const std::filesystem::path& path, std::uint16_t* key_hash_id = nullptr);

}  // namespace ribbon
