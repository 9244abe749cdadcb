//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#pragma once

#include "ribbon/banding.hpp"
#include "ribbon/bits.hpp"
#include "ribbon/config.hpp"
#include "ribbon/hash.hpp"

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ribbon {

inline constexpr std::uint64_t kFreeVariableMultiplier = 0xD6E8FEB86659FD93ull;

// How rows of Z without a pivot equation are initialized.
class FreeVariablePolicy {
 public:
  enum class Kind : std::uint8_t { kZeros, kOddMultiple, kRandom };

  static FreeVariablePolicy zeros() { return {Kind::kZeros, 0}; }
  // Row i gets (p * i) mod 2^r.
  static FreeVariablePolicy odd_multiple(std::uint64_t p = kFreeVariableMultiplier) {
    if ((p & 1) == 0) throw std::invalid_argument("free-variable multiplier must be odd");
    return {Kind::kOddMultiple, p};
  }
  static FreeVariablePolicy random(std::uint64_t seed) { return {Kind::kRandom, seed}; }

  Kind kind() const { return kind_; }
  std::uint64_t parameter() const { return param_; }

  std::uint64_t value(std::size_t row) const {
    switch (kind_) {
      case Kind::kZeros:
        return 0;
      case Kind::kOddMultiple:
        return param_ * row;
      case Kind::kRandom: {
        // splitmix64 finalizer
        std::uint64_t z = param_ + (row + 1) * 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
      }
    }
    return 0;
  }

 private:
  FreeVariablePolicy(Kind kind, std::uint64_t param) : kind_(kind), param_(param) {}

  Kind kind_;
  std::uint64_t param_;
};

// The solved matrix Z, immutable after construction.
//
// Both layouts address w-bit words by (block, column): bit t of word (k, j)
// is Z[k*w + t][j]. Interleaved column-major (ICML) stores the words of
// block k contiguously at base(k) = k*r_lower + max(0, k - upper_start_block).
// Plain column-major stores column j as num_blocks consecutive words and
// always keeps r_upper columns, zeroing the column a lower block drops.
template <typename Row>
class SolutionStorage {
 public:
  using Word = Row;
  using Traits = RowTraits<Row>;
  static constexpr unsigned kWidth = Traits::kBits;

  SolutionStorage() = default;

  SolutionStorage(Layout layout, std::size_t m, unsigned r_lower,
                  std::size_t upper_start_block, std::vector<Row> words)
      : layout_(layout),
        m_(m),
        r_lower_(r_lower),
        upper_start_block_(upper_start_block),
        words_(std::move(words)) {
    if (words_.size() != expected_words()) {
      throw std::invalid_argument("solution word count does not match geometry");
    }
  }

  static SolutionStorage zeroed(Layout layout, std::size_t m, unsigned r_lower,
                                std::size_t upper_start_block) {
    SolutionStorage s;
    s.layout_ = layout;
    s.m_ = m;
    s.r_lower_ = r_lower;
    s.upper_start_block_ = upper_start_block;
    s.words_.assign(s.expected_words(), Row{0});
    return s;
  }

  Layout layout() const { return layout_; }
  std::size_t m() const { return m_; }
  unsigned w() const { return kWidth; }
  unsigned r_lower() const { return r_lower_; }
  std::size_t upper_start_block() const { return upper_start_block_; }
  std::size_t num_blocks() const { return (m_ + kWidth - 1) / kWidth; }
  bool has_upper_blocks() const { return upper_start_block_ < num_blocks(); }
  unsigned r_upper() const { return r_lower_ + (has_upper_blocks() ? 1 : 0); }
  unsigned columns_of_block(std::size_t block) const {
    return r_lower_ + (block >= upper_start_block_ ? 1 : 0);
  }
  std::size_t block_base(std::size_t block) const {
    return block * r_lower_ + (block > upper_start_block_ ? block - upper_start_block_ : 0);
  }
  const std::vector<Row>& words() const { return words_; }

  Row word(std::size_t block, unsigned column) const {
    if (layout_ == Layout::kInterleaved) return words_[block_base(block) + column];
    return words_[column * num_blocks() + block];
  }
  Row& word(std::size_t block, unsigned column) {
    if (layout_ == Layout::kInterleaved) return words_[block_base(block) + column];
    return words_[column * num_blocks() + block];
  }

  // Bit j of the result is parity(coeff & Z[start, start + w)[j]). Only
  // columns_of_block(start / w) bits are produced.
  std::uint64_t retrieve(std::size_t start, Row coeff) const {
    assert(start + kWidth <= m_);
    const std::size_t block = start / kWidth;
    const unsigned offset = start % kWidth;
    const unsigned cols = columns_of_block(block);
    std::uint64_t result = 0;
    for (unsigned j = 0; j < cols; ++j) {
      result |= std::uint64_t{Traits::parity(coeff & window(block, offset, j))} << j;
    }
    return result;
  }

  // True iff retrieve(start, coeff) equals `expected` on the available
  // columns. Exits at the first mismatching column when more than four
  // columns are in play; the answer is the same either way.
  bool matches(std::size_t start, Row coeff, std::uint64_t expected) const {
    assert(start + kWidth <= m_);
    const std::size_t block = start / kWidth;
    const unsigned offset = start % kWidth;
    const unsigned cols = columns_of_block(block);
    if (cols <= 4) {
      std::uint64_t result = 0;
      for (unsigned j = 0; j < cols; ++j) {
        result |= std::uint64_t{Traits::parity(coeff & window(block, offset, j))} << j;
      }
      return result == (expected & low_mask(cols));
    }
    for (unsigned j = 0; j < cols; ++j) {
      if (Traits::parity(coeff & window(block, offset, j)) != ((expected >> j) & 1)) {
        return false;
      }
    }
    return true;
  }

  // Removes the k highest columns everywhere.
  SolutionStorage drop_columns(unsigned k) const {
    if (k >= r_lower_) throw std::invalid_argument("can only drop fewer than r_lower columns");
    if (k == 0) return *this;
    SolutionStorage out = zeroed(layout_, m_, r_lower_ - k, upper_start_block_);
    for (std::size_t block = 0; block < num_blocks(); ++block) {
      for (unsigned j = 0; j < out.columns_of_block(block); ++j) {
        out.word(block, j) = word(block, j);
      }
    }
    return out;
  }

  friend bool operator==(const SolutionStorage&, const SolutionStorage&) = default;

 private:
  std::size_t expected_words() const {
    if (layout_ == Layout::kInterleaved) return block_base(num_blocks());
    return num_blocks() * r_upper();
  }

  // Column j of rows [block*w + offset, block*w + offset + w).
  Row window(std::size_t block, unsigned offset, unsigned j) const {
    Row bits = word(block, j) >> offset;
    if (offset != 0) bits |= word(block + 1, j) << (kWidth - offset);
    return bits;
  }

  Layout layout_ = Layout::kInterleaved;
  std::size_t m_ = 0;
  unsigned r_lower_ = 0;
  std::size_t upper_start_block_ = 0;
  std::vector<Row> words_;
};

// Solves M bottom-up. Occupied row i gives
//   Z_i = b_i xor (xor over set bits t >= 1 of c_i of Z_{i+t});
// empty rows take policy.value(i). Column r_lower of lower blocks is dropped.
template <typename Row>
SolutionStorage<Row> back_substitute(const Banding<Row>& banding, unsigned r_lower,
                                     std::size_t upper_start_block,
                                     const FreeVariablePolicy& policy,
                                     Layout layout = Layout::kInterleaved) {
  using Traits = RowTraits<Row>;
  constexpr unsigned kWidth = Traits::kBits;
  const std::size_t m = banding.m();
  auto out = SolutionStorage<Row>::zeroed(layout, m, r_lower, upper_start_block);
  const unsigned r_up = out.r_upper();
  const std::uint64_t mask = low_mask(r_up);

  // state[j] bit t holds Z[i + t][j] after row i is processed.
  std::vector<Row> state(r_up, Row{0});
  for (std::size_t i = m; i-- > 0;) {
    std::uint64_t value;
    if (banding.is_occupied(i)) {
      const Row upper_coeff = banding.coeff(i) >> 1;
      value = banding.rhs(i);
      for (unsigned j = 0; j < r_up; ++j) {
        value ^= std::uint64_t{Traits::parity(upper_coeff & state[j])} << j;
      }
    } else {
      value = policy.value(i);
    }
    value &= mask;
    for (unsigned j = 0; j < r_up; ++j) {
      state[j] = static_cast<Row>(state[j] << 1) | static_cast<Row>((value >> j) & 1);
    }
    if (i % kWidth == 0) {
      const std::size_t block = i / kWidth;
      for (unsigned j = 0; j < out.columns_of_block(block); ++j) {
        out.word(block, j) = state[j];
      }
    }
  }
  return out;
}

// Membership test on a solved system. Standard compares against the key's
// fingerprint, Homogeneous against zero.
template <typename Row>
bool filter_query(const SolutionStorage<Row>& solution, KeyHash h, const RibbonConfig& cfg) {
  const KeyHash seeded = derive_seeded_hash(h, cfg.seed);
  const std::size_t start = start_position(seeded, cfg);
  const Row coeff = coefficient_vector<Row>(seeded);
  const std::uint64_t expected =
      cfg.variant == Variant::kHomogeneous ? 0 : fingerprint(seeded, cfg.r_upper());
  return solution.matches(start, coeff, expected);
}

}  // namespace ribbon
