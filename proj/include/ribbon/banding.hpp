//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#pragma once

#include "ribbon/bits.hpp"

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace ribbon {

// One key's reduced row: c . Z[start, start + w) = rhs.
template <typename Row>
struct Equation {
  std::size_t start = 0;
  Row coeff = 1;
  std::uint64_t rhs = 0;
};

class InsertOutcome {
 public:
  enum class Kind : std::uint8_t { kInserted, kRedundant, kInconsistent };

  static InsertOutcome inserted(std::size_t row) { return {Kind::kInserted, row}; }
  static InsertOutcome redundant() { return {Kind::kRedundant, 0}; }
  static InsertOutcome inconsistent() { return {Kind::kInconsistent, 0}; }

  Kind kind() const { return kind_; }
  bool is_inserted() const { return kind_ == Kind::kInserted; }
  bool is_redundant() const { return kind_ == Kind::kRedundant; }
  bool is_inconsistent() const { return kind_ == Kind::kInconsistent; }
  bool ok() const { return kind_ != Kind::kInconsistent; }
  // Only meaningful for kInserted.
  std::size_t row() const { return row_; }

  friend bool operator==(const InsertOutcome&, const InsertOutcome&) = default;

 private:
  InsertOutcome(Kind kind, std::size_t row) : kind_(kind), row_(row) {}

  Kind kind_;
  std::size_t row_;
};

// The reduced system M built by on-the-fly elimination. Row i is empty iff
// its coefficient word is zero; an occupied row always has bit 0 set and
// never selects rows at or beyond m.
template <typename Row>
class Banding {
 public:
  using Traits = RowTraits<Row>;
  static constexpr unsigned kWidth = Traits::kBits;

  Banding(std::size_t m, unsigned r)
      : coeff_(m, Row{0}), rhs_(m, 0), row_start_(m, 0), r_(r) {
    if (m < kWidth) throw std::invalid_argument("banding needs m >= w");
    if (m > 0xFFFFFFFFull) throw std::invalid_argument("banding needs m < 2^32");
    if (r > 64) throw std::invalid_argument("banding supports at most 64 rhs bits");
  }

  std::size_t m() const { return coeff_.size(); }
  unsigned w() const { return kWidth; }
  unsigned r() const { return r_; }
  std::size_t occupied_count() const { return occupied_; }
  bool is_occupied(std::size_t row) const { return coeff_[row] != 0; }
  Row coeff(std::size_t row) const { return coeff_[row]; }
  std::uint64_t rhs(std::size_t row) const { return rhs_[row]; }
  // Sum over occupied rows of (row - start of the equation that filled it).
  std::uint64_t displacement() const { return displacement_; }

  InsertOutcome insert(const Equation<Row>& eq) {
    assert((eq.coeff & Row{1}) != 0);
    assert(eq.start + kWidth <= m());
    std::size_t i = eq.start;
    Row c = eq.coeff;
    std::uint64_t b = eq.rhs & low_mask(r_);
    for (;;) {
      const Row existing = coeff_[i];
      if (existing == 0) {
        coeff_[i] = c;
        rhs_[i] = b;
        row_start_[i] = static_cast<std::uint32_t>(eq.start);
        ++occupied_;
        displacement_ += i - eq.start;
        return InsertOutcome::inserted(i);
      }
      c ^= existing;
      b ^= rhs_[i];
      if (c == 0) {
        return b == 0 ? InsertOutcome::redundant() : InsertOutcome::inconsistent();
      }
      const unsigned j = Traits::ctz(c);
      i += j;
      c >>= j;
    }
  }

  // Inserts in order and stops before the first inconsistent equation.
  // Returns the length of the successful prefix (redundant counts as success).
  std::size_t fill_until_failure(std::span<const Equation<Row>> eqs) {
    std::size_t done = 0;
    for (const auto& eq : eqs) {
      if (insert(eq).is_inconsistent()) break;
      ++done;
    }
    return done;
  }

  // Empties rows reported as Inserted by the most recent batch.
  void backtrack(std::span<const std::size_t> rows) {
    for (std::size_t row : rows) {
      if (row >= m() || coeff_[row] == 0) {
        throw std::invalid_argument("backtrack of a row that is not occupied");
      }
    }
    for (std::size_t row : rows) {
      displacement_ -= row - row_start_[row];
      coeff_[row] = 0;
      rhs_[row] = 0;
      row_start_[row] = 0;
      --occupied_;
    }
  }

  std::vector<std::size_t> occupied_rows() const {
    std::vector<std::size_t> rows;
    rows.reserve(occupied_);
    for (std::size_t i = 0; i < coeff_.size(); ++i) {
      if (coeff_[i] != 0) rows.push_back(i);
    }
    return rows;
  }

  friend bool operator==(const Banding&, const Banding&) = default;

 private:
  std::vector<Row> coeff_;
  std::vector<std::uint64_t> rhs_;
  std::vector<std::uint32_t> row_start_;
  unsigned r_;
  std::size_t occupied_ = 0;
  std::uint64_t displacement_ = 0;
};

}  // namespace ribbon
