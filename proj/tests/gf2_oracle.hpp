//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

// Dense GF(2) Gauss-Jordan elimination, used as an independent reference for
// the banded solver. Rows are full m-column bit vectors; nothing here knows
// about bands, start positions or leading ones.

#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace gf2 {

class DenseRow {
 public:
  explicit DenseRow(std::size_t cols) : bits_((cols + 63) / 64, 0) {}

  bool get(std::size_t col) const { return (bits_[col / 64] >> (col % 64)) & 1; }
  void set(std::size_t col) { bits_[col / 64] |= std::uint64_t{1} << (col % 64); }
  void flip(std::size_t col) { bits_[col / 64] ^= std::uint64_t{1} << (col % 64); }
  DenseRow& operator^=(const DenseRow& o) {
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] ^= o.bits_[i];
    return *this;
  }
  bool any() const {
    for (auto word : bits_) {
      if (word) return true;
    }
    return false;
  }

 private:
  std::vector<std::uint64_t> bits_;
};

struct System {
  std::size_t cols = 0;
  std::vector<DenseRow> rows;
  std::vector<std::uint64_t> rhs;

  explicit System(std::size_t c) : cols(c) {}
  // Adds sum over set bits t of coeff of x[start + t] = value.
  void add(std::size_t start, std::uint64_t coeff, std::uint64_t value) {
    DenseRow row(cols);
    for (unsigned t = 0; t < 64; ++t) {
      if ((coeff >> t) & 1) row.set(start + t);
    }
    rows.push_back(std::move(row));
    rhs.push_back(value);
  }
};

struct Reduced {
  std::vector<std::size_t> pivot_columns;  // ascending
  std::size_t rank = 0;
  bool consistent = true;
  // Valid only when consistent: one solution with free variables zero.
  std::vector<std::uint64_t> solution;
};

// Classic column-by-column Gauss-Jordan to reduced row echelon form.
inline Reduced eliminate(System sys) {
  Reduced out;
  std::size_t next = 0;
  const std::size_t n = sys.rows.size();
  for (std::size_t col = 0; col < sys.cols && next < n; ++col) {
    std::size_t pick = next;
    while (pick < n && !sys.rows[pick].get(col)) ++pick;
    if (pick == n) continue;
    std::swap(sys.rows[pick], sys.rows[next]);
    std::swap(sys.rhs[pick], sys.rhs[next]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i != next && sys.rows[i].get(col)) {
        sys.rows[i] ^= sys.rows[next];
        sys.rhs[i] ^= sys.rhs[next];
      }
    }
    out.pivot_columns.push_back(col);
    ++next;
  }
  out.rank = next;
  for (std::size_t i = next; i < n; ++i) {
    if (sys.rhs[i] != 0) out.consistent = false;
  }
  if (out.consistent) {
    out.solution.assign(sys.cols, 0);
    for (std::size_t i = 0; i < next; ++i) out.solution[out.pivot_columns[i]] = sys.rhs[i];
  }
  return out;
}

}  // namespace gf2
