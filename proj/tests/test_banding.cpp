//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#include "gf2_oracle.hpp"
#include "ribbon/banding.hpp"
#include "ribbon/filter.hpp"
#include "ribbon/hash.hpp"
#include "ribbon/measure.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace ribbon;

namespace {

using Eq8 = Equation<std::uint8_t>;

// Random width-w equations embedded in 8-bit rows over m columns.
std::vector<Eq8> random_small(std::mt19937_64& rng, std::size_t m, unsigned w, unsigned r,
                              std::size_t count) {
  std::vector<Eq8> eqs;
  std::uniform_int_distribution<std::size_t> start(0, m - 8);
  for (std::size_t i = 0; i < count; ++i) {
    Eq8 eq;
    eq.start = start(rng);
    eq.coeff = static_cast<std::uint8_t>((rng() & ((1u << w) - 1)) | 1);
    eq.rhs = rng() & low_mask(r);
    eqs.push_back(eq);
  }
  return eqs;
}

gf2::System to_dense(std::span<const Eq8> eqs, std::size_t m) {
  gf2::System sys(m);
  for (const auto& eq : eqs) sys.add(eq.start, eq.coeff, eq.rhs);
  return sys;
}

template <typename Row>
std::vector<Equation<Row>> key_equations(std::size_t n, std::size_t m, std::uint64_t seed,
                                         unsigned r = 8) {
  RibbonConfig cfg;
  cfg.m = m;
  cfg.w = RowTraits<Row>::kBits;
  cfg.r_lower = r;
  cfg.upper_start_block = cfg.num_blocks();
  std::vector<Equation<Row>> eqs;
  for (std::uint64_t h : testing::hashes(n, seed)) eqs.push_back(make_equation<Row>(h, cfg));
  return eqs;
}

}  // namespace

TEST_CASE("new banding") {
  Banding<std::uint64_t> b(64, 7);
  CHECK(b.m() == 64);
  CHECK(b.occupied_count() == 0);
  for (std::size_t i = 0; i < 64; ++i) CHECK_FALSE(b.is_occupied(i));
  CHECK(b.occupied_rows().empty());
  CHECK_THROWS_AS(Banding<std::uint32_t>(16, 1), std::invalid_argument);
  Banding<std::uint64_t> big(std::size_t{1} << 20, 8);
  CHECK(big.occupied_count() == 0);
}

TEST_CASE("insert cases") {
  Banding<std::uint8_t> b(16, 4);
  const Eq8 eq{3, 0b101, 5};
  CHECK(b.insert(eq) == InsertOutcome::inserted(3));
  CHECK(b.coeff(3) == 0b101);
  CHECK(b.rhs(3) == 5);
  CHECK(b.insert(eq).is_redundant());
  const auto before = b;
  CHECK(b.insert(Eq8{3, 0b101, 4}).is_inconsistent());
  CHECK(b == before);

  // 0b111 at 3 reduces to 0b010 -> shifted to row 4 as 0b1.
  const auto out = b.insert(Eq8{3, 0b111, 1});
  REQUIRE(out.is_inserted());
  CHECK(out.row() == 4);
  CHECK(b.coeff(4) == 1);
  CHECK(b.rhs(4) == (1 ^ 5));
  CHECK(b.occupied_rows() == std::vector<std::size_t>{3, 4});
  CHECK(b.displacement() == 1);
}

TEST_CASE("fill until failure") {
  Banding<std::uint8_t> b(16, 4);
  std::vector<Eq8> good = {{0, 1, 1}, {1, 3, 2}, {2, 5, 3}};
  CHECK(b.fill_until_failure(good) == 3);

  Banding<std::uint8_t> c(16, 4);
  const Eq8 a{0, 0b11, 1};
  const Eq8 d{1, 0b1, 1};
  // a + d puts x0 = 0; asking for x0 = 1 contradicts.
  std::vector<Eq8> seq = {a, d, {0, 0b1, 1}, {5, 1, 0}};
  CHECK(c.fill_until_failure(seq) == 2);
  CHECK(c.occupied_rows() == std::vector<std::size_t>{0, 1});
}

TEST_CASE("occupied rows and rank match dense elimination") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 8 + rng() % 57;
    const unsigned w = 1 + rng() % 8;
    const unsigned r = 1 + rng() % 4;
    const auto eqs = random_small(rng, m, w, r, rng() % (m + 8));
    Banding<std::uint8_t> b(m, r);
    std::size_t failed = 0;
    std::size_t redundant = 0;
    for (const auto& eq : eqs) {
      const auto out = b.insert(eq);
      failed += out.is_inconsistent();
      redundant += out.is_redundant();
    }
    const auto dense = gf2::eliminate(to_dense(eqs, m));
    CHECK(b.occupied_rows() == dense.pivot_columns);
    CHECK(b.occupied_count() == dense.rank);
    CHECK((failed == 0) == dense.consistent);
    CHECK(redundant + failed == eqs.size() - dense.rank);
  }
}

TEST_CASE("inconsistent insert leaves the banding untouched") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto eqs = random_small(rng, 24, 8, 2, 40);
    Banding<std::uint8_t> b(24, 2);
    for (const auto& eq : eqs) {
      const auto snapshot = b;
      const std::size_t occupied = b.occupied_count();
      const auto out = b.insert(eq);
      if (out.is_inconsistent() || out.is_redundant()) CHECK(b == snapshot);
      if (out.is_inserted()) {
        CHECK_FALSE(snapshot.is_occupied(out.row()));
        CHECK(b.occupied_count() == occupied + 1);
      }
      // Never empties a row.
      for (std::size_t row : snapshot.occupied_rows()) CHECK(b.is_occupied(row));
    }
  }
}

TEST_CASE("backtrack restores the pre-batch state") {
  const auto eqs = key_equations<std::uint64_t>(600, 1024, 77);
  Banding<std::uint64_t> b(1024, 8);
  for (std::size_t i = 0; i < 300; ++i) REQUIRE(b.insert(eqs[i]).ok());
  const auto snapshot = b;
  b.backtrack({});
  CHECK(b == snapshot);

  std::vector<std::size_t> rows;
  for (std::size_t i = 300; i < 600; ++i) {
    const auto out = b.insert(eqs[i]);
    REQUIRE(out.ok());
    if (out.is_inserted()) rows.push_back(out.row());
  }
  const auto full_rows = b.occupied_rows();
  b.backtrack(rows);
  CHECK(b == snapshot);

  // Re-inserting the batch in another order gives the same row set.
  std::vector<Equation<std::uint64_t>> batch(eqs.begin() + 300, eqs.end());
  std::mt19937_64 rng(1);
  std::shuffle(batch.begin(), batch.end(), rng);
  for (const auto& eq : batch) REQUIRE(b.insert(eq).ok());
  CHECK(b.occupied_rows() == full_rows);

  const std::size_t free_row = [&] {
    for (std::size_t i = 0; i < b.m(); ++i) {
      if (!b.is_occupied(i)) return i;
    }
    return b.m();
  }();
  REQUIRE(free_row < b.m());
  const std::vector<std::size_t> bad = {full_rows.front(), free_row};
  const auto before = b;
  CHECK_THROWS_AS(b.backtrack(bad), std::invalid_argument);
  CHECK(b == before);
}

TEST_CASE("occupied rows and displacement do not depend on insertion order") {
  std::mt19937_64 rng(8);
  for (int instance = 0; instance < 20; ++instance) {
    const std::size_t m = 512;
    // Loaded near capacity but with consistent (homogeneous) right-hand sides.
    auto eqs = key_equations<std::uint32_t>(480, m, 1000 + instance);
    for (auto& eq : eqs) eq.rhs = 0;
    Banding<std::uint32_t> ref(m, 1);
    std::size_t redundant = 0;
    for (const auto& eq : eqs) {
      const auto out = ref.insert(eq);
      REQUIRE(out.ok());
      redundant += out.is_redundant();
    }
    for (int perm = 0; perm < 5; ++perm) {
      std::shuffle(eqs.begin(), eqs.end(), rng);
      Banding<std::uint32_t> b(m, 1);
      for (const auto& eq : eqs) REQUIRE(b.insert(eq).ok());
      CHECK(b.occupied_rows() == ref.occupied_rows());
      // Which of a dependent set is dropped depends on order.
      if (redundant == 0) CHECK(b.displacement() == ref.displacement());
    }
  }
}

TEST_CASE_TEMPLATE("square systems are solvable at the random-matrix rate", Row, std::uint16_t,
                   std::uint32_t, std::uint64_t, u128) {
  constexpr unsigned w = RowTraits<Row>::kBits;
  constexpr int kTrials = 4000;
  int solved = 0;
  for (int t = 0; t < kTrials; ++t) {
    const auto eqs = key_equations<Row>(w, w, 5000 + t, 16);
    Banding<Row> b(w, 16);
    solved += b.fill_until_failure(eqs) == w;
  }
  const double p = testing::square_success_probability(w);
  const double rate = static_cast<double>(solved) / kTrials;
  CHECK(std::abs(rate - p) < 4.0 * testing::binomial_sigma(p, kTrials));
}

TEST_CASE("add till failure at w=64, m=2^10 fills about 97.8%") {
  AddTillFailureParams params;
  params.w = 64;
  params.m = 1 << 10;
  params.trials = 201;
  params.seed = 10;
  const auto result = add_till_failure(params);
  const double occupied = 1.0 / (1.0 + result.median);
  CHECK(occupied >= 0.978 - 0.007);
  CHECK(result.q1 <= result.median);
  CHECK(result.median <= result.q3);
}

TEST_CASE("add till failure on a minimal system") {
  AddTillFailureParams params;
  params.w = 16;
  params.m = 16;
  params.trials = 101;
  const auto result = add_till_failure(params);
  for (double eps : result.epsilons) {
    CHECK(std::isfinite(eps));
    CHECK(eps >= 0.0);
    CHECK(eps <= 15.0);  // at least one success
  }
}
