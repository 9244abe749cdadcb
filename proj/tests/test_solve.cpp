//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#include "gf2_oracle.hpp"
#include "ribbon/filter.hpp"
#include "ribbon/measure.hpp"
#include "ribbon/solution.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <random>

using namespace ribbon;

namespace {

// Z[row][col] read back through retrieve with a single-bit coefficient.
template <typename Row>
std::uint64_t z_row(const SolutionStorage<Row>& z, std::size_t row) {
  constexpr unsigned w = RowTraits<Row>::kBits;
  const std::size_t start = std::min(row, z.m() - w);
  return z.retrieve(start, Row{1} << (row - start));
}

template <typename Row>
Banding<Row> banded_keys(const RibbonConfig& cfg, std::size_t n, std::uint64_t seed,
                         std::vector<Equation<Row>>* kept = nullptr) {
  Banding<Row> b(cfg.m, cfg.r_upper());
  for (std::uint64_t h : testing::hashes(n, seed)) {
    const auto eq = make_equation<Row>(derive_seeded_hash(h, cfg.seed), cfg);
    if (b.insert(eq).ok() && kept) kept->push_back(eq);
  }
  return b;
}

}  // namespace

TEST_CASE("back substitution by hand") {
  Banding<std::uint8_t> one(8, 1);
  REQUIRE(one.insert({0, 1, 1}).is_inserted());
  const auto z1 = back_substitute(one, 1, 1, FreeVariablePolicy::zeros());
  CHECK(z_row(z1, 0) == 1);

  // Rows (c, b): 0 = (11, 1), 1 = (11, 0), 2 = (1, 1); rows 3.. are free zeros.
  Banding<std::uint8_t> b(8, 1);
  REQUIRE(b.insert({2, 0b1, 1}) == InsertOutcome::inserted(2));
  REQUIRE(b.insert({1, 0b11, 0}) == InsertOutcome::inserted(1));
  REQUIRE(b.insert({0, 0b11, 1}) == InsertOutcome::inserted(0));
  const auto z = back_substitute(b, 1, 1, FreeVariablePolicy::zeros());
  CHECK(z_row(z, 2) == 1);
  CHECK(z_row(z, 1) == 1);
  CHECK(z_row(z, 0) == 0);
}

TEST_CASE("small random systems round trip and agree with the dense solution space") {
  std::mt19937_64 rng(48);
  for (int trial = 0; trial < 200; ++trial) {
    constexpr std::size_t m = 48;
    constexpr unsigned r = 4;
    Banding<std::uint8_t> b(m, r);
    gf2::System dense(m);
    std::vector<Equation<std::uint8_t>> inserted;
    for (int i = 0; i < 44; ++i) {
      Equation<std::uint8_t> eq{rng() % (m - 7), static_cast<std::uint8_t>(rng() | 1), rng() & 15};
      if (b.insert(eq).ok()) {
        inserted.push_back(eq);
        dense.add(eq.start, eq.coeff, eq.rhs);
      }
    }
    REQUIRE(gf2::eliminate(dense).consistent);
    for (auto layout : {Layout::kInterleaved, Layout::kColumnMajor}) {
      const auto z = back_substitute(b, r, m / 8, FreeVariablePolicy::random(trial), layout);
      for (const auto& eq : inserted) CHECK(z.retrieve(eq.start, eq.coeff) == eq.rhs);
    }
  }
}

TEST_CASE("free variables follow the policy") {
  Banding<std::uint16_t> empty(64, 8);
  const auto odd = FreeVariablePolicy::odd_multiple(0x9);
  const auto z = back_substitute(empty, 8, 4, odd);
  for (std::size_t i = 0; i < 64; ++i) CHECK(z_row(z, i) == ((9 * i) & 0xFF));
  CHECK_THROWS_AS(FreeVariablePolicy::odd_multiple(6), std::invalid_argument);
  const auto zeros = back_substitute(empty, 8, 4, FreeVariablePolicy::zeros());
  for (std::size_t i = 0; i < 64; ++i) CHECK(z_row(zeros, i) == 0);
}

TEST_CASE("interleaved geometry") {
  const auto z = SolutionStorage<std::uint64_t>::zeroed(Layout::kInterleaved, 64 * 10, 7, 4);
  // 4 blocks of 7 words then 6 blocks of 8.
  CHECK(z.words().size() == 4 * 7 + 6 * 8);
  std::size_t expected_base = 0;
  for (std::size_t k = 0; k < 10; ++k) {
    CHECK(z.block_base(k) == expected_base);
    CHECK(z.columns_of_block(k) == (k < 4 ? 7u : 8u));
    expected_base += z.columns_of_block(k);
  }
  CHECK(z.block_base(10) == z.words().size());
  RibbonConfig cfg;
  cfg.m = 640;
  cfg.w = 64;
  cfg.r_lower = 7;
  cfg.upper_start_block = 4;
  CHECK(cfg.solution_bits() == z.words().size() * 64);
  CHECK_THROWS_AS(SolutionStorage<std::uint64_t>(Layout::kInterleaved, 640, 7, 4, {}),
                  std::invalid_argument);
}

TEST_CASE_TEMPLATE("layouts agree on retrieve", Row, std::uint16_t, std::uint32_t, std::uint64_t,
                   u128) {
  constexpr unsigned w = RowTraits<Row>::kBits;
  RibbonConfig cfg;
  cfg.w = w;
  cfg.m = w * 40;
  cfg.r_lower = 5;
  cfg.upper_start_block = 17;
  const auto b = banded_keys<Row>(cfg, cfg.m * 9 / 10, 3);
  const auto policy = FreeVariablePolicy::random(9);
  const auto icml = back_substitute(b, cfg.r_lower, cfg.upper_start_block, policy,
                                    Layout::kInterleaved);
  const auto cm = back_substitute(b, cfg.r_lower, cfg.upper_start_block, policy,
                                  Layout::kColumnMajor);
  std::uint64_t state = 12;
  for (int i = 0; i < 100'000; ++i) {
    const std::size_t start = testing::splitmix(state) % (cfg.m - w + 1);
    const Row coeff = coefficient_vector<Row>(testing::splitmix(state));
    const std::uint64_t value = icml.retrieve(start, coeff);
    REQUIRE(value == cm.retrieve(start, coeff));
    if (i % 16 == 0) {
      const std::uint64_t probe = testing::splitmix(state) & low_mask(6);
      CHECK(icml.matches(start, coeff, probe) ==
            ((probe & low_mask(cfg.columns_of_block(start / w))) == value));
      CHECK(icml.matches(start, coeff, value));
    }
    if (i % 1000 == 0) CHECK(icml.retrieve(start, Row{1}) == z_row(icml, start));
  }
}

TEST_CASE("retrieve reproduces every inserted equation") {
  RibbonConfig cfg;
  cfg.w = 128;
  cfg.m = 128 * 64;
  cfg.r_lower = 11;
  cfg.upper_start_block = 30;
  std::vector<Equation<u128>> kept;
  const auto b = banded_keys<u128>(cfg, cfg.m * 95 / 100, 4, &kept);
  const auto z = back_substitute(b, cfg.r_lower, cfg.upper_start_block, FreeVariablePolicy::zeros());
  for (const auto& eq : kept) {
    const unsigned cols = cfg.columns_of_block(eq.start / cfg.w);
    CHECK(z.retrieve(eq.start, eq.coeff) == (eq.rhs & low_mask(cols)));
  }
}

TEST_CASE("drop columns") {
  const auto keys = testing::hashes(200'000, 6);
  BuildOptions opts;
  opts.r = 8;
  opts.w = 64;
  opts.seed = 1;
  const auto built = build_standard(keys, opts);
  const Filter& f = built.filter;
  CHECK(f.drop_columns(0) == f);
  const Filter dropped = f.drop_columns(1);
  CHECK(dropped.config().r_lower == 7);
  CHECK(dropped.total_bits() == f.config().m * 7);
  for (KeyHash h : keys) REQUIRE(dropped.contains(h));
  const auto fpr = measure_fpr(dropped, 2'000'000, 3);
  const double p = 1.0 / 128;
  CHECK(std::abs(fpr.rate - p) < 3.0 * fpr.sigma_at(p));
  CHECK_THROWS_AS(f.drop_columns(8), std::invalid_argument);

  // Dropping keeps the low columns word for word.
  const auto& full = std::get<SolutionStorage<std::uint64_t>>(f.storage());
  const auto& less = std::get<SolutionStorage<std::uint64_t>>(dropped.storage());
  for (std::size_t k = 0; k < full.num_blocks(); k += 97) {
    for (unsigned j = 0; j < 7; ++j) CHECK(less.word(k, j) == full.word(k, j));
  }
}

TEST_CASE("homogeneous members evaluate to zero") {
  RibbonConfig cfg;
  cfg.variant = Variant::kHomogeneous;
  cfg.w = 32;
  cfg.m = 32 * 100;
  cfg.r_lower = 6;
  cfg.upper_start_block = 100;
  std::vector<Equation<std::uint32_t>> kept;
  const auto b = banded_keys<std::uint32_t>(cfg, 3000, 7, &kept);
  CHECK(kept.size() == 3000);
  const auto z = back_substitute(b, cfg.r_lower, cfg.upper_start_block,
                                 FreeVariablePolicy::odd_multiple());
  for (const auto& eq : kept) CHECK(z.retrieve(eq.start, eq.coeff) == 0);
}
