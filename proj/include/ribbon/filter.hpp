//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#pragma once

#include "ribbon/bits.hpp"
#include "ribbon/config.hpp"
#include "ribbon/shards.hpp"
#include "ribbon/solution.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace ribbon {

class ConstructionFailed : public std::runtime_error {
 public:
  explicit ConstructionFailed(unsigned attempts)
      : std::runtime_error("ribbon construction failed after " + std::to_string(attempts) +
                           " attempt(s)"),
        attempts_(attempts) {}
  unsigned attempts() const { return attempts_; }

 private:
  unsigned attempts_;
};

struct BuildReport {
  Variant variant = Variant::kStandard;
  std::uint64_t seed_used = 0;
  unsigned attempts = 1;
  std::size_t n = 0;
  std::size_t m = 0;
  // (m - n) / n; infinite for n == 0.
  double epsilon_configured = 0.0;
  double bits_per_key = 0.0;
  std::size_t redundant_count = 0;
  // Balanced only.
  std::size_t num_shards = 0;
  std::size_t bumped_keys = 0;

  std::string to_json() const;
};

// Calls f(std::type_identity<Row>{}) with the coefficient word of width w.
template <typename F>
decltype(auto) dispatch_width(unsigned w, F&& f) {
  switch (w) {
    case 16:
      return f(std::type_identity<std::uint16_t>{});
    case 32:
      return f(std::type_identity<std::uint32_t>{});
    case 64:
      return f(std::type_identity<std::uint64_t>{});
    case 128:
      return f(std::type_identity<u128>{});
    default:
      throw std::invalid_argument("ribbon width must be one of 16, 32, 64, 128");
  }
}

// A built, immutable filter of any variant and width.
class Filter {
 public:
  using Storage = std::variant<SolutionStorage<std::uint16_t>, SolutionStorage<std::uint32_t>,
                               SolutionStorage<std::uint64_t>, SolutionStorage<u128>>;

  Filter(RibbonConfig cfg, std::size_t num_keys, Storage solution,
         std::optional<BalancedMetadata> balanced = std::nullopt);

  const RibbonConfig& config() const { return cfg_; }
  std::size_t num_keys() const { return n_; }
  Layout layout() const;
  const Storage& storage() const { return solution_; }
  const BalancedMetadata* balanced() const { return balanced_ ? &*balanced_ : nullptr; }

  bool contains(KeyHash h) const;

  // Solution bits plus Balanced metadata bits.
  std::size_t total_bits() const;
  double bits_per_key() const;

  // Elasticity: removes the k highest solution columns.
  Filter drop_columns(unsigned k) const;

  // Solution words as little-endian w-bit words.
  std::vector<std::uint8_t> solution_bytes() const;
  static Storage storage_from_bytes(const RibbonConfig& cfg, Layout layout,
                                    std::span<const std::uint8_t> bytes);

  friend bool operator==(const Filter&, const Filter&) = default;

 private:
  RibbonConfig cfg_;
  std::size_t n_;
  Storage solution_;
  std::optional<BalancedMetadata> balanced_;
};

struct BuiltFilter {
  Filter filter;
  BuildReport report;
};

enum class RetryMode : std::uint8_t {
  kReseed,   // next seed, same m
  kGrowRows  // same seed, m grown by (w+1)/w
};

struct BuildOptions {
  // Fractional values mix floor(r) and ceil(r) blocks.
  double r = 7.0;
  unsigned w = 64;
  std::optional<double> epsilon;
  std::optional<unsigned> smash;
  std::uint64_t seed = 0;
  unsigned max_retries = 8;
  RetryMode retry_mode = RetryMode::kReseed;
  Layout layout = Layout::kInterleaved;
  std::optional<FreeVariablePolicy> free_variables;
  // Balanced only: 0 picks the natural shard size w^2/4.
  std::size_t target_shard_keys = 0;
};

// Space overhead that minimizes Homogeneous Ribbon overhead: (4 + r/4)/w.
double recommended_epsilon(double r, unsigned w);

// Overhead eps = (m - n)/n giving about 5% Standard Ribbon construction
// failure, interpolated in log2(m) from empirical data. Widths 16 and 32 are
// estimated from add-till-failure medians.
double standard_epsilon(unsigned w, std::size_t m, unsigned smash);

// standard_epsilon at the row count it implies for n keys.
double standard_epsilon_for_keys(unsigned w, std::size_t n, std::optional<unsigned> smash);

// Median overhead left empty when adding keys until the first failure.
double add_till_failure_epsilon(unsigned w, std::size_t m, unsigned smash);

// w/2 for Standard systems smaller than w^2/4 rows, else 0.
unsigned default_smash(Variant variant, unsigned w, std::size_t m);

// Smallest multiple of w that is >= max(w, ceil((1 + eps) * n)).
std::size_t slots_for(std::size_t n, double epsilon, unsigned w);

// Splits fractional r across blocks: upper_start_block = round(blocks * (ceil(r) - r)).
void apply_fractional_r(RibbonConfig& cfg, double r);

// Full configuration for n keys, filling in defaults for eps and smash.
RibbonConfig make_config(Variant variant, std::size_t n, const BuildOptions& options);

// Fractional-r configuration using at most total_bits of solution space.
RibbonConfig config_from_space(Variant variant, std::size_t n, std::size_t total_bits,
                               unsigned w, std::uint64_t seed = 0);

std::uint64_t next_seed(std::uint64_t seed);

BuiltFilter build_homogeneous(std::span<const KeyHash> keys, const BuildOptions& options);
BuiltFilter build_homogeneous(std::span<const KeyHash> keys, const RibbonConfig& cfg,
                              const FreeVariablePolicy& policy = FreeVariablePolicy::odd_multiple(),
                              Layout layout = Layout::kInterleaved);

// Throws ConstructionFailed after max_retries failed attempts.
BuiltFilter build_standard(std::span<const KeyHash> keys, const BuildOptions& options);
BuiltFilter build_standard(std::span<const KeyHash> keys, RibbonConfig cfg,
                           unsigned max_retries = 8, RetryMode mode = RetryMode::kReseed,
                           Layout layout = Layout::kInterleaved,
                           const FreeVariablePolicy& policy = FreeVariablePolicy::zeros());

// Dispatches on variant.
BuiltFilter build_filter(Variant variant, std::span<const KeyHash> keys,
                         const BuildOptions& options);

// Equation of a seeded key hash under cfg (Standard/Homogeneous placement).
template <typename Row>
Equation<Row> make_equation(KeyHash seeded, const RibbonConfig& cfg) {
  Equation<Row> eq;
  eq.start = start_position(seeded, cfg);
  eq.coeff = coefficient_vector<Row>(seeded);
  eq.rhs = cfg.variant == Variant::kHomogeneous ? 0 : fingerprint(seeded, cfg.r_upper());
  return eq;
}

}  // namespace ribbon
