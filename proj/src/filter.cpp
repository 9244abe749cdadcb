//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#include "ribbon/filter.hpp"

#include "ribbon/balanced.hpp"
#include "ribbon/banding.hpp"
#include "ribbon/hash.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace ribbon {

namespace {

// Overheads (as fractions) at m = 2^10 with smash w/2 and w/4, then without
// smash at m = 2^10, 2^14, 2^17, 2^24, and the growth per further doubling.
struct OverheadRow {
  double smash_half;
  double smash_quarter;
  std::array<double, 4> plain;
  double per_doubling;
};

constexpr std::array<double, 4> kLog2Columns = {10, 14, 17, 24};

constexpr OverheadRow scaled(const OverheadRow& row, double factor) {
  return {row.smash_half * factor,
          row.smash_quarter * factor,
          {row.plain[0] * factor, row.plain[1] * factor, row.plain[2] * factor,
           row.plain[3] * factor},
          row.per_doubling * factor};
}

// Add-till-failure medians. The w = 16 entries beyond 2^14 are extrapolated.
constexpr OverheadRow kAddTillFailure128 = {0.002, 0.002, {0.011, 0.012, 0.023, 0.048}, 0.0038};
constexpr OverheadRow kAddTillFailure64 = {0.008, 0.008, {0.022, 0.041, 0.065, 0.121}, 0.0083};
constexpr OverheadRow kAddTillFailure32 = {0.059, 0.052, {0.063, 0.132, 0.192, 0.352}, 0.02};
constexpr OverheadRow kAddTillFailure16 = {0.289, 0.270, {0.275, 0.673, 1.10, 1.80}, 0.10};

// 5% failure probability. Narrow widths have no measured row; they scale the
// add-till-failure medians by the ratio seen at w = 64.
constexpr OverheadRow kFailure05_128 = {0.005, 0.005, {0.022, 0.026, 0.037, 0.059}, 0.0038};
constexpr OverheadRow kFailure05_64 = {0.037, 0.029, {0.048, 0.070, 0.094, 0.150}, 0.0083};
constexpr OverheadRow kFailure05_32 = scaled(kAddTillFailure32, 1.6);
constexpr OverheadRow kFailure05_16 = scaled(kAddTillFailure16, 1.6);

double interpolate(const OverheadRow& row, unsigned w, std::size_t m, unsigned smash) {
  const double lg = std::log2(static_cast<double>(std::max<std::size_t>(m, 1)));
  double at10 = row.plain[0];
  if (smash > 0 && smash >= w / 2) {
    at10 = row.smash_half;
  } else if (smash > 0 && smash >= w / 4) {
    at10 = row.smash_quarter;
  }
  if (lg <= kLog2Columns[0]) return at10;
  if (lg <= kLog2Columns[1]) {
    const double t = (lg - kLog2Columns[0]) / (kLog2Columns[1] - kLog2Columns[0]);
    return at10 + t * (row.plain[1] - at10);
  }
  for (std::size_t i = 1; i + 1 < kLog2Columns.size(); ++i) {
    if (lg <= kLog2Columns[i + 1]) {
      const double t = (lg - kLog2Columns[i]) / (kLog2Columns[i + 1] - kLog2Columns[i]);
      return row.plain[i] + t * (row.plain[i + 1] - row.plain[i]);
    }
  }
  return row.plain[3] + row.per_doubling * (lg - kLog2Columns[3]);
}

const OverheadRow& failure05_row(unsigned w) {
  switch (w) {
    case 16:
      return kFailure05_16;
    case 32:
      return kFailure05_32;
    case 64:
      return kFailure05_64;
    case 128:
      return kFailure05_128;
  }
  throw std::invalid_argument("ribbon width must be one of 16, 32, 64, 128");
}

const OverheadRow& add_till_failure_row(unsigned w) {
  switch (w) {
    case 16:
      return kAddTillFailure16;
    case 32:
      return kAddTillFailure32;
    case 64:
      return kAddTillFailure64;
    case 128:
      return kAddTillFailure128;
  }
  throw std::invalid_argument("ribbon width must be one of 16, 32, 64, 128");
}

template <typename Row>
void append_word(std::vector<std::uint8_t>& out, Row word) {
  using Traits = RowTraits<Row>;
  const std::uint64_t lo = Traits::low64(word);
  const std::uint64_t hi = Traits::high64(word);
  for (unsigned byte = 0; byte < sizeof(Row); ++byte) {
    const std::uint64_t src = byte < 8 ? lo : hi;
    out.push_back(static_cast<std::uint8_t>(src >> (8 * (byte % 8))));
  }
}

template <typename Row>
Row read_word(const std::uint8_t* p) {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  for (unsigned byte = 0; byte < sizeof(Row); ++byte) {
    auto& dst = byte < 8 ? lo : hi;
    dst |= std::uint64_t{p[byte]} << (8 * (byte % 8));
  }
  return RowTraits<Row>::from64(lo, hi);
}

double epsilon_of(std::size_t n, std::size_t m) {
  if (n == 0) return std::numeric_limits<double>::infinity();
  return (static_cast<double>(m) - static_cast<double>(n)) / static_cast<double>(n);
}

template <typename Row>
BuiltFilter build_standard_impl(std::span<const KeyHash> keys, RibbonConfig cfg,
                                unsigned max_retries, RetryMode mode, Layout layout,
                                const FreeVariablePolicy& policy) {
  cfg.variant = Variant::kStandard;
  const unsigned attempts_allowed = std::max(1u, max_retries);
  for (unsigned attempt = 1; attempt <= attempts_allowed; ++attempt) {
    cfg.validate(layout);
    Banding<Row> banding(cfg.m, cfg.r_upper());
    std::size_t redundant = 0;
    bool ok = true;
    for (KeyHash h : keys) {
      const auto outcome = banding.insert(make_equation<Row>(derive_seeded_hash(h, cfg.seed), cfg));
      if (outcome.is_inconsistent()) {
        ok = false;
        break;
      }
      redundant += outcome.is_redundant();
    }
    if (ok) {
      auto solution = back_substitute(banding, cfg.r_lower, cfg.upper_start_block, policy, layout);
      Filter filter(cfg, keys.size(), std::move(solution));
      BuildReport report;
      report.variant = Variant::kStandard;
      report.seed_used = cfg.seed;
      report.attempts = attempt;
      report.n = keys.size();
      report.m = cfg.m;
      report.epsilon_configured = epsilon_of(keys.size(), cfg.m);
      report.bits_per_key = filter.bits_per_key();
      report.redundant_count = redundant;
      return {std::move(filter), report};
    }
    if (mode == RetryMode::kReseed) {
      cfg.seed = next_seed(cfg.seed);
    } else {
      const std::size_t old_blocks = cfg.num_blocks();
      const std::size_t grown = (cfg.m * (cfg.w + 1) + cfg.w - 1) / cfg.w;
      cfg.m = layout == Layout::kInterleaved ? (grown + cfg.w - 1) / cfg.w * cfg.w : grown;
      cfg.upper_start_block = static_cast<std::size_t>(std::llround(
          static_cast<double>(cfg.upper_start_block) * cfg.num_blocks() / old_blocks));
    }
  }
  throw ConstructionFailed(attempts_allowed);
}

template <typename Row>
BuiltFilter build_homogeneous_impl(std::span<const KeyHash> keys, RibbonConfig cfg,
                                   const FreeVariablePolicy& policy, Layout layout) {
  cfg.variant = Variant::kHomogeneous;
  cfg.validate(layout);
  Banding<Row> banding(cfg.m, cfg.r_upper());
  std::size_t redundant = 0;
  for (KeyHash h : keys) {
    const auto outcome = banding.insert(make_equation<Row>(derive_seeded_hash(h, cfg.seed), cfg));
    if (outcome.is_inconsistent()) {
      throw std::logic_error("homogeneous system reported an inconsistent equation");
    }
    redundant += outcome.is_redundant();
  }
  auto solution = back_substitute(banding, cfg.r_lower, cfg.upper_start_block, policy, layout);
  Filter filter(cfg, keys.size(), std::move(solution));
  BuildReport report;
  report.variant = Variant::kHomogeneous;
  report.seed_used = cfg.seed;
  report.attempts = 1;
  report.n = keys.size();
  report.m = cfg.m;
  report.epsilon_configured = epsilon_of(keys.size(), cfg.m);
  report.bits_per_key = filter.bits_per_key();
  report.redundant_count = redundant;
  return {std::move(filter), report};
}

}  // namespace

std::string BuildReport::to_json() const {
  nlohmann::json j;
  j["variant"] = std::string(to_string(variant));
  j["seed_used"] = seed_used;
  j["attempts"] = attempts;
  j["n"] = n;
  j["m"] = m;
  j["epsilon_configured"] = std::isfinite(epsilon_configured) ? nlohmann::json(epsilon_configured)
                                                              : nlohmann::json(nullptr);
  j["bits_per_key"] = bits_per_key;
  j["redundant_count"] = redundant_count;
  if (variant == Variant::kBalanced) {
    j["num_shards"] = num_shards;
    j["bumped_keys"] = bumped_keys;
  }
  return j.dump();
}

Filter::Filter(RibbonConfig cfg, std::size_t num_keys, Storage solution,
               std::optional<BalancedMetadata> balanced)
    : cfg_(cfg), n_(num_keys), solution_(std::move(solution)), balanced_(std::move(balanced)) {
  std::visit(
      [&](const auto& s) {
        if (s.w() != cfg_.w || s.m() != cfg_.m || s.r_lower() != cfg_.r_lower ||
            s.upper_start_block() != cfg_.upper_start_block) {
          throw std::invalid_argument("solution geometry does not match the configuration");
        }
      },
      solution_);
  if ((cfg_.variant == Variant::kBalanced) != balanced_.has_value()) {
    throw std::invalid_argument("balanced metadata must accompany exactly the balanced variant");
  }
}

Layout Filter::layout() const {
  return std::visit([](const auto& s) { return s.layout(); }, solution_);
}

bool Filter::contains(KeyHash h) const {
  if (balanced_) return query_balanced(*this, h);
  return std::visit([&](const auto& s) { return filter_query(s, h, cfg_); }, solution_);
}

std::size_t Filter::total_bits() const {
  return cfg_.solution_bits() + (balanced_ ? balanced_->metadata_bits() : 0);
}

double Filter::bits_per_key() const {
  if (n_ == 0) return 0.0;
  return static_cast<double>(total_bits()) / static_cast<double>(n_);
}

Filter Filter::drop_columns(unsigned k) const {
  RibbonConfig cfg = cfg_;
  if (k >= cfg.r_lower) throw std::invalid_argument("can only drop fewer than r_lower columns");
  cfg.r_lower -= k;
  return std::visit(
      [&](const auto& s) { return Filter(cfg, n_, Storage(s.drop_columns(k)), balanced_); },
      solution_);
}

std::vector<std::uint8_t> Filter::solution_bytes() const {
  return std::visit(
      [](const auto& s) {
        std::vector<std::uint8_t> out;
        out.reserve(s.words().size() * s.w() / 8);
        for (const auto word : s.words()) append_word(out, word);
        return out;
      },
      solution_);
}

Filter::Storage Filter::storage_from_bytes(const RibbonConfig& cfg, Layout layout,
                                           std::span<const std::uint8_t> bytes) {
  return dispatch_width(cfg.w, [&]<typename Row>(std::type_identity<Row>) -> Storage {
    auto zeroed =
        SolutionStorage<Row>::zeroed(layout, cfg.m, cfg.r_lower, cfg.upper_start_block);
    const std::size_t count = zeroed.words().size();
    if (bytes.size() != count * sizeof(Row)) {
      throw std::invalid_argument("solution byte count does not match geometry");
    }
    std::vector<Row> words(count);
    for (std::size_t i = 0; i < count; ++i) words[i] = read_word<Row>(bytes.data() + i * sizeof(Row));
    return SolutionStorage<Row>(layout, cfg.m, cfg.r_lower, cfg.upper_start_block,
                                std::move(words));
  });
}

double recommended_epsilon(double r, unsigned w) { return (4.0 + r / 4.0) / w; }

double standard_epsilon(unsigned w, std::size_t m, unsigned smash) {
  return interpolate(failure05_row(w), w, m, smash);
}

double add_till_failure_epsilon(unsigned w, std::size_t m, unsigned smash) {
  return interpolate(add_till_failure_row(w), w, m, smash);
}

double standard_epsilon_for_keys(unsigned w, std::size_t n, std::optional<unsigned> smash) {
  // m depends on eps and eps on m; two rounds settle it.
  std::size_t m = slots_for(n, 0.0, w);
  double epsilon = 0.0;
  for (int round = 0; round < 2; ++round) {
    epsilon = standard_epsilon(w, m, smash.value_or(default_smash(Variant::kStandard, w, m)));
    m = slots_for(n, epsilon, w);
  }
  return epsilon;
}

unsigned default_smash(Variant variant, unsigned w, std::size_t m) {
  if (variant == Variant::kHomogeneous) return 0;
  return m < std::size_t{w} * w / 4 ? w / 2 : 0;
}

std::size_t slots_for(std::size_t n, double epsilon, unsigned w) {
  // The small allowance keeps exact products from rounding up on float noise.
  const auto raw =
      static_cast<std::size_t>(std::ceil((1.0 + epsilon) * static_cast<double>(n) - 1e-9));
  const std::size_t m = std::max<std::size_t>(raw, w);
  return (m + w - 1) / w * w;
}

void apply_fractional_r(RibbonConfig& cfg, double r) {
  if (!(r >= 1.0) || r > 64.0) throw std::invalid_argument("r must be in [1, 64]");
  cfg.r_lower = static_cast<unsigned>(std::floor(r));
  const double upper = std::ceil(r);
  const std::size_t blocks = cfg.num_blocks();
  if (upper == std::floor(r)) {
    cfg.upper_start_block = blocks;
  } else {
    cfg.upper_start_block = std::min<std::size_t>(
        blocks, static_cast<std::size_t>(std::llround(static_cast<double>(blocks) * (upper - r))));
  }
}

RibbonConfig make_config(Variant variant, std::size_t n, const BuildOptions& options) {
  if (!is_supported_width(options.w)) {
    throw std::invalid_argument("ribbon width must be one of 16, 32, 64, 128");
  }
  RibbonConfig cfg;
  cfg.variant = variant;
  cfg.w = options.w;
  cfg.seed = options.seed;
  double epsilon = 0.0;
  if (options.epsilon) {
    epsilon = *options.epsilon;
  } else if (variant == Variant::kHomogeneous) {
    epsilon = recommended_epsilon(options.r, options.w);
  } else if (variant == Variant::kBalanced) {
    epsilon = default_balanced_epsilon(options.w, n);
  } else {
    epsilon = standard_epsilon_for_keys(options.w, n, options.smash);
  }
  if (epsilon < 0.0) throw std::invalid_argument("epsilon must be non-negative");
  cfg.m = slots_for(n, epsilon, options.w);
  cfg.smash = options.smash.value_or(default_smash(variant, options.w, cfg.m));
  apply_fractional_r(cfg, options.r);
  cfg.validate(options.layout);
  return cfg;
}

RibbonConfig config_from_space(Variant variant, std::size_t n, std::size_t total_bits, unsigned w,
                               std::uint64_t seed) {
  if (!is_supported_width(w)) {
    throw std::invalid_argument("ribbon width must be one of 16, 32, 64, 128");
  }
  if (total_bits < n || total_bits == 0) {
    throw std::invalid_argument("space budget too small for r >= 1");
  }
  const double per_key = static_cast<double>(total_bits) / static_cast<double>(std::max<std::size_t>(n, 1));
  double epsilon;
  if (variant == Variant::kHomogeneous) {
    // Solve r * (1 + (4 + r/4)/w) = per_key for r.
    const double b = 1.0 + 4.0 / w;
    double r = (-b + std::sqrt(b * b + per_key / w)) * 2.0 * w;
    if (std::abs(r - std::round(r)) < 1e-9) r = std::round(r);
    epsilon = recommended_epsilon(r, w);
  } else if (variant == Variant::kBalanced) {
    epsilon = default_balanced_epsilon(w, n);
  } else {
    epsilon = standard_epsilon_for_keys(w, n, std::nullopt);
  }
  RibbonConfig cfg;
  cfg.variant = variant;
  cfg.w = w;
  cfg.seed = seed;
  cfg.m = slots_for(n, epsilon, w);
  cfg.smash = variant == Variant::kHomogeneous ? 0 : default_smash(Variant::kStandard, w, cfg.m);
  const std::size_t blocks = cfg.num_blocks();
  const double r_target = static_cast<double>(total_bits) / static_cast<double>(cfg.m);
  if (r_target < 1.0) throw std::invalid_argument("space budget too small for r >= 1");
  if (r_target >= 64.0) {
    cfg.r_lower = 64;
    cfg.upper_start_block = blocks;
  } else {
    cfg.r_lower = static_cast<unsigned>(std::floor(r_target));
    // Largest solution not exceeding the budget: w * (blocks * (r_lower + 1) - usb).
    const std::size_t full = blocks * (cfg.r_lower + 1);
    const std::size_t budget_words = total_bits / w;
    cfg.upper_start_block = std::min(blocks, full > budget_words ? full - budget_words : 0);
  }
  cfg.validate();
  return cfg;
}

std::uint64_t next_seed(std::uint64_t seed) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

BuiltFilter build_homogeneous(std::span<const KeyHash> keys, const RibbonConfig& cfg,
                              const FreeVariablePolicy& policy, Layout layout) {
  return dispatch_width(cfg.w, [&]<typename Row>(std::type_identity<Row>) {
    return build_homogeneous_impl<Row>(keys, cfg, policy, layout);
  });
}

BuiltFilter build_homogeneous(std::span<const KeyHash> keys, const BuildOptions& options) {
  const RibbonConfig cfg = make_config(Variant::kHomogeneous, keys.size(), options);
  return build_homogeneous(keys, cfg,
                           options.free_variables.value_or(FreeVariablePolicy::odd_multiple()),
                           options.layout);
}

BuiltFilter build_standard(std::span<const KeyHash> keys, RibbonConfig cfg, unsigned max_retries,
                           RetryMode mode, Layout layout, const FreeVariablePolicy& policy) {
  return dispatch_width(cfg.w, [&]<typename Row>(std::type_identity<Row>) {
    return build_standard_impl<Row>(keys, cfg, max_retries, mode, layout, policy);
  });
}

BuiltFilter build_standard(std::span<const KeyHash> keys, const BuildOptions& options) {
  const RibbonConfig cfg = make_config(Variant::kStandard, keys.size(), options);
  return build_standard(keys, cfg, options.max_retries, options.retry_mode, options.layout,
                        options.free_variables.value_or(FreeVariablePolicy::zeros()));
}

BuiltFilter build_filter(Variant variant, std::span<const KeyHash> keys,
                         const BuildOptions& options) {
  switch (variant) {
    case Variant::kStandard:
      return build_standard(keys, options);
    case Variant::kHomogeneous:
      return build_homogeneous(keys, options);
    case Variant::kBalanced:
      return build_balanced(keys, options);
  }
  throw std::invalid_argument("unknown variant");
}

}  // namespace ribbon
