//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#include "ribbon/balanced.hpp"

#include "ribbon/banding.hpp"
#include "ribbon/hash.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace ribbon {

namespace {

struct PlacedKey {
  KeyHash seeded;
  KeyLocation loc;
};

template <typename Row>
Equation<Row> balanced_equation(KeyHash seeded, const BalancedMetadata& meta, std::size_t shard,
                                const RibbonConfig& cfg) {
  Equation<Row> eq;
  eq.start = balanced_start(seeded, meta, shard, cfg.smash);
  eq.coeff = coefficient_vector<Row>(seeded);
  eq.rhs = fingerprint(seeded, cfg.r_upper());
  return eq;
}

std::size_t last_shard_starts_for(const ShardPlan& plan, std::size_t n, const RibbonConfig& cfg) {
  const std::size_t num_starts = cfg.num_starts();
  if (plan.num_shards == 1) return num_starts;
  // The final shard is budgeted like a standalone Standard Ribbon for its
  // expected n/s keys; the other shards split what is left.
  const double per_shard = static_cast<double>(n) / static_cast<double>(plan.num_shards);
  const double eps = standard_epsilon(cfg.w, static_cast<std::size_t>(per_shard), 0);
  const auto rows = static_cast<std::size_t>(std::ceil(per_shard * (1.0 + eps)));
  const std::size_t starts = rows > cfg.w - 1 ? rows - (cfg.w - 1) : 1;
  const std::size_t max_starts = num_starts - (plan.num_shards - 1);
  return std::clamp<std::size_t>(starts, 1, max_starts);
}

struct AttemptResult {
  bool ok = false;
  std::size_t redundant = 0;
  std::size_t bumped = 0;
};

template <typename Row>
AttemptResult run_attempt(std::span<const KeyHash> keys, const RibbonConfig& cfg,
                          BalancedMetadata& meta, Banding<Row>& banding) {
  const ShardPlan& plan = meta.plan;
  const std::size_t s = plan.num_shards;
  AttemptResult result;

  // by_bucket[shard * 8 + bucket] lists seeded hashes with that primary.
  std::vector<std::vector<KeyHash>> by_bucket(s * kBucketsPerShard);
  std::vector<std::vector<KeyHash>> bumped_into(s);
  std::vector<std::size_t> secondary_of(s * kBucketsPerShard, 0);
  for (KeyHash h : keys) {
    const KeyHash seeded = derive_seeded_hash(h, cfg.seed);
    const KeyLocation loc = assign_locations(seeded, plan);
    by_bucket[loc.primary * kBucketsPerShard + loc.bucket].push_back(seeded);
  }

  std::vector<std::size_t> added(s, 0);
  std::vector<std::size_t> batch_rows;

  auto insert_all = [&](std::span<const KeyHash> batch, std::size_t shard) {
    batch_rows.clear();
    for (KeyHash seeded : batch) {
      const auto outcome = banding.insert(balanced_equation<Row>(seeded, meta, shard, cfg));
      if (outcome.is_inconsistent()) return false;
      if (outcome.is_inserted()) {
        batch_rows.push_back(outcome.row());
      } else {
        ++result.redundant;
      }
    }
    return true;
  };

  for (unsigned level = 1; level <= plan.num_levels; ++level) {
    const std::size_t first = plan.level_first_shard[level - 1];
    const std::size_t last = plan.level_first_shard[level];
    for (std::size_t shard = first; shard < last; ++shard) {
      if (!insert_all(bumped_into[shard], shard)) return result;
      added[shard] += bumped_into[shard].size();
    }
    if (level == plan.num_levels) {
      for (std::size_t shard = first; shard < last; ++shard) {
        for (unsigned bucket = 0; bucket < kBucketsPerShard; ++bucket) {
          if (!insert_all(by_bucket[shard * kBucketsPerShard + bucket], shard)) return result;
        }
      }
      break;
    }
    for (unsigned bucket = 0; bucket < kBucketsPerShard; ++bucket) {
      for (std::size_t shard = first; shard < last; ++shard) {
        const auto& batch = by_bucket[shard * kBucketsPerShard + bucket];
        if (batch.empty()) continue;
        const std::size_t capacity = meta.shard_num_starts(shard);
        const double remaining =
            static_cast<double>(capacity) - static_cast<double>(added[shard]);
        const double slack = remaining > 0 ? 2.0 * std::sqrt(remaining) : 0.0;
        bool placed = false;
        if (static_cast<double>(batch.size()) <= remaining + slack) {
          const std::size_t redundant_before = result.redundant;
          placed = insert_all(batch, shard);
          if (!placed) {
            banding.backtrack(batch_rows);
            result.redundant = redundant_before;
          }
        }
        if (placed) {
          added[shard] += batch.size();
          continue;
        }
        meta.bump_masks[shard] |= static_cast<std::uint8_t>(1u << bucket);
        result.bumped += batch.size();
        for (KeyHash seeded : batch) {
          const KeyLocation loc = assign_locations(seeded, plan);
          bumped_into[loc.secondary].push_back(seeded);
        }
      }
    }
  }
  result.ok = true;
  return result;
}

template <typename Row>
BuiltFilter build_balanced_impl(std::span<const KeyHash> keys, RibbonConfig cfg,
                                const ShardPlan& plan, unsigned max_retries, Layout layout) {
  const std::size_t n = keys.size();
  const unsigned attempts_allowed = std::max(1u, max_retries);
  for (unsigned attempt = 1; attempt <= attempts_allowed; ++attempt) {
    cfg.validate(layout);
    BalancedMetadata meta;
    meta.plan = plan;
    meta.num_starts = cfg.num_starts();
    meta.last_shard_starts = last_shard_starts_for(plan, n, cfg);
    meta.bump_masks.assign(plan.num_shards, 0);

    Banding<Row> banding(cfg.m, cfg.r_upper());
    const AttemptResult result = run_attempt<Row>(keys, cfg, meta, banding);
    if (result.ok) {
      auto solution = back_substitute(banding, cfg.r_lower, cfg.upper_start_block,
                                      FreeVariablePolicy::zeros(), layout);
      Filter filter(cfg, n, std::move(solution), std::move(meta));
      BuildReport report;
      report.variant = Variant::kBalanced;
      report.seed_used = cfg.seed;
      report.attempts = attempt;
      report.n = n;
      report.m = cfg.m;
      report.epsilon_configured =
          n == 0 ? std::numeric_limits<double>::infinity()
                 : (static_cast<double>(cfg.m) - static_cast<double>(n)) / static_cast<double>(n);
      report.bits_per_key = filter.bits_per_key();
      report.redundant_count = result.redundant;
      report.num_shards = plan.num_shards;
      report.bumped_keys = result.bumped;
      return {std::move(filter), report};
    }
    cfg.seed = next_seed(cfg.seed);
  }
  throw ConstructionFailed(attempts_allowed);
}

}  // namespace

double default_balanced_epsilon(unsigned w, std::size_t n) {
  const ShardPlan plan = n == 0 ? plan_with_shards(1, 0) : plan_shards(n, w);
  const std::size_t s = plan.num_shards;
  if (s == 1) return standard_epsilon_for_keys(w, n, std::nullopt);
  // Shards before the last fill to roughly their add-till-failure occupancy
  // at the natural shard size; 25% on top keeps the final shard from
  // inheriting too many bumped keys.
  const double shared = 1.25 * add_till_failure_epsilon(w, std::size_t{w} * w / 4, w / 2);
  const double last = standard_epsilon_for_keys(w, n / s, 0u);
  return (shared * static_cast<double>(s - 1) + last) / static_cast<double>(s);
}

BuiltFilter build_balanced(std::span<const KeyHash> keys, const BuildOptions& options) {
  if (!is_supported_width(options.w)) {
    throw std::invalid_argument("ribbon width must be one of 16, 32, 64, 128");
  }
  const std::size_t n = keys.size();
  const ShardPlan plan =
      n == 0 ? plan_with_shards(1, 0) : plan_shards(n, options.w, options.target_shard_keys);

  RibbonConfig cfg;
  cfg.variant = Variant::kBalanced;
  cfg.w = options.w;
  cfg.seed = options.seed;
  const double epsilon = options.epsilon.value_or(
      plan.num_shards == 1 ? standard_epsilon_for_keys(options.w, n, options.smash)
                           : default_balanced_epsilon(options.w, n));
  cfg.m = slots_for(n, epsilon, options.w);
  cfg.smash = plan.num_shards == 1
                  ? options.smash.value_or(default_smash(Variant::kStandard, options.w, cfg.m))
                  : 0;
  apply_fractional_r(cfg, options.r);
  if (cfg.num_starts() < plan.num_shards) {
    throw std::invalid_argument("too few start positions for the shard count");
  }
  return dispatch_width(cfg.w, [&]<typename Row>(std::type_identity<Row>) {
    return build_balanced_impl<Row>(keys, cfg, plan, options.max_retries, options.layout);
  });
}

bool query_balanced(const Filter& filter, KeyHash h) {
  const BalancedMetadata* meta = filter.balanced();
  if (meta == nullptr) throw std::invalid_argument("filter has no balanced metadata");
  const RibbonConfig& cfg = filter.config();
  const KeyHash seeded = derive_seeded_hash(h, cfg.seed);
  const KeyLocation loc = assign_locations(seeded, meta->plan);
  const std::size_t shard = meta->is_bumped(loc.primary, loc.bucket) ? loc.secondary : loc.primary;
  const std::size_t start = balanced_start(seeded, *meta, shard, cfg.smash);
  const std::uint64_t expected = fingerprint(seeded, cfg.r_upper());
  return std::visit(
      [&](const auto& solution) {
        using Row = typename std::remove_cvref_t<decltype(solution)>::Word;
        return solution.matches(start, coefficient_vector<Row>(seeded), expected);
      },
      filter.storage());
}

}  // namespace ribbon
