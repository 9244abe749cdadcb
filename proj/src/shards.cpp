//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#include "ribbon/shards.hpp"

#include "ribbon/hash.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace ribbon {

namespace {

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

double pick_alpha(std::size_t num_shards, std::size_t n) {
  if (num_shards <= 1) return 0.0;
  const double per_shard = std::max(1.0, static_cast<double>(n) / static_cast<double>(num_shards));
  const double raw = 3.5 / std::sqrt(per_shard);
  return std::min(0.5, std::exp2(std::round(std::log2(raw))));
}

}  // namespace

unsigned ShardPlan::level_of_shard(std::size_t shard) const {
  const auto it = std::upper_bound(level_first_shard.begin(), level_first_shard.end(), shard);
  return static_cast<unsigned>(it - level_first_shard.begin());
}

std::size_t ShardPlan::shards_in_level(unsigned level) const {
  return level_first_shard[level] - level_first_shard[level - 1];
}

ShardPlan plan_with_shards(std::size_t num_shards, std::size_t n) {
  if (!is_power_of_two(num_shards)) {
    throw std::invalid_argument("shard count must be a power of two");
  }
  ShardPlan plan;
  plan.num_shards = num_shards;
  plan.num_levels = static_cast<unsigned>(std::countr_zero(num_shards)) + 1;
  plan.alpha = pick_alpha(num_shards, n);
  std::size_t first = 0;
  for (unsigned level = 1; level <= plan.num_levels; ++level) {
    plan.level_first_shard.push_back(first);
    // ceil(2^(levels - level - 1))
    const int exponent = static_cast<int>(plan.num_levels) - static_cast<int>(level) - 1;
    first += exponent >= 0 ? std::size_t{1} << exponent : 1;
  }
  plan.level_first_shard.push_back(first);
  return plan;
}

ShardPlan plan_shards(std::size_t n, unsigned w, std::size_t target_shard_keys) {
  if (n == 0) throw std::invalid_argument("plan_shards needs n > 0");
  const std::size_t target = target_shard_keys != 0 ? target_shard_keys : std::size_t{w} * w / 4;
  const double ratio = static_cast<double>(n) / static_cast<double>(target);
  std::size_t shards = 1;
  if (ratio > 1.0) {
    const auto exponent = static_cast<unsigned>(std::lround(std::log2(ratio)));
    shards = std::size_t{1} << std::min(exponent, 40u);
  }
  while (shards > n) shards >>= 1;
  return plan_with_shards(shards, n);
}

const std::array<std::uint64_t, kBucketsPerShard>& bucket_thresholds() {
  static const auto thresholds = [] {
    std::array<long double, kBucketsPerShard> weight{};
    long double total = 0;
    for (unsigned b = 0; b < kBucketsPerShard; ++b) {
      weight[b] = std::pow(2.0L, -0.5L * b);
      total += weight[b];
    }
    std::array<std::uint64_t, kBucketsPerShard> out{};
    long double cumulative = 0;
    for (unsigned b = 0; b + 1 < kBucketsPerShard; ++b) {
      cumulative += weight[b] / total;
      out[b] = static_cast<std::uint64_t>(cumulative * 18446744073709551616.0L);
    }
    out[kBucketsPerShard - 1] = ~std::uint64_t{0};
    return out;
  }();
  return thresholds;
}

KeyLocation assign_locations(KeyHash seeded, const ShardPlan& plan) {
  KeyLocation loc;
  const std::uint64_t bucket_hash = seeded * kBucketMultiplier;
  const auto& thresholds = bucket_thresholds();
  while (loc.bucket + 1 < kBucketsPerShard && bucket_hash >= thresholds[loc.bucket]) {
    ++loc.bucket;
  }
  if (plan.num_shards == 1) return loc;

  const double s = static_cast<double>(plan.num_shards);
  const double level1 = static_cast<double>(plan.shards_in_level(1));
  const double heavy = 1.0 + plan.alpha;
  const double light = 1.0 - plan.alpha;
  // Total weight level1 * (1 + alpha) + (s - level1) * (1 - alpha) == s.
  const double x = static_cast<double>((seeded * kPrimaryShardMultiplier) >> 11) * 0x1p-53 * s;
  std::size_t primary;
  if (x < level1 * heavy) {
    primary = static_cast<std::size_t>(x / heavy);
  } else {
    primary = static_cast<std::size_t>(level1) +
              static_cast<std::size_t>((x - level1 * heavy) / light);
  }
  loc.primary = std::min(primary, plan.num_shards - 1);

  const unsigned level = plan.level_of_shard(loc.primary);
  const unsigned next = std::min(level + 1, plan.num_levels);
  if (next == level) {
    loc.secondary = loc.primary;
  } else {
    const std::size_t first = plan.level_first_shard[next - 1];
    const std::size_t count = plan.shards_in_level(next);
    loc.secondary = first + fast_range64(seeded * kSecondaryShardMultiplier, count);
  }
  return loc;
}

std::size_t BalancedMetadata::shard_first_start(std::size_t shard) const {
  const std::size_t s = plan.num_shards;
  if (s == 1) return 0;
  const std::size_t shared = num_starts - last_shard_starts;
  if (shard >= s - 1) return shared;
  return static_cast<std::size_t>(static_cast<u128>(shard) * shared / (s - 1));
}

std::size_t BalancedMetadata::shard_num_starts(std::size_t shard) const {
  if (shard + 1 >= plan.num_shards) return num_starts - shard_first_start(shard);
  return shard_first_start(shard + 1) - shard_first_start(shard);
}

std::size_t balanced_start(KeyHash seeded, const BalancedMetadata& meta, std::size_t shard,
                           unsigned smash) {
  if (meta.plan.num_shards == 1) return start_position(seeded, meta.num_starts, smash);
  return meta.shard_first_start(shard) + fast_range64(seeded, meta.shard_num_starts(shard));
}

}  // namespace ribbon
