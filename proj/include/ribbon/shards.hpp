//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#pragma once

#include "ribbon/config.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace ribbon {

inline constexpr unsigned kBucketsPerShard = 8;
inline constexpr std::uint64_t kPrimaryShardMultiplier = 0x27D4EB2F165667C5ull;
inline constexpr std::uint64_t kSecondaryShardMultiplier = 0xFF51AFD7ED558CCDull;
inline constexpr std::uint64_t kBucketMultiplier = 0xC4CEB9FE1A85EC53ull;

// Soft-shard geometry for Balanced Ribbon. Shards are numbered in level
// order: level 1 holds shards [0, s/2), level i holds ceil(2^(levels-i-1))
// shards, and the last level is the single final shard.
struct ShardPlan {
  std::size_t num_shards = 1;
  unsigned num_levels = 1;
  double alpha = 0.0;
  // level_first_shard[i] is the first shard of level i + 1; one past the end
  // holds num_shards.
  std::vector<std::size_t> level_first_shard;

  unsigned level_of_shard(std::size_t shard) const;
  std::size_t shards_in_level(unsigned level) const;

  friend bool operator==(const ShardPlan&, const ShardPlan&) = default;
};

// Builds a plan with a power-of-two shard count whose keys per shard is
// nearest (in log scale) to target_shard_keys; the default target is w^2/4.
// alpha = 3.5/sqrt(n/s) rounded to the nearest power of two, capped at 1/2.
ShardPlan plan_shards(std::size_t n, unsigned w, std::size_t target_shard_keys = 0);

// Plan with an explicit shard count (power of two); alpha as above.
ShardPlan plan_with_shards(std::size_t num_shards, std::size_t n);

struct KeyLocation {
  std::size_t primary = 0;
  std::size_t secondary = 0;
  unsigned bucket = 0;

  friend bool operator==(const KeyLocation&, const KeyLocation&) = default;
};

// Upper thresholds (on a uniform 64-bit value) of buckets 0..7, whose
// probabilities are proportional to 2^(-b/2). Bucket 0 is the largest.
const std::array<std::uint64_t, kBucketsPerShard>& bucket_thresholds();

// Locations from a seeded key hash.
KeyLocation assign_locations(KeyHash seeded, const ShardPlan& plan);

// Per-shard bump masks plus the start-range split needed by queries.
// Shards 0..s-2 share num_starts - last_shard_starts evenly; the final shard
// owns the last last_shard_starts start positions.
struct BalancedMetadata {
  ShardPlan plan;
  std::size_t num_starts = 0;
  std::size_t last_shard_starts = 0;
  std::vector<std::uint8_t> bump_masks;

  std::size_t shard_first_start(std::size_t shard) const;
  std::size_t shard_num_starts(std::size_t shard) const;
  bool is_bumped(std::size_t shard, unsigned bucket) const {
    return (bump_masks[shard] >> bucket) & 1;
  }
  std::size_t metadata_bits() const { return 8 * bump_masks.size(); }

  friend bool operator==(const BalancedMetadata&, const BalancedMetadata&) = default;
};

// Start row of a key placed in `shard`; smash applies only to a single-shard
// plan, which then coincides with Standard Ribbon.
std::size_t balanced_start(KeyHash seeded, const BalancedMetadata& meta, std::size_t shard,
                           unsigned smash);

}  // namespace ribbon
