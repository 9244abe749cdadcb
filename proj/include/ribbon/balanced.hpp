//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#pragma once

#include "ribbon/filter.hpp"
#include "ribbon/shards.hpp"

#include <span>

namespace ribbon {

// Overhead used by default for Balanced Ribbon: the add-till-failure median
// at the natural shard size, or the Standard value for a single shard.
double default_balanced_epsilon(unsigned w, std::size_t n);

// Experimental load-balanced construction over soft shards of one banding.
//
// Shards are filled level by level. Within a level, keys bumped from the
// previous level go in first, then buckets are tried largest first across
// all shards of the level, so a larger bucket of shard i+1 is attempted
// before a smaller bucket of shard i. A failing bucket is backtracked and
// recorded in the shard's bump mask; its keys move to their secondary shard.
// The final shard must take everything left. Throws ConstructionFailed after
// max_retries seeds.
BuiltFilter build_balanced(std::span<const KeyHash> keys, const BuildOptions& options);

// Membership test reading one bump bit of the key's primary shard.
bool query_balanced(const Filter& filter, KeyHash h);

}  // namespace ribbon
