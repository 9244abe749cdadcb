//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#pragma once

#include "ribbon/filter.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ribbon {

// A binomial proportion with its Wilson 95% interval.
struct RateEstimate {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  double rate = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;

  // Standard deviation of the estimate if the true rate were p.
  double sigma_at(double p) const;
  std::string to_json(const char* rate_name) const;
};

RateEstimate make_rate(std::uint64_t hits, std::uint64_t trials);

// `count` pseudo-random key hashes from a seed (splitmix64 stream).
std::vector<KeyHash> random_hashes(std::size_t count, std::uint64_t seed);

// Queries `trials` random 64-bit hashes, treating every hit as a false
// positive. Collisions with members have probability n * 2^-64 per query.
RateEstimate measure_fpr(const Filter& filter, std::uint64_t trials, std::uint64_t seed);

struct FailureRateParams {
  unsigned w = 64;
  std::size_t m = 1024;
  double epsilon = 0.05;
  unsigned smash = 0;
  unsigned r = 16;
  std::uint64_t trials = 200;
  std::uint64_t seed = 0;
};

// Single-attempt Standard construction failure fraction over fresh seeds
// and random keys, with n = round(m / (1 + eps)) keys per trial.
RateEstimate construction_failure_rate(const FailureRateParams& params);

struct AddTillFailureParams {
  unsigned w = 64;
  std::size_t m = 1024;
  unsigned smash = 0;
  unsigned r = 16;
  std::uint64_t trials = 201;
  std::uint64_t seed = 0;
};

struct AddTillFailureResult {
  // Per trial (m - successes) / successes, in trial order.
  std::vector<double> epsilons;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  // (m - mean successes) / mean successes.
  double epsilon_at_mean_occupancy = 0.0;
  std::string to_json() const;
};

// Streams random equations into a fresh banding until the first
// inconsistent one.
AddTillFailureResult add_till_failure(const AddTillFailureParams& params);

// bits_per_key / log2(1/f) - 1.
double space_overhead(double bits_per_key, double fp_rate);

}  // namespace ribbon
