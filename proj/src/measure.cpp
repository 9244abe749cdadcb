//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#include "ribbon/measure.hpp"

#include "ribbon/banding.hpp"
#include "ribbon/hash.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ribbon {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial, std::uint64_t salt) {
  std::uint64_t state = seed ^ (trial * 0xD1B54A32D192ED03ull) ^ salt;
  return splitmix64(state);
}

double quantile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double RateEstimate::sigma_at(double p) const {
  return trials == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

std::string RateEstimate::to_json(const char* rate_name) const {
  nlohmann::json j;
  j[rate_name] = rate;
  j["ci95"] = {ci95_low, ci95_high};
  j["hits"] = hits;
  j["trials"] = trials;
  return j.dump();
}

RateEstimate make_rate(std::uint64_t hits, std::uint64_t trials) {
  RateEstimate est;
  est.hits = hits;
  est.trials = trials;
  if (trials == 0) return est;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  constexpr double z = 1.959963984540054;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  est.rate = p;
  est.ci95_low = std::max(0.0, centre - half);
  est.ci95_high = std::min(1.0, centre + half);
  return est;
}

std::vector<KeyHash> random_hashes(std::size_t count, std::uint64_t seed) {
  std::vector<KeyHash> out(count);
  std::uint64_t state = seed;
  for (auto& h : out) h = splitmix64(state);
  return out;
}

RateEstimate measure_fpr(const Filter& filter, std::uint64_t trials, std::uint64_t seed) {
  std::uint64_t state = seed ^ 0x5851F42D4C957F2Dull;
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < trials; ++i) hits += filter.contains(splitmix64(state));
  return make_rate(hits, trials);
}

RateEstimate construction_failure_rate(const FailureRateParams& params) {
  if (params.m < params.w) throw std::invalid_argument("m must be at least w");
  const auto n = static_cast<std::size_t>(
      std::llround(static_cast<double>(params.m) / (1.0 + params.epsilon)));
  RibbonConfig cfg;
  cfg.variant = Variant::kStandard;
  cfg.m = params.m;
  cfg.w = params.w;
  cfg.r_lower = params.r;
  cfg.smash = params.smash;
  cfg.upper_start_block = cfg.num_blocks();
  cfg.validate(Layout::kColumnMajor);
  const std::uint64_t failures = dispatch_width(params.w, [&]<typename Row>(std::type_identity<Row>) {
    std::uint64_t failed = 0;
    for (std::uint64_t t = 0; t < params.trials; ++t) {
      RibbonConfig trial_cfg = cfg;
      trial_cfg.seed = trial_seed(params.seed, t, 1);
      const auto keys = random_hashes(n, trial_seed(params.seed, t, 2));
      Banding<Row> banding(cfg.m, cfg.r_upper());
      for (KeyHash h : keys) {
        const auto eq = make_equation<Row>(derive_seeded_hash(h, trial_cfg.seed), trial_cfg);
        if (banding.insert(eq).is_inconsistent()) {
          ++failed;
          break;
        }
      }
    }
    return failed;
  });
  return make_rate(failures, params.trials);
}

std::string AddTillFailureResult::to_json() const {
  nlohmann::json j;
  j["median_epsilon"] = median;
  j["quartiles"] = {q1, q3};
  j["epsilon_at_mean_occupancy"] = epsilon_at_mean_occupancy;
  j["trials"] = epsilons.size();
  return j.dump();
}

AddTillFailureResult add_till_failure(const AddTillFailureParams& params) {
  if (params.m < params.w) throw std::invalid_argument("m must be at least w");
  RibbonConfig cfg;
  cfg.variant = Variant::kStandard;
  cfg.m = params.m;
  cfg.w = params.w;
  cfg.r_lower = params.r;
  cfg.smash = params.smash;
  cfg.upper_start_block = cfg.num_blocks();
  cfg.validate(Layout::kColumnMajor);
  AddTillFailureResult result;
  result.epsilons = dispatch_width(params.w, [&]<typename Row>(std::type_identity<Row>) {
    std::vector<double> eps;
    eps.reserve(params.trials);
    for (std::uint64_t t = 0; t < params.trials; ++t) {
      RibbonConfig trial_cfg = cfg;
      trial_cfg.seed = trial_seed(params.seed, t, 3);
      std::uint64_t state = trial_seed(params.seed, t, 4);
      Banding<Row> banding(cfg.m, cfg.r_upper());
      std::size_t successes = 0;
      for (;;) {
        const KeyHash h = splitmix64(state);
        const auto eq = make_equation<Row>(derive_seeded_hash(h, trial_cfg.seed), trial_cfg);
        if (banding.insert(eq).is_inconsistent()) break;
        ++successes;
      }
      eps.push_back((static_cast<double>(cfg.m) - static_cast<double>(successes)) /
                    static_cast<double>(successes));
    }
    return eps;
  });
  result.median = quantile(result.epsilons, 0.5);
  result.q1 = quantile(result.epsilons, 0.25);
  result.q3 = quantile(result.epsilons, 0.75);
  double mean_successes = 0.0;
  for (double eps : result.epsilons) mean_successes += static_cast<double>(params.m) / (1.0 + eps);
  if (!result.epsilons.empty()) {
    mean_successes /= static_cast<double>(result.epsilons.size());
    result.epsilon_at_mean_occupancy = (static_cast<double>(params.m) - mean_successes) / mean_successes;
  }
  return result;
}

double space_overhead(double bits_per_key, double fp_rate) {
  return bits_per_key / std::log2(1.0 / fp_rate) - 1.0;
}

}  // namespace ribbon
