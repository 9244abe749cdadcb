//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

// ribbon: build, query and measure Ribbon filters from the command line.
// All measurement output is one JSON object per line.

#include "ribbon/balanced.hpp"
#include "ribbon/filter.hpp"
#include "ribbon/key_hash.hpp"
#include "ribbon/measure.hpp"
#include "ribbon/serialization.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace ribbon;

std::vector<KeyHash> read_key_hashes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open key file " + path);
  std::vector<KeyHash> hashes;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    hashes.push_back(hash_key(line));
  }
  return hashes;
}

struct BuildArgs {
  std::string keys;
  std::size_t random_keys = 0;
  std::string variant = "standard";
  unsigned w = 64;
  double r = 7.0;
  std::optional<double> epsilon;
  std::optional<std::size_t> space_bits;
  std::optional<unsigned> smash;
  std::uint64_t seed = 0;
  unsigned max_retries = 8;
  bool column_major = false;
  std::string out;
};

int run_build(const BuildArgs& a) {
  const Variant variant = parse_variant(a.variant);
  std::vector<KeyHash> keys =
      a.keys.empty() ? random_hashes(a.random_keys, a.seed ^ 0xA0761D6478BD642Full)
                     : read_key_hashes(a.keys);
  if (variant == Variant::kHomogeneous && keys.size() < 10000) {
    std::cerr << "warning: homogeneous filters with fewer than 10000 keys have a highly "
                 "variable FP rate; consider --variant standard\n";
  }
  BuildOptions opts;
  opts.w = a.w;
  opts.r = a.r;
  opts.epsilon = a.epsilon;
  opts.smash = a.smash;
  opts.seed = a.seed;
  opts.max_retries = a.max_retries;
  opts.layout = a.column_major ? Layout::kColumnMajor : Layout::kInterleaved;

  std::optional<BuiltFilter> built;
  if (a.space_bits) {
    if (variant == Variant::kBalanced) {
      throw std::invalid_argument("--space-bits is not supported for balanced filters");
    }
    RibbonConfig cfg = config_from_space(variant, keys.size(), *a.space_bits, a.w, a.seed);
    if (a.smash) cfg.smash = *a.smash;
    if (variant == Variant::kHomogeneous) {
      built.emplace(build_homogeneous(keys, cfg, FreeVariablePolicy::odd_multiple(), opts.layout));
    } else {
      built.emplace(build_standard(keys, cfg, a.max_retries, RetryMode::kReseed, opts.layout));
    }
  } else {
    built.emplace(build_filter(variant, keys, opts));
  }
  if (!a.out.empty()) save_filter(built->filter, a.out, kKeyHashFnv1aFmix64);
  std::cout << built->report.to_json() << '\n';
  return 0;
}

Filter load_checked(const std::string& path) {
  std::uint16_t hash_id = 0;
  Filter f = load_filter(path, &hash_id);
  if (hash_id != kKeyHashFnv1aFmix64) {
    throw FormatError("unknown key hash function id " + std::to_string(hash_id), 14);
  }
  return f;
}

int run_query(const std::string& filter_path, const std::string& keys_path) {
  const Filter filter = load_checked(filter_path);
  std::ifstream in(keys_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open key file " + keys_path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::cout << (filter.contains(hash_key(line)) ? "true" : "false") << '\n';
  }
  return 0;
}

int run_fpr(const std::string& filter_path, std::uint64_t trials, std::uint64_t seed) {
  const Filter filter = load_checked(filter_path);
  const RateEstimate est = measure_fpr(filter, trials, seed);
  nlohmann::json j;
  j["fp_rate"] = est.rate;
  j["ci95"] = {est.ci95_low, est.ci95_high};
  j["trials"] = est.trials;
  std::cout << j.dump() << '\n';
  return 0;
}

int run_overhead(const std::string& filter_path, std::uint64_t trials, std::uint64_t seed) {
  const Filter filter = load_checked(filter_path);
  const RateEstimate est = measure_fpr(filter, trials, seed);
  nlohmann::json j;
  j["bits_per_key"] = filter.bits_per_key();
  j["fp_rate"] = est.rate;
  j["ci95"] = {est.ci95_low, est.ci95_high};
  j["overhead_vs_entropy"] =
      est.rate > 0.0 ? nlohmann::json(space_overhead(filter.bits_per_key(), est.rate))
                     : nlohmann::json(nullptr);
  std::cout << j.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build, query and measure Ribbon filters"};
  app.require_subcommand(1);

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build", "Build a filter from newline-delimited keys");
  auto* keys_opt = build_cmd->add_option("keys", build.keys, "Key file, one key per line");
  build_cmd->add_option("--random-keys", build.random_keys, "Use N random key hashes instead")
      ->excludes(keys_opt);
  build_cmd->add_option("--variant", build.variant, "standard, homogeneous or balanced")
      ->capture_default_str();
  build_cmd->add_option("--w", build.w, "Ribbon width")
      ->check(CLI::IsMember({16u, 32u, 64u, 128u}))
      ->capture_default_str();
  auto* r_opt = build_cmd->add_option("--r", build.r, "Bits per key, may be fractional")
                    ->check(CLI::Range(1.0, 64.0))
                    ->capture_default_str();
  auto* eps_opt = build_cmd->add_option("--epsilon", build.epsilon, "Space overhead (m - n) / n");
  build_cmd->add_option("--space-bits", build.space_bits, "Total solution bit budget")
      ->excludes(r_opt)
      ->excludes(eps_opt);
  build_cmd->add_option("--smash", build.smash, "Smash value");
  build_cmd->add_option("--seed", build.seed, "Hash seed")->capture_default_str();
  build_cmd->add_option("--max-retries", build.max_retries, "Construction attempts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  build_cmd->add_flag("--column-major", build.column_major, "Plain column-major layout");
  build_cmd->add_option("--out", build.out, "Output filter file");

  std::string filter_path;
  std::string query_keys;
  auto* query_cmd = app.add_subcommand("query", "Print true/false per key");
  query_cmd->add_option("filter", filter_path, "Filter file")->required();
  query_cmd->add_option("keys", query_keys, "Key file")->required();

  std::uint64_t trials = 10'000'000;
  std::uint64_t seed = 0;
  auto* fpr_cmd = app.add_subcommand("fpr", "Measure the false positive rate");
  fpr_cmd->add_option("filter", filter_path, "Filter file")->required();
  fpr_cmd->add_option("--trials", trials, "Random non-member queries")
      ->check(CLI::Range(std::uint64_t{100'000}, ~std::uint64_t{0}))
      ->capture_default_str();
  fpr_cmd->add_option("--seed", seed, "Sampling seed")->capture_default_str();

  auto* overhead_cmd = app.add_subcommand("overhead", "Space overhead against log2(1/f)");
  overhead_cmd->add_option("filter", filter_path, "Filter file")->required();
  overhead_cmd->add_option("--trials", trials, "Random non-member queries")
      ->check(CLI::Range(std::uint64_t{100'000}, ~std::uint64_t{0}))
      ->capture_default_str();
  overhead_cmd->add_option("--seed", seed, "Sampling seed")->capture_default_str();

  FailureRateParams fr;
  auto* fr_cmd = app.add_subcommand("failure-rate", "Standard construction failure rate");
  fr_cmd->add_option("--variant", build.variant, "Only standard is supported")
      ->check(CLI::IsMember({"standard"}));
  fr_cmd->add_option("--w", fr.w, "Ribbon width")
      ->check(CLI::IsMember({16u, 32u, 64u, 128u}))
      ->capture_default_str();
  fr_cmd->add_option("--m", fr.m, "Rows")->required();
  fr_cmd->add_option("--epsilon", fr.epsilon, "Space overhead")->required();
  fr_cmd->add_option("--smash", fr.smash, "Smash value")->capture_default_str();
  fr_cmd->add_option("--r", fr.r, "Right-hand side bits")
      ->check(CLI::Range(1u, 64u))
      ->capture_default_str();
  fr_cmd->add_option("--trials", fr.trials, "Construction attempts")
      ->check(CLI::Range(std::uint64_t{200}, ~std::uint64_t{0}))
      ->capture_default_str();
  fr_cmd->add_option("--seed", fr.seed, "Trial seed")->capture_default_str();

  AddTillFailureParams atf;
  auto* atf_cmd = app.add_subcommand("add-till-failure", "Occupancy when the first key fails");
  atf_cmd->add_option("--w", atf.w, "Ribbon width")
      ->check(CLI::IsMember({16u, 32u, 64u, 128u}))
      ->capture_default_str();
  atf_cmd->add_option("--m", atf.m, "Rows")->required();
  atf_cmd->add_option("--smash", atf.smash, "Smash value")->capture_default_str();
  atf_cmd->add_option("--r", atf.r, "Right-hand side bits")
      ->check(CLI::Range(1u, 64u))
      ->capture_default_str();
  atf_cmd->add_option("--trials", atf.trials, "Trials")->capture_default_str();
  atf_cmd->add_option("--seed", atf.seed, "Trial seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build_cmd) {
      if (build.keys.empty() && build.random_keys == 0 && build_cmd->count("--random-keys") == 0) {
        throw std::invalid_argument("build needs a key file or --random-keys");
      }
      return run_build(build);
    }
    if (*query_cmd) return run_query(filter_path, query_keys);
    if (*fpr_cmd) return run_fpr(filter_path, trials, seed);
    if (*overhead_cmd) return run_overhead(filter_path, trials, seed);
    if (*fr_cmd) {
      std::cout << construction_failure_rate(fr).to_json("failure_rate") << '\n';
      return 0;
    }
    if (*atf_cmd) {
      std::cout << add_till_failure(atf).to_json() << '\n';
      return 0;
    }
  } catch (const ConstructionFailed& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
