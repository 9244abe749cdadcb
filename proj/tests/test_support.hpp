//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace testing {

inline std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::vector<std::uint64_t> hashes(std::size_t count, std::uint64_t seed) {
  std::vector<std::uint64_t> out(count);
  for (auto& h : out) h = splitmix(seed);
  return out;
}

// Upper tail critical value of chi-squared at p = 0.001 (Wilson-Hilferty).
inline double chi2_critical_001(double df) {
  constexpr double z = 3.090232306167813;
  const double a = 2.0 / (9.0 * df);
  return df * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

inline double chi2_statistic(const std::vector<std::uint64_t>& counts, double expected) {
  double stat = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

// Probability that w random GF(2) rows of length w, each with bit 0 forced
// to one, are linearly independent.
inline double square_success_probability(unsigned w) {
  double p = 1.0;
  for (unsigned i = 1; i < w; ++i) p *= 1.0 - std::ldexp(1.0, -static_cast<int>(i));
  return p;
}

inline double binomial_sigma(double p, double trials) { return std::sqrt(p * (1.0 - p) / trials); }

}  // namespace testing
