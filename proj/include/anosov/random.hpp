#pragma once

#include <cstdint>
#include <cstdlib>
#include <random>

namespace anosov {

using Rng = std::mt19937_64;

// ANOSOV_SEED fixes every random choice in the library and the CLI; salt
// separates independent streams drawn from one seed.
inline std::uint64_t base_seed() {
  const char* env = std::getenv("ANOSOV_SEED");
  if (env && *env) return std::strtoull(env, nullptr, 10);
  return 20240101u;
}

inline Rng make_rng(std::uint64_t salt = 0) {
  std::seed_seq seq{std::uint32_t(base_seed()), std::uint32_t(base_seed() >> 32),
                    std::uint32_t(salt), std::uint32_t(salt >> 32)};
  return Rng(seq);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace anosov
