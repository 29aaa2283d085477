#pragma once

// Portable, bit-reproducible random helpers. The std:: distributions are
// implementation-defined, so every draw that feeds an output goes through
// these instead.

#include <cstdint>
#include <random>
#include <vector>

namespace qcg {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a tag.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return splitmix64(base ^ splitmix64(tag + 0x632BE59BD9B4E019ULL));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [lo, hi] (inclusive) via rejection sampling.
inline std::uint64_t uniform_int(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  const std::uint64_t span = hi - lo;
  if (span == UINT64_MAX) return rng();
  const std::uint64_t range = span + 1;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return lo + v % range;
}

/// Fisher-Yates shuffle using uniform_int.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, 0, i - 1));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace qcg
