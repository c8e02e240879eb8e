#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace hadof {

using Rng = std::mt19937_64;

// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic child seed from a master seed and a tuple of coordinates
// (iteration, subset, phase, ...). Order of coordinates matters.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t h = mix64(master);
  for (auto c : coords) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform,
// unlike std::uniform_real_distribution.
inline double unit_uniform(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform_between(Rng& rng, double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); }

}  // namespace hadof
