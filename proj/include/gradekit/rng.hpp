#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gradekit {

// Deterministic random helpers. std::mt19937_64 output is fully specified by
// the standard, but the standard distributions are not, so every draw that
// feeds a persisted artifact goes through the routines below instead.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Mixes a base seed with a textual tag (e.g. an exercise id) into a new seed.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);

// Uniform integer in [0, n), n > 0. Lemire multiply-shift; slight modulo bias
// of < 2^-64 per draw is irrelevant at the scales used here.
inline std::uint64_t bounded(std::mt19937_64& g, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(g()) * n) >> 64);
}

// Uniform double in [0, 1) with 53 random bits.
inline double unit_double(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Standard normal via Marsaglia polar (no cached spare; one value per call).
double standard_normal(std::mt19937_64& g);

}  // namespace gradekit
