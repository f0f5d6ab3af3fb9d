#include "gradekit/rng.hpp"

#include <cmath>

namespace gradekit {

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  // FNV-1a over the tag, then one splitmix round with the base.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t state = base ^ h;
  return splitmix64(state);
}

double standard_normal(std::mt19937_64& g) {
  while (true) {
    double u = 2.0 * unit_double(g) - 1.0;
    double v = 2.0 * unit_double(g) - 1.0;
    double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

}  // namespace gradekit
