#include "tiertraffic/rng.hpp"

#include <random>

namespace tiertraffic {

std::uint64_t hash_mix(std::uint64_t seed, std::uint64_t value) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (value + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

const std::array<double, 65536>& standard_normal_table() {
  static const std::array<double, 65536> table = [] {
    std::array<double, 65536> t{};
    std::mt19937_64 rng(0x7461626C65ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : t) v = normal(rng);
    return t;
  }();
  return table;
}

}  // namespace tiertraffic
