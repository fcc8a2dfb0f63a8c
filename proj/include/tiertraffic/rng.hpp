#pragma once

#include <array>
#include <cstdint>

namespace tiertraffic {

/// splitmix64 finalizer over (seed, value); used to derive per-frame and
/// per-pixel streams so frames can be produced independently by index.
std::uint64_t hash_mix(std::uint64_t seed, std::uint64_t value);

/// 65536 fixed N(0, 1) samples, generated once from a constant seed.
const std::array<double, 65536>& standard_normal_table();

}  // namespace tiertraffic
