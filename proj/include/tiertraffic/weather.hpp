#pragma once

#include <cstdint>
#include <string>

#include "tiertraffic/frame.hpp"

namespace tiertraffic {

enum class WeatherKind { kSunny, kRainy, kSnowy };

std::string to_string(WeatherKind kind);
/// Accepts "sunny", "rainy", "snowy".
WeatherKind parse_weather_kind(const std::string& name);

/// Parameterized precipitation: illumination scaling, box blur, then a seeded
/// overlay of streaks (rain) or specks (snow) that overwrites exactly
/// floor(noise_density * W * H) pixels per frame.
struct WeatherModel {
  WeatherKind kind = WeatherKind::kSunny;
  double noise_density = 0.0;
  int speck_size = 1;  // snow speck side / rain streak length, px
  int blur_radius = 0;
  double illumination = 1.0;
  std::uint64_t seed = 1;

  static WeatherModel sunny(std::uint64_t seed = 1);
  static WeatherModel rainy(std::uint64_t seed = 1);
  static WeatherModel snowy(std::uint64_t seed = 1);
  static WeatherModel preset(WeatherKind kind, std::uint64_t seed = 1);

  void validate() const;
};

/// Sunny is the identity. Otherwise deterministic in (frame, model); the
/// per-frame stream is derived from model.seed and frame.index().
Frame apply_weather(const Frame& frame, const WeatherModel& model);

}  // namespace tiertraffic
