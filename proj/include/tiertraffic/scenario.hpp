#pragma once

#include <cstdint>
#include <vector>

#include "tiertraffic/channel.hpp"
#include "tiertraffic/scene.hpp"
#include "tiertraffic/tier.hpp"

namespace tiertraffic {

/// A group of vehicles that drive in side by side and stand still together.
struct StopEvent {
  double stop_time = 0.0;  // s, when the vehicles come to rest
  double stop_seconds = 13.0;
  int first_lane = 0;
  int vehicles = 4;
};

/// Knobs of the synthetic desk-scale road: vertical lanes, traffic moving
/// down the frame, referential rows across it.
struct DeskScenarioParams {
  int width = 320;
  int height = 180;
  double fps = 15.0;
  double duration = 120.0;  // s
  double meters_per_pixel = 0.2;
  std::uint64_t seed = 1;

  int lanes = 12;
  double lane_spacing = 24.0;  // px
  double first_lane_x = 16.0;  // px
  int first_free_lane = 8;     // lanes from here on carry free-flow traffic only
  double min_speed = 6.0;      // m/s
  double max_speed = 12.0;
  double min_headway = 6.0;    // s between spawns in one lane
  double max_extra_headway = 4.0;

  double stop_row = 40.0;  // px, centroid row where event vehicles wait
  double line_a = 70.0;
  double line_b = 150.0;
  double roi_top = 15.0;
  double roi_bottom = 65.0;
  std::vector<StopEvent> events = {{4.0, 13.0, 0, 4}, {33.0, 13.0, 4, 4}, {61.0, 13.0, 0, 4}, {90.0, 13.0, 4, 4}};

  double noise_sigma = 1.5;
  double vehicle_length = 4.5;
  double vehicle_width = 1.8;

  void validate() const;
};

struct Scenario {
  SceneScript script;
  VideoSpec spec;
  SceneGeometry geometry;
};

/// Deterministic in params (including the seed).
Scenario build_desk_scenario(const DeskScenarioParams& params);

/// Good, bad, good: the link is unlimited except for [bad_start, bad_end),
/// where it carries `bad_fraction` of the reference rate.
LinkTrace thirds_trace(double duration, double reference_rate, double bad_fraction);

}  // namespace tiertraffic
