#include "tiertraffic/scenario.hpp"

#include <random>
#include <stdexcept>

#include "tiertraffic/rng.hpp"

namespace tiertraffic {
namespace {

// Contrasting in intensity against the road so the intensity view sees them too.
const Rgb kPalette[] = {{225, 225, 220}, {35, 35, 40}, {230, 200, 60}, {150, 190, 240}, {120, 20, 20}, {180, 180, 185}};

}  // namespace

void DeskScenarioParams::validate() const {
  VideoSpec{width, height, fps, duration}.validate();
  if (!(meters_per_pixel > 0.0)) throw std::invalid_argument("meters_per_pixel must be positive");
  if (lanes < 1 || first_free_lane < 0 || first_free_lane > lanes) throw std::invalid_argument("bad lane layout");
  if (!(min_speed > 0.0) || max_speed < min_speed) throw std::invalid_argument("bad speed range");
  if (!(min_headway > 0.0) || max_extra_headway < 0.0) throw std::invalid_argument("bad headway");
  if (!(line_a < line_b)) throw std::invalid_argument("line_a must lie above line_b");
  if (!(roi_top < roi_bottom)) throw std::invalid_argument("empty ROI");
  for (const auto& e : events) {
    if (e.first_lane < 0 || e.first_lane + e.vehicles > first_free_lane) {
      throw std::invalid_argument("stop event lanes must lie before the free-flow lanes");
    }
    if (!(e.stop_seconds > 0.0)) throw std::invalid_argument("stop duration must be positive");
    if (e.stop_time < 0.0 || e.stop_time + e.stop_seconds > duration) {
      throw std::invalid_argument("stop event must lie inside the run");
    }
  }
}

Scenario build_desk_scenario(const DeskScenarioParams& p) {
  p.validate();
  Scenario s;
  s.spec = VideoSpec{p.width, p.height, p.fps, p.duration};
  const double mpp = p.meters_per_pixel;
  const double h = p.height - 1.0;

  SceneScript& sc = s.script;
  sc.meters_per_pixel = mpp;
  sc.seed = p.seed;
  sc.noise_sigma = p.noise_sigma;
  const double road_x0 = p.first_lane_x - p.lane_spacing / 2.0;
  const double road_x1 = p.first_lane_x + (p.lanes - 0.5) * p.lane_spacing;
  sc.road_polygon = {{road_x0, 0.0}, {road_x1, 0.0}, {road_x1, h}, {road_x0, h}};
  sc.annotations.roi = {{road_x0, p.roi_top}, {road_x1, p.roi_top}, {road_x1, p.roi_bottom}, {road_x0, p.roi_bottom}};
  sc.annotations.line_a = p.line_a;
  sc.annotations.line_b = p.line_b;
  sc.annotations.congestion_min_vehicles = 4;
  sc.annotations.congestion_min_seconds = 10.0;

  // Centroid rows (in meters) at which a vehicle is fully inside the frame.
  const double top = p.vehicle_length / 2.0;
  const double bottom = p.height * mpp - p.vehicle_length / 2.0;
  auto lane_x = [&](int lane) { return (p.first_lane_x + lane * p.lane_spacing) * mpp; };

  std::mt19937_64 rng(hash_mix(p.seed, 0xd35cULL));
  std::uniform_real_distribution<double> speed(p.min_speed, p.max_speed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int id = 1;
  int color = 0;
  auto add = [&](int lane, double spawn, std::vector<SpeedSegment> profile) {
    VehicleScript v;
    v.id = id++;
    v.spawn_time = spawn;
    v.path = {{lane_x(lane), top}, {lane_x(lane), bottom}};
    v.speed_profile = std::move(profile);
    v.width = p.vehicle_width;
    v.length = p.vehicle_length;
    v.color = kPalette[color++ % std::size(kPalette)];
    sc.vehicles.push_back(v);
  };

  for (const auto& e : p.events) {
    const double approach = speed(rng);
    const double lead = (p.stop_row * mpp - top) / approach;
    const double leave = speed(rng);
    for (int k = 0; k < e.vehicles; ++k) {
      add(e.first_lane + k, e.stop_time - lead, {{0.0, approach}, {lead, 0.0}, {lead + e.stop_seconds, leave}});
    }
  }
  for (int lane = p.first_free_lane; lane < p.lanes; ++lane) {
    double t = unit(rng) * p.max_extra_headway;
    while (t < p.duration) {
      add(lane, t, {{0.0, speed(rng)}});
      t += p.min_headway + unit(rng) * p.max_extra_headway;
    }
  }

  SceneGeometry& g = s.geometry;
  g.width = p.width;
  g.height = p.height;
  g.fps = p.fps;
  g.calibration.meters_per_pixel = mpp;
  g.calibration.line_a = p.line_a;
  g.calibration.line_b = p.line_b;
  g.calibration.frame_interval = 1.0 / p.fps;
  g.roi = Roi(sc.annotations.roi);
  g.vehicle_length = p.vehicle_length;
  g.vehicle_width = p.vehicle_width;
  return s;
}

LinkTrace thirds_trace(double duration, double reference_rate, double bad_fraction) {
  return LinkTrace::limited_window(kUnlimitedRate, bad_fraction * reference_rate, duration / 3.0,
                                   2.0 * duration / 3.0, duration);
}

}  // namespace tiertraffic
