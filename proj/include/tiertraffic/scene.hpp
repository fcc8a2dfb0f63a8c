#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tiertraffic/frame.hpp"
#include "tiertraffic/geometry.hpp"

namespace tiertraffic {

/// Constant speed from `start` seconds after spawn until the next segment.
struct SpeedSegment {
  double start = 0.0;
  double speed = 0.0;  // m/s, 0 = stopped
};

/// One scripted vehicle. The path is a polyline in world meters whose origin
/// coincides with the top-left pixel of the (top-down) frame. The vehicle is
/// drawn as an axis-aligned rectangle, `length` along the travel direction of
/// the current path leg, and disappears once it reaches the end of the path.
struct VehicleScript {
  int id = 0;
  double spawn_time = 0.0;
  std::vector<Point2> path;
  std::vector<SpeedSegment> speed_profile;
  double width = 1.8;   // m
  double length = 4.5;  // m
  Rgb color{200, 40, 40};
};

/// Where evaluation looks: congestion ROI and the two referential rows, both
/// in source pixel coordinates.
struct SceneAnnotations {
  std::vector<Point2> roi;
  double line_a = 0.0;
  double line_b = 0.0;
  int congestion_min_vehicles = 4;      // "more than three"
  double congestion_min_seconds = 10.0;  // must last longer than this
};

struct SceneScript {
  double meters_per_pixel = 0.1;
  std::vector<Point2> road_polygon;  // pixel coordinates
  Rgb road_color{100, 100, 104};
  Rgb ground_color{70, 110, 60};
  double noise_sigma = 1.5;  // per-channel sensor noise, intensity units
  std::uint64_t seed = 1;
  std::vector<VehicleScript> vehicles;
  SceneAnnotations annotations;

  /// Throws std::invalid_argument on bad speed profiles or vehicles whose
  /// rectangle leaves the frame anywhere along the path.
  void validate(const VideoSpec& spec) const;
};

struct VehicleState {
  int vehicle_id = 0;
  Point2 centroid;  // source px
  double speed = 0.0;  // m/s
  bool in_roi = false;
};

/// Scripted reference for one vehicle. The speed is the time-average of the
/// scripted speed between the frames at which the centroid crosses the two
/// referential rows; absent when it never crosses both.
struct VehicleTruth {
  int vehicle_id = 0;
  std::optional<double> speed_mph;
  int window_first = -1;
  int window_last = -1;
};

struct GroundTruth {
  double fps = 15.0;
  std::vector<std::vector<VehicleState>> frames;  // visible vehicles per frame
  std::vector<std::uint8_t> congestion;           // per-frame flag
  std::vector<VehicleTruth> vehicles;

  int frame_count() const { return static_cast<int>(frames.size()); }
  const VehicleTruth* find(int vehicle_id) const;
};

/// Kinematics of a scripted vehicle.
class VehicleMotion {
 public:
  VehicleMotion(const VehicleScript& script, double meters_per_pixel);

  /// Meters travelled `t` seconds after the scene start (0 before spawn).
  double distance_at(double t) const;
  double speed_at(double t) const;
  bool visible_at(double t) const;
  /// Centroid in pixel coordinates and whether the current leg is mostly vertical.
  Point2 centroid_at(double t, bool* vertical = nullptr) const;
  double path_length() const { return path_length_; }

 private:
  Point2 point_at_distance(double s, bool* vertical) const;

  VehicleScript script_;
  double mpp_;
  double path_length_ = 0.0;
  std::vector<double> cumulative_;  // arc length at each vertex
};

/// Renders frames of a scripted scene on demand. Rendering is a pure function
/// of (script, spec, index).
class SceneRenderer {
 public:
  SceneRenderer(SceneScript script, VideoSpec spec);

  const VideoSpec& spec() const { return spec_; }
  const SceneScript& script() const { return script_; }
  int frame_count() const { return spec_.frame_count(); }
  double timestamp(int index) const { return index / spec_.fps; }

  Frame render(int index) const;
  const Frame& background() const { return background_; }
  GroundTruth ground_truth() const;

 private:
  SceneScript script_;
  VideoSpec spec_;
  std::vector<VehicleMotion> motions_;
  Frame background_;
};

struct SceneSequence {
  std::vector<Frame> frames;
  GroundTruth truth;
};

SceneSequence generate_scene(const SceneScript& script, const VideoSpec& spec);

}  // namespace tiertraffic
