#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "tiertraffic/frame.hpp"
#include "tiertraffic/geometry.hpp"

namespace tiertraffic {

struct Blob {
  int label = 0;
  int area = 0;
  Point2 centroid;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive bounding box
  int frame_index = 0;
};

/// 8-connected component ids, 0 for background, numbered 1.. in row-major
/// order of each component's first pixel.
std::vector<int> label_image(const ForegroundMask& mask);

/// Components of at least `min_area` pixels, in label order.
std::vector<Blob> label_components(const ForegroundMask& mask, int min_area = 15);

struct Observation {
  int frame = 0;
  Point2 centroid;
};

enum class TrajectoryState { kActive, kCompleted, kDiscarded };

struct Trajectory {
  int id = 0;
  std::vector<Observation> observations;
  TrajectoryState state = TrajectoryState::kActive;
  int missed = 0;  // processed frames since the last match
};

struct TrackerParams {
  double max_link_distance = 20.0;  // px
  int max_gap = 3;                  // processed frames without a match before completion
  void validate() const;
};

/// Greedy closest-first centroid linking. Frames are counted as processed
/// frames, so dropped input frames do not age trajectories.
class TrajectoryLinker {
 public:
  explicit TrajectoryLinker(TrackerParams params = {});

  /// Frame indices must strictly increase; throws std::invalid_argument otherwise.
  void step(int frame_index, const std::vector<Blob>& blobs);
  /// Completes every active trajectory.
  void finish();
  std::vector<Trajectory> take_completed();
  const std::vector<Trajectory>& active() const { return active_; }

 private:
  TrackerParams params_;
  std::vector<Trajectory> active_;
  std::vector<Trajectory> completed_;
  int next_id_ = 1;
  std::optional<int> last_frame_;
};

struct SpeedReport {
  int trajectory_id = 0;
  double mean_mph = 0.0;
  std::vector<double> displacements;  // px between consecutive observations in the window
  int f = 0;                          // steps between the two crossings
  int first_frame = 0;
  int last_frame = 0;
  Point2 entry;  // centroid at first_frame
};

/// Index of the first observation k >= 1 whose step crosses `line`
/// (y[k-1] < line <= y[k] or y[k-1] > line >= y[k]).
std::optional<std::size_t> crossing_index(const std::vector<Observation>& obs, double line);

/// V = unit_factor * meters_per_pixel * (sum d_i / frame_interval) / f over the
/// observations between the two crossings, inclusive. Empty when the
/// trajectory does not cross both lines.
std::optional<SpeedReport> estimate_speed(const Trajectory& traj, const Calibration& calib);

struct SpeedParams {
  int min_blob_area = 15;
  TrackerParams tracker;
};

/// Streaming composition of labeling, linking and estimation.
class SpeedDetector {
 public:
  SpeedDetector(Calibration calib, SpeedParams params = {});

  void push(const ForegroundMask& mask);
  /// Flushes active trajectories; returns every report in completion order.
  const std::vector<SpeedReport>& finish();
  const std::vector<SpeedReport>& reports() const { return reports_; }
  const Calibration& calibration() const { return calib_; }

 private:
  void collect();

  Calibration calib_;
  SpeedParams params_;
  TrajectoryLinker linker_;
  std::vector<SpeedReport> reports_;
};

std::vector<SpeedReport> detect_speeds(const std::vector<ForegroundMask>& masks, const Calibration& calib,
                                       SpeedParams params = {});

/// Header: trajectory_id,first_frame,last_frame,f,mean_mph
void write_speed_csv(std::ostream& out, const std::vector<SpeedReport>& reports);

}  // namespace tiertraffic
