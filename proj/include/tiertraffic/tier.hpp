#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tiertraffic/channel.hpp"
#include "tiertraffic/congestion.hpp"
#include "tiertraffic/detector.hpp"
#include "tiertraffic/frame_source.hpp"
#include "tiertraffic/geometry.hpp"
#include "tiertraffic/speed.hpp"

namespace tiertraffic {

enum class Tier { kEdge, kCloud };

std::string to_string(Tier tier);

/// Processing profile of one tier.
struct PipelineConfig {
  std::string name;
  int width = 0;
  int height = 0;
  int dims = 3;  // 3 = RGB, 1 = intensity
  bool morphology = true;
  GfmDetectorParams gfm;
  AdaptiveParams adaptive;
  SpeedParams speed;

  /// 640x360 RGB with morphological enhancement.
  static PipelineConfig configuration_1();
  /// 320x180 intensity, no enhancement.
  static PipelineConfig configuration_2();
  /// Same profile at another resolution; the link distance scales with width.
  PipelineConfig at_resolution(int w, int h) const;
  void validate() const;
};

/// Camera-side calibration, all in source pixel coordinates.
struct SceneGeometry {
  int width = 0;
  int height = 0;
  double fps = 15.0;
  Homography homography;    // source -> top-down view of the same size
  Calibration calibration;  // in the top-down view
  Roi roi;                  // in the top-down view
  double vehicle_length = 4.5;  // m
  double vehicle_width = 1.8;   // m
  int congestion_vehicles = 3;
  double congestion_seconds = 10.0;

  void validate() const;
};

struct FrameVerdict {
  int frame = 0;
  bool congested = false;
  bool processed = false;  // false when the verdict is held over a dropped frame
  Tier tier = Tier::kEdge;
  std::size_t area = 0;
  int t_c = 0;
};

struct TaggedReport {
  SpeedReport report;
  Tier tier = Tier::kEdge;
  Point2 entry_source;  // report.entry mapped back to source pixels
};

/// Output of one strategy over one stream.
struct DetectionSeries {
  std::vector<FrameVerdict> verdicts;  // one per source frame
  std::vector<TaggedReport> reports;
  WorkCounters work;
  int processed_frames = 0;

  std::vector<std::uint8_t> congestion_flags() const;
};

/// One tier's full chain: resize, intensity, warp, both detectors,
/// optional enhancement, then speed and congestion.
class TierPipeline {
 public:
  TierPipeline(const PipelineConfig& config, const SceneGeometry& geometry, Tier tier);

  /// Feeds a delivered source frame. Indices must increase.
  void process(const Frame& source);
  /// Records a dropped frame; the last verdict is held.
  void skip(int frame_index);
  DetectionSeries finish();

  const PipelineConfig& config() const { return config_; }
  double scale() const { return scale_; }
  double area_threshold() const { return tau_a_; }
  int time_threshold() const { return tau_t_; }
  const WorkCounters& work() const { return work_; }
  /// Resized, converted and warped input as seen by the detectors.
  Frame prepare(const Frame& source) const;

 private:
  void emit(int frame_index, bool processed, const CongestionVerdict& v);

  PipelineConfig config_;
  SceneGeometry geometry_;
  Tier tier_;
  double scale_ = 1.0;
  Homography warp_;
  Homography to_source_;
  double tau_a_ = 0.0;
  int tau_t_ = 0;
  GfmDetector gfm_;
  ZivkovicDetector zivkovic_;
  SpeedDetector speed_;
  CongestionDetector congestion_;
  CongestionVerdict last_;
  WorkCounters work_;
  std::vector<FrameVerdict> verdicts_;
  int processed_ = 0;
};

struct HybridPolicy {
  double threshold = 0.875;  // Ĉ, normalized condition
  double poll_period = 1.0;  // s

  void validate() const;
};

/// 1 (edge) iff c < threshold.
int select_tier(double c, double threshold);
int select_tier(double c, const HybridPolicy& policy);

/// beta_e * a_e + (1 - beta_e) * a_c
double objective_value(int beta_e, double a_e, double a_c);

struct TierDecision {
  double t = 0.0;  // interval start, s
  double c = 0.0;
  int beta_e = 0;
};

/// One decision per poll interval [k P, (k + 1) P), using the condition
/// measured over that interval.
std::vector<TierDecision> plan_tiers(const LinkTrace& trace, double duration, double reference_rate,
                                     const HybridPolicy& policy);

/// Header: t,c,beta_e
void write_switch_log(std::ostream& out, const std::vector<TierDecision>& decisions);

/// Per-frame verdicts from the active tier. A cloud speed report is kept only
/// when every frame of its window was cloud-active; an edge report is kept
/// when any frame of its window was edge-active.
DetectionSeries stitch_hybrid(const DetectionSeries& edge, const DetectionSeries& cloud,
                              const std::vector<TierDecision>& decisions, double fps);

struct TierRun {
  std::optional<DetectionSeries> edge;
  std::vector<DetectionSeries> cloud;  // one per trace
  std::vector<DeliverySchedule> schedules;
};

/// Streams the source once: the edge pipeline sees every frame, each cloud
/// pipeline sees the frames its trace delivers. Traces shorter than the
/// stream are rejected.
TierRun run_tiers(FrameSource& source, const SceneGeometry& geometry, const std::optional<PipelineConfig>& edge,
                  const PipelineConfig& cloud, const std::vector<LinkTrace>& traces, const ChannelParams& channel);

DetectionSeries run_edge(FrameSource& source, const SceneGeometry& geometry, const PipelineConfig& config);
DetectionSeries run_cloud(FrameSource& source, const SceneGeometry& geometry, const PipelineConfig& config,
                          const LinkTrace& trace, const ChannelParams& channel);

struct HybridRun {
  DetectionSeries edge;
  DetectionSeries cloud;
  DetectionSeries hybrid;
  std::vector<TierDecision> decisions;
  DeliverySchedule schedule;
};

HybridRun run_hybrid(FrameSource& source, const SceneGeometry& geometry, const PipelineConfig& edge,
                     const PipelineConfig& cloud, const LinkTrace& trace, const ChannelParams& channel,
                     const HybridPolicy& policy);

/// Cloud error measured at one link condition.
struct SweepPoint {
  double condition = 1.0;
  double congestion_error = 0.0;
  double speed_error = 0.0;
};

/// Midpoint between the highest sampled condition at which the cloud is worse
/// than the edge on either error and the next higher sampled condition. NaN
/// errors are not compared. Empty when the cloud is never worse, or is
/// already worse at the best condition.
std::optional<double> calibrate_threshold(std::vector<SweepPoint> cloud, double edge_congestion_error,
                                          double edge_speed_error);

}  // namespace tiertraffic
