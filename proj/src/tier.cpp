#include "tiertraffic/tier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tiertraffic/image_ops.hpp"

namespace tiertraffic {
namespace {

constexpr double kScaleTolerance = 1e-9;

// Validates both before any member is built from them.
double resolution_scale(const PipelineConfig& config, const SceneGeometry& geometry) {
  config.validate();
  geometry.validate();
  const double sx = static_cast<double>(config.width) / geometry.width;
  const double sy = static_cast<double>(config.height) / geometry.height;
  if (std::abs(sx - sy) > kScaleTolerance * std::max(sx, sy)) {
    throw std::invalid_argument("pipeline resolution must preserve the source aspect ratio");
  }
  return sx;
}

void check_source(const FrameSource& source, const SceneGeometry& geometry) {
  if (source.width() != geometry.width || source.height() != geometry.height || source.fps() != geometry.fps) {
    throw std::invalid_argument("source stream does not match the scene geometry");
  }
}

PipelineConfig with_fps(PipelineConfig config, double fps) {
  config.adaptive.fps = fps;
  return config;
}

}  // namespace

std::string to_string(Tier tier) { return tier == Tier::kEdge ? "edge" : "cloud"; }

PipelineConfig PipelineConfig::configuration_1() {
  PipelineConfig c;
  c.name = "Configuration-1";
  c.width = 640;
  c.height = 360;
  c.dims = 3;
  c.morphology = true;
  c.speed.tracker.max_link_distance = 40.0;
  return c;
}

PipelineConfig PipelineConfig::configuration_2() {
  PipelineConfig c;
  c.name = "Configuration-2";
  c.width = 320;
  c.height = 180;
  c.dims = 1;
  c.morphology = false;
  c.speed.tracker.max_link_distance = 20.0;
  return c;
}

PipelineConfig PipelineConfig::at_resolution(int w, int h) const {
  if (w <= 0 || h <= 0) throw std::invalid_argument("resolution must be positive");
  PipelineConfig c = *this;
  c.speed.tracker.max_link_distance = speed.tracker.max_link_distance * w / width;
  c.width = w;
  c.height = h;
  return c;
}

void PipelineConfig::validate() const {
  if (width <= 0 || height <= 0) throw std::invalid_argument(name + ": resolution must be positive");
  if (dims != 1 && dims != 3) throw std::invalid_argument(name + ": feature dimension must be 1 or 3");
  gfm.background.validate();
  gfm.foreground.validate();
  adaptive.validate();
  speed.tracker.validate();
  if (speed.min_blob_area < 1) throw std::invalid_argument(name + ": minimum blob area must be positive");
}

void SceneGeometry::validate() const {
  if (width <= 0 || height <= 0) throw std::invalid_argument("source resolution must be positive");
  if (!(fps > 0.0)) throw std::invalid_argument("fps must be positive");
  calibration.validate();
  if (roi.empty()) throw std::invalid_argument("congestion ROI is empty");
  if (!(vehicle_length > 0.0) || !(vehicle_width > 0.0)) throw std::invalid_argument("vehicle size must be positive");
  if (congestion_vehicles < 1) throw std::invalid_argument("congestion vehicle count must be positive");
  if (!(congestion_seconds > 0.0)) throw std::invalid_argument("congestion duration must be positive");
}

std::vector<std::uint8_t> DetectionSeries::congestion_flags() const {
  std::vector<std::uint8_t> out(verdicts.size());
  for (std::size_t i = 0; i < verdicts.size(); ++i) out[i] = verdicts[i].congested ? 1 : 0;
  return out;
}

TierPipeline::TierPipeline(const PipelineConfig& config, const SceneGeometry& geometry, Tier tier)
    : config_(with_fps(config, geometry.fps)),
      geometry_(geometry),
      tier_(tier),
      scale_(resolution_scale(config, geometry)),
      warp_(geometry.homography.rescaled(scale_)),
      to_source_(geometry.homography.inverse()),
      tau_a_(vehicle_area_threshold(geometry.vehicle_length, geometry.vehicle_width,
                                    geometry.calibration.meters_per_pixel / scale_, geometry.congestion_vehicles)),
      tau_t_(default_time_threshold(geometry.fps, geometry.congestion_seconds)),
      gfm_(config.width, config.height, config.dims, config.gfm),
      zivkovic_(config.width, config.height, config.dims, config_.adaptive),
      speed_([&] {
        Calibration c = geometry.calibration.rescaled(scale_);
        c.frame_interval = 1.0 / geometry.fps;
        return c;
      }(), config.speed),
      congestion_(geometry.roi.scaled(scale_), config.width, config.height, tau_a_, tau_t_) {}

Frame TierPipeline::prepare(const Frame& source) const {
  if (source.width() != geometry_.width || source.height() != geometry_.height) {
    throw std::invalid_argument("source frame does not match the scene geometry");
  }
  Frame f = source.width() == config_.width && source.height() == config_.height
                ? source
                : resize(source, config_.width, config_.height);
  if (config_.dims == 1) f = to_intensity(f);
  if (f.channels() != config_.dims) throw std::invalid_argument("source channels do not match the feature dimension");
  if (!warp_.is_identity()) f = warp_topdown(f, warp_, config_.width, config_.height);
  return f;
}

void TierPipeline::emit(int frame_index, bool processed, const CongestionVerdict& v) {
  if (!verdicts_.empty() && frame_index <= verdicts_.back().frame) {
    throw std::invalid_argument("frame indices must increase");
  }
  verdicts_.push_back({frame_index, v.congested, processed, tier_, v.area, v.t_c});
}

void TierPipeline::process(const Frame& source) {
  const Frame f = prepare(source);
  work_.add(f);
  ForegroundMask g = gfm_.detect(f);
  ForegroundMask z = zivkovic_.detect(f);
  if (config_.morphology) {
    g = morphology_enhance(g);
    z = morphology_enhance(z);
  }
  last_ = congestion_.step(g, z);
  emit(source.index(), true, last_);
  speed_.push(g);
  ++processed_;
}

void TierPipeline::skip(int frame_index) { emit(frame_index, false, last_); }

DetectionSeries TierPipeline::finish() {
  DetectionSeries out;
  for (const auto& r : speed_.finish()) {
    TaggedReport t;
    t.report = r;
    t.tier = tier_;
    t.entry_source = to_source_.apply({r.entry.x / scale_, r.entry.y / scale_});
    out.reports.push_back(t);
  }
  out.verdicts = verdicts_;
  out.work = work_;
  out.processed_frames = processed_;
  return out;
}

void HybridPolicy::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
  if (!(poll_period > 0.0)) throw std::invalid_argument("poll period must be positive");
}

int select_tier(double c, double threshold) { return c < threshold ? 1 : 0; }

int select_tier(double c, const HybridPolicy& policy) { return select_tier(c, policy.threshold); }

double objective_value(int beta_e, double a_e, double a_c) {
  if (beta_e != 0 && beta_e != 1) throw std::invalid_argument("beta_e must be 0 or 1");
  return beta_e * a_e + (1 - beta_e) * a_c;
}

std::vector<TierDecision> plan_tiers(const LinkTrace& trace, double duration, double reference_rate,
                                     const HybridPolicy& policy) {
  policy.validate();
  if (trace.duration() < duration) throw std::invalid_argument("trace is shorter than the stream");
  std::vector<TierDecision> out;
  for (int k = 0; k * policy.poll_period < duration; ++k) {
    const double t0 = k * policy.poll_period;
    const double t1 = std::min(t0 + policy.poll_period, duration);
    TierDecision d;
    d.t = t0;
    d.c = measure_condition(trace, t1, t1 - t0, reference_rate);
    d.beta_e = select_tier(d.c, policy);
    out.push_back(d);
  }
  return out;
}

void write_switch_log(std::ostream& out, const std::vector<TierDecision>& decisions) {
  out << "t,c,beta_e\n";
  for (const auto& d : decisions) out << d.t << ',' << d.c << ',' << d.beta_e << '\n';
}

DetectionSeries stitch_hybrid(const DetectionSeries& edge, const DetectionSeries& cloud,
                              const std::vector<TierDecision>& decisions, double fps) {
  if (edge.verdicts.size() != cloud.verdicts.size()) throw std::invalid_argument("edge and cloud series differ in length");
  if (decisions.empty()) throw std::invalid_argument("no tier decisions");
  const double period = decisions.size() > 1 ? decisions[1].t - decisions[0].t : 0.0;
  const std::size_t n = edge.verdicts.size();
  std::vector<std::uint8_t> at_edge(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = 0;
    if (period > 0.0) k = std::min(decisions.size() - 1, static_cast<std::size_t>(std::floor(i / fps / period)));
    at_edge[i] = static_cast<std::uint8_t>(decisions[k].beta_e);
  }

  DetectionSeries out;
  out.verdicts.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.verdicts[i] = at_edge[i] ? edge.verdicts[i] : cloud.verdicts[i];
  auto any_edge = [&](const SpeedReport& r) {
    for (int i = std::max(0, r.first_frame); i <= r.last_frame && i < static_cast<int>(n); ++i) {
      if (at_edge[i]) return true;
    }
    return false;
  };
  for (const auto& r : cloud.reports) {
    if (!any_edge(r.report)) out.reports.push_back(r);
  }
  for (const auto& r : edge.reports) {
    if (any_edge(r.report)) out.reports.push_back(r);
  }
  std::stable_sort(out.reports.begin(), out.reports.end(),
                   [](const TaggedReport& a, const TaggedReport& b) { return a.report.first_frame < b.report.first_frame; });
  out.work = edge.work;
  out.work += cloud.work;
  out.processed_frames = edge.processed_frames + cloud.processed_frames;
  return out;
}

TierRun run_tiers(FrameSource& source, const SceneGeometry& geometry, const std::optional<PipelineConfig>& edge,
                  const PipelineConfig& cloud, const std::vector<LinkTrace>& traces, const ChannelParams& channel) {
  check_source(source, geometry);
  const int n = source.frame_count();
  TierRun run;
  for (const auto& trace : traces) run.schedules.push_back(transmit_schedule(n, source.fps(), trace, channel));

  std::optional<TierPipeline> edge_pipe;
  if (edge) edge_pipe.emplace(*edge, geometry, Tier::kEdge);
  std::vector<TierPipeline> cloud_pipes;
  cloud_pipes.reserve(traces.size());
  for (std::size_t k = 0; k < traces.size(); ++k) cloud_pipes.emplace_back(cloud, geometry, Tier::kCloud);

  for (int i = 0; i < n; ++i) {
    const Frame f = source.frame(i);
    if (f.index() != i) throw std::runtime_error("source returned an out-of-order frame");
    if (edge_pipe) edge_pipe->process(f);
    for (std::size_t k = 0; k < cloud_pipes.size(); ++k) {
      if (run.schedules[k].delivered[i]) {
        cloud_pipes[k].process(f);
      } else {
        cloud_pipes[k].skip(i);
      }
    }
  }
  if (edge_pipe) run.edge = edge_pipe->finish();
  for (auto& p : cloud_pipes) run.cloud.push_back(p.finish());
  return run;
}

DetectionSeries run_edge(FrameSource& source, const SceneGeometry& geometry, const PipelineConfig& config) {
  check_source(source, geometry);
  TierPipeline pipe(config, geometry, Tier::kEdge);
  for (int i = 0; i < source.frame_count(); ++i) pipe.process(source.frame(i));
  return pipe.finish();
}

DetectionSeries run_cloud(FrameSource& source, const SceneGeometry& geometry, const PipelineConfig& config,
                          const LinkTrace& trace, const ChannelParams& channel) {
  return std::move(run_tiers(source, geometry, std::nullopt, config, {trace}, channel).cloud.front());
}

HybridRun run_hybrid(FrameSource& source, const SceneGeometry& geometry, const PipelineConfig& edge,
                     const PipelineConfig& cloud, const LinkTrace& trace, const ChannelParams& channel,
                     const HybridPolicy& policy) {
  const auto decisions = plan_tiers(trace, source.duration(), channel.reference_rate, policy);
  TierRun run = run_tiers(source, geometry, edge, cloud, {trace}, channel);
  HybridRun out;
  out.edge = std::move(*run.edge);
  out.cloud = std::move(run.cloud.front());
  out.schedule = std::move(run.schedules.front());
  out.hybrid = stitch_hybrid(out.edge, out.cloud, decisions, source.fps());
  out.decisions = decisions;
  return out;
}

std::optional<double> calibrate_threshold(std::vector<SweepPoint> cloud, double edge_congestion_error,
                                          double edge_speed_error) {
  std::sort(cloud.begin(), cloud.end(),
            [](const SweepPoint& a, const SweepPoint& b) { return a.condition > b.condition; });
  auto worse = [&](const SweepPoint& p) {
    const bool c = !std::isnan(p.congestion_error) && !std::isnan(edge_congestion_error) &&
                   p.congestion_error > edge_congestion_error;
    const bool s = !std::isnan(p.speed_error) && !std::isnan(edge_speed_error) && p.speed_error > edge_speed_error;
    return c || s;
  };
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    if (!worse(cloud[k])) continue;
    if (k == 0) return std::nullopt;
    return (cloud[k - 1].condition + cloud[k].condition) / 2.0;
  }
  return std::nullopt;
}

}  // namespace tiertraffic
