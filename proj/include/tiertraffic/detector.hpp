#pragma once

#include <cstdint>

#include "tiertraffic/frame.hpp"
#include "tiertraffic/mixture_model.hpp"

namespace tiertraffic {

/// Pixels and feature scalars pushed through a detector.
struct WorkCounters {
  std::uint64_t pixels = 0;
  std::uint64_t feature_scalars = 0;

  void add(const Frame& frame) {
    pixels += frame.pixel_count();
    feature_scalars += frame.pixel_count() * static_cast<std::uint64_t>(frame.channels());
  }
  WorkCounters& operator+=(const WorkCounters& o) {
    pixels += o.pixels;
    feature_scalars += o.feature_scalars;
    return *this;
  }
};

struct GfmDetectorParams {
  MixtureParams background;
  ForegroundParams foreground;
  int bootstrap_frames = 30;  // frames during which every pixel updates the background
  double seed_sigma = 4.0;    // residual (std devs from the dominant background) that seeds the foreground model
};

/// Background mixture + global foreground model with the Bayes decision.
/// Each call classifies against the state left by the previous frame, then
/// updates the background at background pixels and feeds foreground (and
/// high-residual) pixels to the global model in row-major order.
class GfmDetector {
 public:
  GfmDetector(int width, int height, int dims, GfmDetectorParams params = {});

  ForegroundMask detect(const Frame& frame);
  /// Classification of `frame` against the current state, no update.
  ForegroundMask classify(const Frame& frame) const;
  bool classify_at(const Feature& x, int px, int py) const;

  const PixelMixtureModel& background() const { return background_; }
  const GlobalForegroundModel& foreground() const { return foreground_; }
  PixelMixtureModel& background() { return background_; }
  GlobalForegroundModel& foreground() { return foreground_; }
  const GfmDetectorParams& params() const { return params_; }
  int frames_seen() const { return frames_seen_; }
  void set_frames_seen(int n) { frames_seen_ = n; }
  const WorkCounters& work() const { return work_; }

 private:
  GfmDetectorParams params_;
  PixelMixtureModel background_;
  GlobalForegroundModel foreground_;
  int frames_seen_ = 0;
  WorkCounters work_;
};

/// Adaptive mixture detector; stationary objects fade into the background.
class ZivkovicDetector {
 public:
  ZivkovicDetector(int width, int height, int dims, AdaptiveParams params = {});

  ForegroundMask detect(const Frame& frame);
  const AdaptiveMixtureModel& model() const { return model_; }
  AdaptiveMixtureModel& model() { return model_; }
  const WorkCounters& work() const { return work_; }

 private:
  AdaptiveMixtureModel model_;
  WorkCounters work_;
};

/// 3x3 erosion; pixels outside the mask count as set.
ForegroundMask erode3x3(const ForegroundMask& mask);
/// 3x3 dilation; pixels outside the mask count as clear.
ForegroundMask dilate3x3(const ForegroundMask& mask);
/// One opening followed by one closing, 3x3 square element.
ForegroundMask morphology_enhance(const ForegroundMask& mask);

}  // namespace tiertraffic
