#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tiertraffic/frame.hpp"
#include "tiertraffic/gaussian.hpp"

namespace tiertraffic {

struct MixtureParams {
  int components = 4;           // K
  double learning_rate = 0.01;
  double match_sigma = 2.5;     // per-channel match window, std devs
  double variance_floor = 4.0;
  double initial_variance = 15.0;

  void validate() const;
};

/// Density of the largest-weight component and its weight, used as the
/// background likelihood and prior.
struct DensityPrior {
  double density = 0.0;
  double prior = 0.0;
};

/// Per-pixel Gaussian mixture background model. Components at each pixel are
/// kept sorted by weight (descending) and their weights sum to one.
class PixelMixtureModel {
 public:
  PixelMixtureModel() = default;
  PixelMixtureModel(int width, int height, int dims, MixtureParams params = {});

  int width() const { return width_; }
  int height() const { return height_; }
  int dims() const { return dims_; }
  const MixtureParams& params() const { return params_; }
  bool initialized() const { return initialized_; }

  /// Updates every pixel. The first frame seeds one component per pixel.
  /// Throws std::invalid_argument when the frame shape does not match.
  void update(const Frame& frame);
  /// Updates only pixels where skip is 0.
  void update(const Frame& frame, const ForegroundMask& skip);

  DensityPrior background_density(const Feature& x, int px, int py) const;
  /// True when x falls outside the match window of the dominant component.
  bool is_outlier(const Feature& x, int px, int py, double sigmas) const;

  std::span<const GaussianComponent> components(int px, int py) const;
  /// Replaces a pixel's components; they must be sorted, normalized and
  /// respect the variance floor. Used when restoring saved state.
  void set_components(int px, int py, std::span<const GaussianComponent> comps);
  void mark_initialized() { initialized_ = true; }

 private:
  void check_frame(const Frame& frame) const;
  void update_pixel(std::size_t i, const Feature& x);
  void seed_pixel(std::size_t i, const Feature& x);

  int width_ = 0;
  int height_ = 0;
  int dims_ = 0;
  MixtureParams params_;
  bool initialized_ = false;
  std::vector<GaussianComponent> comps_;  // K slots per pixel
  std::vector<std::uint8_t> counts_;
};

/// Global foreground model: up to L Gaussians shared by every pixel.
struct ForegroundParams {
  int components = 20;  // L
  double learning_rate = 0.002;
  double creation_sigma = 3.0;
  double variance_floor = 4.0;
  double initial_variance = 25.0;

  void validate() const;
};

class GlobalForegroundModel {
 public:
  explicit GlobalForegroundModel(int dims = 3, ForegroundParams params = {});

  int dims() const { return dims_; }
  const ForegroundParams& params() const { return params_; }
  std::span<const GaussianComponent> components() const { return comps_; }
  std::span<const std::uint64_t> sample_counts() const { return counts_; }
  bool empty() const { return comps_.empty(); }

  /// Assigns x to the accepting component maximizing density * weight and
  /// moves it toward x; creates a component (evicting the lightest at
  /// capacity) when none accepts.
  void update(const Feature& x);

  /// Component maximizing density * weight (first on ties) and its density.
  /// Returns index -1 and density 0 when empty.
  struct Match {
    int index = -1;
    double density = 0.0;
  };
  Match foreground_density(const Feature& x) const;
  /// Largest peak density over all components (0 when empty).
  double max_peak() const { return max_peak_; }

  void restore(std::vector<GaussianComponent> comps, std::vector<std::uint64_t> counts);

 private:
  void normalize();
  void refresh_peak();

  int dims_;
  ForegroundParams params_;
  std::vector<GaussianComponent> comps_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> peaks_;  // gaussian_peak of each component
  double max_peak_ = 0.0;
};

/// Foreground iff fg.density * fg.prior > bg.density * bg.prior; ties are background.
inline bool classify_pixel(DensityPrior bg, DensityPrior fg) {
  return fg.density * fg.prior > bg.density * bg.prior;
}

/// Adaptive-K mixture in the style of Zivkovic's method. A stationary value
/// becomes background after roughly `absorption_seconds`.
struct AdaptiveParams {
  int max_components = 5;
  double background_ratio = 0.9;     // TB
  double match_threshold = 16.0;     // squared distance for the background test
  double generate_threshold = 9.0;   // squared distance for updating a component
  double initial_variance = 15.0;
  double min_variance = 4.0;
  double max_variance = 75.0;
  double complexity_prior = 0.05;
  double absorption_seconds = 1.0;
  double fps = 15.0;

  /// 1 - TB^(1 / (absorption_seconds * fps))
  double learning_rate() const;
  void validate() const;
};

class AdaptiveMixtureModel {
 public:
  AdaptiveMixtureModel() = default;
  AdaptiveMixtureModel(int width, int height, int dims, AdaptiveParams params = {});

  int width() const { return width_; }
  int height() const { return height_; }
  int dims() const { return dims_; }
  const AdaptiveParams& params() const { return params_; }
  bool initialized() const { return initialized_; }

  /// Mask of the current state; all background before the first update.
  ForegroundMask classify(const Frame& frame) const;
  void update(const Frame& frame);

  std::span<const GaussianComponent> components(int px, int py) const;
  void set_components(int px, int py, std::span<const GaussianComponent> comps);
  void mark_initialized() { initialized_ = true; }

 private:
  void check_frame(const Frame& frame) const;
  bool is_background(std::size_t i, const Feature& x) const;
  void update_pixel(std::size_t i, const Feature& x, double alpha);

  int width_ = 0;
  int height_ = 0;
  int dims_ = 0;
  AdaptiveParams params_;
  bool initialized_ = false;
  std::vector<GaussianComponent> comps_;
  std::vector<std::uint8_t> counts_;
};

/// Feature vector at (x, y).
inline Feature feature_at(const Frame& frame, int x, int y) {
  Feature f{};
  for (int c = 0; c < frame.channels(); ++c) f[c] = frame.at(c, y, x);
  return f;
}

}  // namespace tiertraffic
