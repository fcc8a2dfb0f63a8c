#include "tiertraffic/mixture_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tiertraffic {
namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Stable insertion sort, heaviest first.
void sort_by_weight(GaussianComponent* c, int n) {
  for (int i = 1; i < n; ++i) {
    GaussianComponent v = c[i];
    int j = i - 1;
    while (j >= 0 && c[j].weight < v.weight) {
      c[j + 1] = c[j];
      --j;
    }
    c[j + 1] = v;
  }
}

void check_components(std::span<const GaussianComponent> comps, int dims, double floor, int max) {
  require(!comps.empty() && static_cast<int>(comps.size()) <= max, "component count out of range");
  double sum = 0.0;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const auto& g = comps[k];
    require(g.weight >= 0.0 && g.weight <= 1.0, "component weight outside [0,1]");
    if (k > 0) require(comps[k - 1].weight >= g.weight, "components not sorted by weight");
    for (int c = 0; c < dims; ++c) require(g.variance[c] >= floor, "variance below floor");
    sum += g.weight;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "component weights do not sum to one");
}

}  // namespace

void MixtureParams::validate() const {
  require(components >= 1 && components <= 255, "mixture needs 1..255 components");
  require(learning_rate > 0.0 && learning_rate < 1.0, "learning rate must be in (0,1)");
  require(match_sigma > 0.0, "match threshold must be positive");
  require(variance_floor > 0.0, "variance floor must be positive");
  require(initial_variance >= variance_floor, "initial variance below floor");
}

PixelMixtureModel::PixelMixtureModel(int width, int height, int dims, MixtureParams params)
    : width_(width), height_(height), dims_(dims), params_(params) {
  require(width > 0 && height > 0, "model dimensions must be positive");
  require(dims >= 1 && dims <= kMaxFeatureDims, "feature dimension must be 1..3");
  params_.validate();
  const std::size_t n = static_cast<std::size_t>(width) * height;
  comps_.resize(n * params_.components);
  counts_.assign(n, 0);
}

void PixelMixtureModel::check_frame(const Frame& frame) const {
  if (frame.width() != width_ || frame.height() != height_ || frame.channels() != dims_) {
    throw std::invalid_argument("frame shape does not match background model");
  }
}

void PixelMixtureModel::seed_pixel(std::size_t i, const Feature& x) {
  GaussianComponent& g = comps_[i * params_.components];
  g.mean = x;
  g.variance.fill(0.0);
  for (int c = 0; c < dims_; ++c) g.variance[c] = params_.initial_variance;
  g.weight = 1.0;
  counts_[i] = 1;
}

void PixelMixtureModel::update_pixel(std::size_t i, const Feature& x) {
  GaussianComponent* c = &comps_[i * params_.components];
  int n = counts_[i];
  if (n == 0) {
    seed_pixel(i, x);
    return;
  }
  const double lr = params_.learning_rate;
  int matched = -1;
  for (int k = 0; k < n; ++k) {
    if (within_sigmas(c[k], x, dims_, params_.match_sigma)) {
      matched = k;
      break;
    }
  }
  if (matched >= 0) {
    for (int k = 0; k < n; ++k) c[k].weight *= 1.0 - lr;
    GaussianComponent& g = c[matched];
    g.weight += lr;
    for (int ch = 0; ch < dims_; ++ch) {
      g.mean[ch] += lr * (x[ch] - g.mean[ch]);
      const double diff = x[ch] - g.mean[ch];
      g.variance[ch] = std::max(params_.variance_floor, g.variance[ch] + lr * (diff * diff - g.variance[ch]));
    }
  } else {
    const int slot = n < params_.components ? n++ : n - 1;
    GaussianComponent& g = c[slot];
    g.mean = x;
    g.variance.fill(0.0);
    for (int ch = 0; ch < dims_; ++ch) g.variance[ch] = params_.initial_variance;
    g.weight = lr;
    counts_[i] = static_cast<std::uint8_t>(n);
  }
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += c[k].weight;
  for (int k = 0; k < n; ++k) c[k].weight /= sum;
  sort_by_weight(c, n);
}

void PixelMixtureModel::update(const Frame& frame) {
  check_frame(frame);
  std::size_t i = 0;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x, ++i) update_pixel(i, feature_at(frame, x, y));
  }
  initialized_ = true;
}

void PixelMixtureModel::update(const Frame& frame, const ForegroundMask& skip) {
  check_frame(frame);
  if (skip.width() != width_ || skip.height() != height_) {
    throw std::invalid_argument("mask shape does not match background model");
  }
  const auto bits = skip.bits();
  std::size_t i = 0;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x, ++i) {
      if (!bits[i]) update_pixel(i, feature_at(frame, x, y));
    }
  }
  initialized_ = true;
}

DensityPrior PixelMixtureModel::background_density(const Feature& x, int px, int py) const {
  const std::size_t i = static_cast<std::size_t>(py) * width_ + px;
  if (counts_[i] == 0) return {};
  const GaussianComponent& g = comps_[i * params_.components];
  return {gaussian_density(g, x, dims_), g.weight};
}

bool PixelMixtureModel::is_outlier(const Feature& x, int px, int py, double sigmas) const {
  const std::size_t i = static_cast<std::size_t>(py) * width_ + px;
  if (counts_[i] == 0) return false;
  return !within_sigmas(comps_[i * params_.components], x, dims_, sigmas);
}

std::span<const GaussianComponent> PixelMixtureModel::components(int px, int py) const {
  const std::size_t i = static_cast<std::size_t>(py) * width_ + px;
  return {comps_.data() + i * params_.components, counts_[i]};
}

void PixelMixtureModel::set_components(int px, int py, std::span<const GaussianComponent> comps) {
  check_components(comps, dims_, params_.variance_floor, params_.components);
  const std::size_t i = static_cast<std::size_t>(py) * width_ + px;
  std::copy(comps.begin(), comps.end(), comps_.begin() + static_cast<std::ptrdiff_t>(i * params_.components));
  counts_[i] = static_cast<std::uint8_t>(comps.size());
}

void ForegroundParams::validate() const {
  require(components >= 1, "foreground model needs at least one component");
  require(learning_rate > 0.0 && learning_rate < 1.0, "learning rate must be in (0,1)");
  require(creation_sigma > 0.0, "creation threshold must be positive");
  require(variance_floor > 0.0, "variance floor must be positive");
  require(initial_variance >= variance_floor, "initial variance below floor");
}

GlobalForegroundModel::GlobalForegroundModel(int dims, ForegroundParams params)
    : dims_(dims), params_(params) {
  require(dims >= 1 && dims <= kMaxFeatureDims, "feature dimension must be 1..3");
  params_.validate();
}

void GlobalForegroundModel::normalize() {
  double sum = 0.0;
  for (const auto& g : comps_) sum += g.weight;
  for (auto& g : comps_) g.weight /= sum;
}

void GlobalForegroundModel::refresh_peak() {
  max_peak_ = 0.0;
  for (double p : peaks_) max_peak_ = std::max(max_peak_, p);
}

void GlobalForegroundModel::update(const Feature& x) {
  const double rho = params_.learning_rate;
  int best = -1;
  double best_score = -1.0;
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    if (!within_sigmas(comps_[i], x, dims_, params_.creation_sigma)) continue;
    const double score = gaussian_density(comps_[i], peaks_[i], x, dims_) * comps_[i].weight;
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }

  if (best >= 0) {
    for (auto& g : comps_) g.weight *= 1.0 - rho;
    GaussianComponent& g = comps_[best];
    g.weight += rho;
    ++counts_[best];
    const double rate = std::max(rho, 1.0 / static_cast<double>(counts_[best]));
    for (int c = 0; c < dims_; ++c) {
      g.mean[c] += rate * (x[c] - g.mean[c]);
      const double diff = x[c] - g.mean[c];
      g.variance[c] = std::max(params_.variance_floor, g.variance[c] + rate * (diff * diff - g.variance[c]));
    }
    peaks_[best] = gaussian_peak(g, dims_);
  } else {
    GaussianComponent g;
    g.mean = x;
    for (int c = 0; c < dims_; ++c) g.variance[c] = params_.initial_variance;
    g.weight = comps_.empty() ? 1.0 : rho;
    if (static_cast<int>(comps_.size()) == params_.components) {
      const auto lightest = std::min_element(comps_.begin(), comps_.end(),
          [](const GaussianComponent& a, const GaussianComponent& b) { return a.weight < b.weight; });
      const auto k = lightest - comps_.begin();
      comps_.erase(lightest);
      counts_.erase(counts_.begin() + k);
      peaks_.erase(peaks_.begin() + k);
    }
    comps_.push_back(g);
    counts_.push_back(1);
    peaks_.push_back(gaussian_peak(g, dims_));
  }
  normalize();
  refresh_peak();
}

GlobalForegroundModel::Match GlobalForegroundModel::foreground_density(const Feature& x) const {
  Match m;
  double best_score = -1.0;
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    // p <= peak, so a component whose peak * weight cannot beat the best is skipped.
    if (!(peaks_[i] * comps_[i].weight > best_score)) continue;
    const double p = gaussian_density(comps_[i], peaks_[i], x, dims_);
    const double score = p * comps_[i].weight;
    if (score > best_score) {
      best_score = score;
      m.index = static_cast<int>(i);
      m.density = p;
    }
  }
  return m;
}

void GlobalForegroundModel::restore(std::vector<GaussianComponent> comps, std::vector<std::uint64_t> counts) {
  require(comps.size() == counts.size(), "component and count lists differ in length");
  require(static_cast<int>(comps.size()) <= params_.components, "too many foreground components");
  double sum = 0.0;
  for (const auto& g : comps) {
    require(g.weight >= 0.0 && g.weight <= 1.0, "component weight outside [0,1]");
    for (int c = 0; c < dims_; ++c) require(g.variance[c] >= params_.variance_floor, "variance below floor");
    sum += g.weight;
  }
  require(comps.empty() || std::abs(sum - 1.0) <= 1e-9, "component weights do not sum to one");
  comps_ = std::move(comps);
  counts_ = std::move(counts);
  peaks_.clear();
  for (const auto& g : comps_) peaks_.push_back(gaussian_peak(g, dims_));
  refresh_peak();
}

double AdaptiveParams::learning_rate() const {
  return 1.0 - std::pow(background_ratio, 1.0 / (absorption_seconds * fps));
}

void AdaptiveParams::validate() const {
  require(max_components >= 1 && max_components <= 255, "adaptive model needs 1..255 components");
  require(background_ratio > 0.0 && background_ratio < 1.0, "background ratio must be in (0,1)");
  require(match_threshold > 0.0 && generate_threshold > 0.0, "thresholds must be positive");
  require(min_variance > 0.0 && min_variance <= max_variance, "bad variance bounds");
  require(initial_variance >= min_variance && initial_variance <= max_variance, "initial variance out of bounds");
  require(complexity_prior >= 0.0 && complexity_prior < 1.0, "complexity prior must be in [0,1)");
  require(absorption_seconds > 0.0 && fps > 0.0, "absorption time and fps must be positive");
}

AdaptiveMixtureModel::AdaptiveMixtureModel(int width, int height, int dims, AdaptiveParams params)
    : width_(width), height_(height), dims_(dims), params_(params) {
  require(width > 0 && height > 0, "model dimensions must be positive");
  require(dims >= 1 && dims <= kMaxFeatureDims, "feature dimension must be 1..3");
  params_.validate();
  const std::size_t n = static_cast<std::size_t>(width) * height;
  comps_.resize(n * params_.max_components);
  counts_.assign(n, 0);
}

void AdaptiveMixtureModel::check_frame(const Frame& frame) const {
  if (frame.width() != width_ || frame.height() != height_ || frame.channels() != dims_) {
    throw std::invalid_argument("frame shape does not match adaptive model");
  }
}

bool AdaptiveMixtureModel::is_background(std::size_t i, const Feature& x) const {
  const GaussianComponent* c = &comps_[i * params_.max_components];
  const int n = counts_[i];
  if (n == 0) return true;
  double before = 0.0;
  for (int k = 0; k < n; ++k) {
    if (before >= params_.background_ratio) break;
    if (mahalanobis2(c[k], x, dims_) < params_.match_threshold) return true;
    before += c[k].weight;
  }
  return false;
}

ForegroundMask AdaptiveMixtureModel::classify(const Frame& frame) const {
  check_frame(frame);
  ForegroundMask mask(width_, height_, frame.index());
  auto bits = mask.bits();
  std::size_t i = 0;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x, ++i) bits[i] = is_background(i, feature_at(frame, x, y)) ? 0 : 1;
  }
  return mask;
}

void AdaptiveMixtureModel::update_pixel(std::size_t i, const Feature& x, double alpha) {
  GaussianComponent* c = &comps_[i * params_.max_components];
  int n = counts_[i];
  auto fresh = [&](GaussianComponent& g, double w) {
    g.mean = x;
    g.variance.fill(0.0);
    for (int ch = 0; ch < dims_; ++ch) g.variance[ch] = params_.initial_variance;
    g.weight = w;
  };
  if (n == 0) {
    fresh(c[0], 1.0);
    counts_[i] = 1;
    return;
  }

  const double prune = -alpha * params_.complexity_prior;
  bool fits = false;
  int kept = 0;
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    GaussianComponent g = c[k];
    g.weight = (1.0 - alpha) * g.weight + prune;
    if (!fits && mahalanobis2(g, x, dims_) < params_.generate_threshold) {
      fits = true;
      g.weight += alpha;
      const double rate = alpha / g.weight;
      for (int ch = 0; ch < dims_; ++ch) {
        g.mean[ch] += rate * (x[ch] - g.mean[ch]);
        const double diff = x[ch] - g.mean[ch];
        g.variance[ch] = std::clamp(g.variance[ch] + rate * (diff * diff - g.variance[ch]),
                                    params_.min_variance, params_.max_variance);
      }
    }
    if (g.weight < -prune) continue;  // dropped
    c[kept++] = g;
    total += g.weight;
  }
  n = kept;
  if (!fits) {
    const int slot = n < params_.max_components ? n++ : n - 1;
    if (slot < kept) total -= c[slot].weight;
    fresh(c[slot], alpha);
    total += alpha;
  }
  if (n == 0 || !(total > 0.0)) {
    fresh(c[0], 1.0);
    counts_[i] = 1;
    return;
  }
  for (int k = 0; k < n; ++k) c[k].weight /= total;
  sort_by_weight(c, n);
  counts_[i] = static_cast<std::uint8_t>(n);
}

void AdaptiveMixtureModel::update(const Frame& frame) {
  check_frame(frame);
  const double alpha = params_.learning_rate();
  std::size_t i = 0;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x, ++i) update_pixel(i, feature_at(frame, x, y), alpha);
  }
  initialized_ = true;
}

std::span<const GaussianComponent> AdaptiveMixtureModel::components(int px, int py) const {
  const std::size_t i = static_cast<std::size_t>(py) * width_ + px;
  return {comps_.data() + i * params_.max_components, counts_[i]};
}

void AdaptiveMixtureModel::set_components(int px, int py, std::span<const GaussianComponent> comps) {
  check_components(comps, dims_, params_.min_variance, params_.max_components);
  const std::size_t i = static_cast<std::size_t>(py) * width_ + px;
  std::copy(comps.begin(), comps.end(), comps_.begin() + static_cast<std::ptrdiff_t>(i * params_.max_components));
  counts_[i] = static_cast<std::uint8_t>(comps.size());
}

}  // namespace tiertraffic
