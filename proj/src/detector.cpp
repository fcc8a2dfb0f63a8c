#include "tiertraffic/detector.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace tiertraffic {

GfmDetector::GfmDetector(int width, int height, int dims, GfmDetectorParams params)
    : params_(params),
      background_(width, height, dims, params.background),
      foreground_(dims, params.foreground) {
  if (params_.bootstrap_frames < 0) throw std::invalid_argument("bootstrap frames must be nonnegative");
  if (!(params_.seed_sigma > 0.0)) throw std::invalid_argument("seed threshold must be positive");
}

bool GfmDetector::classify_at(const Feature& x, int px, int py) const {
  const DensityPrior bg = background_.background_density(x, px, py);
  const double bg_side = bg.density * bg.prior;
  const double fg_prior = 1.0 - bg.prior;
  // No component can beat the background if even the tallest peak cannot.
  if (!(foreground_.max_peak() * fg_prior > bg_side)) return false;
  const auto m = foreground_.foreground_density(x);
  return classify_pixel(bg, {m.density, fg_prior});
}

ForegroundMask GfmDetector::classify(const Frame& frame) const {
  if (frame.width() != background_.width() || frame.height() != background_.height() ||
      frame.channels() != background_.dims()) {
    throw std::invalid_argument("frame shape does not match detector");
  }
  ForegroundMask mask(frame.width(), frame.height(), frame.index());
  if (!background_.initialized()) return mask;
  auto bits = mask.bits();
  std::size_t i = 0;
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x, ++i) bits[i] = classify_at(feature_at(frame, x, y), x, y) ? 1 : 0;
  }
  return mask;
}

ForegroundMask GfmDetector::detect(const Frame& frame) {
  ForegroundMask mask = classify(frame);
  work_.add(frame);
  const bool bootstrapping = frames_seen_ < params_.bootstrap_frames;
  const bool had_model = background_.initialized();

  // Seeds are chosen against the background as it stood before this frame.
  if (had_model) {
    const auto bits = mask.bits();
    std::size_t i = 0;
    for (int y = 0; y < frame.height(); ++y) {
      for (int x = 0; x < frame.width(); ++x, ++i) {
        const Feature f = feature_at(frame, x, y);
        if (bits[i] || background_.is_outlier(f, x, y, params_.seed_sigma)) foreground_.update(f);
      }
    }
  }
  if (bootstrapping || !had_model) {
    background_.update(frame);
  } else {
    background_.update(frame, mask);
  }
  ++frames_seen_;
  return mask;
}

ZivkovicDetector::ZivkovicDetector(int width, int height, int dims, AdaptiveParams params)
    : model_(width, height, dims, params) {}

ForegroundMask ZivkovicDetector::detect(const Frame& frame) {
  ForegroundMask mask = model_.classify(frame);
  work_.add(frame);
  model_.update(frame);
  return mask;
}

namespace {

template <bool kErode>
ForegroundMask filter3x3(const ForegroundMask& in) {
  // The square element is separable: a 3-wide row pass, then a 3-tall column pass.
  const int w = in.width();
  const int h = in.height();
  const std::uint8_t outside = kErode ? 1 : 0;
  auto combine = [](std::uint8_t a, std::uint8_t b) -> std::uint8_t { return kErode ? (a & b) : (a | b); };
  const auto src = in.bits();
  std::vector<std::uint8_t> rows(src.size());
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* r = src.data() + static_cast<std::size_t>(y) * w;
    std::uint8_t* o = rows.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const std::uint8_t l = x > 0 ? (r[x - 1] ? 1 : 0) : outside;
      const std::uint8_t c = r[x] ? 1 : 0;
      const std::uint8_t rr = x + 1 < w ? (r[x + 1] ? 1 : 0) : outside;
      o[x] = combine(combine(l, c), rr);
    }
  }
  ForegroundMask out(w, h, in.frame_index());
  auto dst = out.bits();
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* up = y > 0 ? rows.data() + static_cast<std::size_t>(y - 1) * w : nullptr;
    const std::uint8_t* mid = rows.data() + static_cast<std::size_t>(y) * w;
    const std::uint8_t* down = y + 1 < h ? rows.data() + static_cast<std::size_t>(y + 1) * w : nullptr;
    std::uint8_t* o = dst.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      o[x] = combine(combine(up ? up[x] : outside, mid[x]), down ? down[x] : outside);
    }
  }
  return out;
}

}  // namespace

ForegroundMask erode3x3(const ForegroundMask& mask) { return filter3x3<true>(mask); }
ForegroundMask dilate3x3(const ForegroundMask& mask) { return filter3x3<false>(mask); }

ForegroundMask morphology_enhance(const ForegroundMask& mask) {
  const ForegroundMask opened = dilate3x3(erode3x3(mask));
  return erode3x3(dilate3x3(opened));
}

}  // namespace tiertraffic
