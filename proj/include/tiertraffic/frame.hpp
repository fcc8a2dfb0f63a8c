#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tiertraffic {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

using Rgb = std::array<std::uint8_t, 3>;

/// Round half up and clamp to [0, 255].
inline std::uint8_t saturate_u8(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 254.5) return 255;
  return static_cast<std::uint8_t>(static_cast<int>(v + 0.5));
}

/// Geometry and timing of a frame sequence.
struct VideoSpec {
  int width = 0;
  int height = 0;
  double fps = 15.0;
  double duration = 0.0;  // seconds

  /// round(fps * duration)
  int frame_count() const;
  double frame_interval() const { return 1.0 / fps; }
  /// Throws std::invalid_argument when a dimension or the rate is not positive.
  void validate() const;
};

/// Planar 8-bit image. Channel c, row y, column x lives at
/// data[(c * height + y) * width + x]; channels is 1 (intensity) or 3 (RGB).
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, int channels, int index = 0, double timestamp = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  int index() const { return index_; }
  double timestamp() const { return timestamp_; }
  void set_index(int index) { index_ = index; }
  void set_timestamp(double t) { timestamp_ = t; }

  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const { return data_.empty(); }

  std::uint8_t at(int c, int y, int x) const { return data_[offset(c, y, x)]; }
  std::uint8_t& at(int c, int y, int x) { return data_[offset(c, y, x)]; }

  std::span<const std::uint8_t> plane(int c) const {
    return {data_.data() + static_cast<std::size_t>(c) * pixel_count(), pixel_count()};
  }
  std::span<std::uint8_t> plane(int c) {
    return {data_.data() + static_cast<std::size_t>(c) * pixel_count(), pixel_count()};
  }
  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  bool same_shape(const Frame& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }
  /// Pixel and metadata equality.
  friend bool operator==(const Frame& a, const Frame& b) {
    return a.same_shape(b) && a.index_ == b.index_ && a.timestamp_ == b.timestamp_ &&
           a.data_ == b.data_;
  }

 private:
  std::size_t offset(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  int index_ = 0;
  double timestamp_ = 0.0;
  std::vector<std::uint8_t> data_;
};

/// Binary per-pixel classification, 1 = foreground.
class ForegroundMask {
 public:
  ForegroundMask() = default;
  ForegroundMask(int width, int height, int frame_index = 0)
      : width_(width), height_(height), frame_index_(frame_index),
        bits_(static_cast<std::size_t>(width) * height, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  int frame_index() const { return frame_index_; }
  void set_frame_index(int index) { frame_index_ = index; }
  std::size_t size() const { return bits_.size(); }

  std::uint8_t at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t& at(int x, int y) { return bits_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const std::uint8_t> bits() const { return bits_; }
  std::span<std::uint8_t> bits() { return bits_; }

  std::size_t count() const;
  bool same_shape(const ForegroundMask& o) const { return width_ == o.width_ && height_ == o.height_; }
  friend bool operator==(const ForegroundMask& a, const ForegroundMask& b) {
    return a.same_shape(b) && a.bits_ == b.bits_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int frame_index_ = 0;
  std::vector<std::uint8_t> bits_;
};

}  // namespace tiertraffic
