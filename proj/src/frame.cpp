#include "tiertraffic/frame.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tiertraffic {

int VideoSpec::frame_count() const { return static_cast<int>(std::lround(fps * duration)); }

void VideoSpec::validate() const {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("video dimensions must be positive, got " + std::to_string(width) +
                                "x" + std::to_string(height));
  }
  if (!(fps > 0.0)) throw std::invalid_argument("fps must be positive");
  if (!(duration >= 0.0)) throw std::invalid_argument("duration must be nonnegative");
}

Frame::Frame(int width, int height, int channels, int index, double timestamp)
    : width_(width), height_(height), channels_(channels), index_(index), timestamp_(timestamp) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("frame dimensions must be positive");
  if (channels != 1 && channels != 3) {
    throw std::invalid_argument("frame channel count must be 1 or 3, got " +
                                std::to_string(channels));
  }
  data_.assign(static_cast<std::size_t>(width) * height * channels, 0);
}

std::size_t ForegroundMask::count() const {
  return static_cast<std::size_t>(std::count_if(bits_.begin(), bits_.end(), [](auto b) { return b != 0; }));
}

}  // namespace tiertraffic
