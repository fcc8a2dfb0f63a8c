#include "tiertraffic/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tiertraffic {
namespace {

// Source cells overlapped by output cell i along one axis, with overlap lengths
// in source-pixel units.
struct Footprint {
  int first = 0;
  std::vector<double> weights;
};

std::vector<Footprint> footprints(int src, int dst) {
  std::vector<Footprint> out(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    const double lo = i * scale;
    const double hi = (i + 1) * scale;
    const int first = static_cast<int>(std::floor(lo));
    const int last = std::min(src - 1, static_cast<int>(std::ceil(hi)) - 1);
    out[i].first = first;
    for (int s = first; s <= last; ++s) {
      const double w = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
      out[i].weights.push_back(w);
    }
  }
  return out;
}

}  // namespace

Frame resize(const Frame& frame, int width, int height) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("resize target must be positive");
  if (width == frame.width() && height == frame.height()) return frame;

  const auto fx = footprints(frame.width(), width);
  const auto fy = footprints(frame.height(), height);
  Frame out(width, height, frame.channels(), frame.index(), frame.timestamp());
  std::vector<double> row_acc(static_cast<std::size_t>(width));

  for (int c = 0; c < frame.channels(); ++c) {
    for (int y = 0; y < height; ++y) {
      std::fill(row_acc.begin(), row_acc.end(), 0.0);
      double wy_total = 0.0;
      for (std::size_t k = 0; k < fy[y].weights.size(); ++k) {
        const int sy = fy[y].first + static_cast<int>(k);
        const double wy = fy[y].weights[k];
        wy_total += wy;
        for (int x = 0; x < width; ++x) {
          double acc = 0.0;
          for (std::size_t j = 0; j < fx[x].weights.size(); ++j) {
            acc += fx[x].weights[j] * frame.at(c, sy, fx[x].first + static_cast<int>(j));
          }
          row_acc[x] += wy * acc;
        }
      }
      for (int x = 0; x < width; ++x) {
        double wx_total = 0.0;
        for (double w : fx[x].weights) wx_total += w;
        const double v = row_acc[x] / (wx_total * wy_total);
        out.at(c, y, x) = saturate_u8(v);
      }
    }
  }
  return out;
}

Frame to_intensity(const Frame& frame) {
  if (frame.channels() == 1) return frame;
  Frame out(frame.width(), frame.height(), 1, frame.index(), frame.timestamp());
  auto r = frame.plane(0);
  auto g = frame.plane(1);
  auto b = frame.plane(2);
  auto dst = out.plane(0);
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const unsigned sum = static_cast<unsigned>(r[i]) + g[i] + b[i];
    dst[i] = static_cast<std::uint8_t>((sum + 1) / 3);
  }
  return out;
}

}  // namespace tiertraffic
