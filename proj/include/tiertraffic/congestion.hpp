#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "tiertraffic/frame.hpp"
#include "tiertraffic/geometry.hpp"

namespace tiertraffic {

struct CongestionVerdict {
  int frame_index = 0;
  bool congested = false;
  std::size_t area = 0;  // stopped-vehicle pixels in the ROI
  int t_c = 0;
};

/// ROI pixels set in the GFM mask and clear in the Zivkovic mask.
/// `roi` is a rasterized membership grid of the same size as the masks.
std::size_t stopped_area(const ForegroundMask& gfm, const ForegroundMask& zivkovic,
                         const std::vector<std::uint8_t>& roi);

/// Dwell counter: T_c rises while the area exceeds tau_a and falls (not
/// below zero) otherwise; congested while T_c > tau_t.
struct CongestionState {
  int t_c = 0;
  double area_threshold = 0.0;  // tau_a, px
  int time_threshold = 150;     // tau_t, frames

  CongestionState() = default;
  CongestionState(double tau_a, int tau_t);
  CongestionVerdict step(int frame_index, std::size_t area);
};

/// round(seconds * fps)
int default_time_threshold(double fps, double seconds = 10.0);

/// count * (length / mpp) * (width / mpp): the pixel area of `count` vehicles.
double vehicle_area_threshold(double vehicle_length_m, double vehicle_width_m, double meters_per_pixel,
                              int count = 3);

/// Folds stopped_area and CongestionState over synchronized mask pairs.
class CongestionDetector {
 public:
  CongestionDetector(const Roi& roi, int width, int height, double tau_a, int tau_t);

  /// Throws std::invalid_argument when the two masks are from different frames
  /// or have different shapes.
  CongestionVerdict step(const ForegroundMask& gfm, const ForegroundMask& zivkovic);
  const CongestionState& state() const { return state_; }
  const std::vector<std::uint8_t>& roi_mask() const { return roi_; }

 private:
  std::vector<std::uint8_t> roi_;
  int width_;
  int height_;
  CongestionState state_;
};

std::vector<CongestionVerdict> detect_congestion(const std::vector<ForegroundMask>& gfm,
                                                 const std::vector<ForegroundMask>& zivkovic, const Roi& roi,
                                                 double tau_a, int tau_t);

/// Header: frame,area_px,T_c,congested
void write_verdict_csv(std::ostream& out, const std::vector<CongestionVerdict>& verdicts);

}  // namespace tiertraffic
