#include "tiertraffic/congestion.hpp"

#include <cmath>
#include <stdexcept>

namespace tiertraffic {

std::size_t stopped_area(const ForegroundMask& gfm, const ForegroundMask& zivkovic,
                         const std::vector<std::uint8_t>& roi) {
  if (!gfm.same_shape(zivkovic) || roi.size() != gfm.size()) {
    throw std::invalid_argument("mask and ROI dimensions differ");
  }
  const auto g = gfm.bits();
  const auto z = zivkovic.bits();
  std::size_t n = 0;
  for (std::size_t i = 0; i < g.size(); ++i) n += (roi[i] && g[i] && !z[i]) ? 1 : 0;
  return n;
}

CongestionState::CongestionState(double tau_a, int tau_t) : area_threshold(tau_a), time_threshold(tau_t) {
  if (!(tau_a > 0.0)) throw std::invalid_argument("area threshold must be positive");
  if (tau_t < 0) throw std::invalid_argument("time threshold must be nonnegative");
}

CongestionVerdict CongestionState::step(int frame_index, std::size_t area) {
  if (static_cast<double>(area) > area_threshold) {
    ++t_c;
  } else if (t_c > 0) {
    --t_c;
  }
  return {frame_index, t_c > time_threshold, area, t_c};
}

int default_time_threshold(double fps, double seconds) {
  return static_cast<int>(std::lround(seconds * fps));
}

double vehicle_area_threshold(double vehicle_length_m, double vehicle_width_m, double meters_per_pixel, int count) {
  if (!(meters_per_pixel > 0.0)) throw std::invalid_argument("meters_per_pixel must be positive");
  return count * (vehicle_length_m / meters_per_pixel) * (vehicle_width_m / meters_per_pixel);
}

CongestionDetector::CongestionDetector(const Roi& roi, int width, int height, double tau_a, int tau_t)
    : roi_(rasterize_roi(roi, width, height)), width_(width), height_(height), state_(tau_a, tau_t) {}

CongestionVerdict CongestionDetector::step(const ForegroundMask& gfm, const ForegroundMask& zivkovic) {
  if (gfm.frame_index() != zivkovic.frame_index()) throw std::invalid_argument("mask streams out of sync");
  if (gfm.width() != width_ || gfm.height() != height_) throw std::invalid_argument("mask dimensions differ from ROI grid");
  return state_.step(gfm.frame_index(), stopped_area(gfm, zivkovic, roi_));
}

std::vector<CongestionVerdict> detect_congestion(const std::vector<ForegroundMask>& gfm,
                                                 const std::vector<ForegroundMask>& zivkovic, const Roi& roi,
                                                 double tau_a, int tau_t) {
  if (gfm.size() != zivkovic.size()) throw std::invalid_argument("mask streams differ in length");
  std::vector<CongestionVerdict> out;
  if (gfm.empty()) return out;
  CongestionDetector det(roi, gfm.front().width(), gfm.front().height(), tau_a, tau_t);
  for (std::size_t i = 0; i < gfm.size(); ++i) out.push_back(det.step(gfm[i], zivkovic[i]));
  return out;
}

void write_verdict_csv(std::ostream& out, const std::vector<CongestionVerdict>& verdicts) {
  out << "frame,area_px,T_c,congested\n";
  for (const auto& v : verdicts) out << v.frame_index << ',' << v.area << ',' << v.t_c << ',' << (v.congested ? 1 : 0) << '\n';
}

}  // namespace tiertraffic
