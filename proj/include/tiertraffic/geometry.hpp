#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "tiertraffic/frame.hpp"

namespace tiertraffic {

/// Nonsingular projective map between pixel planes. Pixel centers sit at
/// integer coordinates.
class Homography {
 public:
  Homography();  // identity
  /// Throws std::invalid_argument when `m` is singular.
  explicit Homography(const Eigen::Matrix3d& m);

  /// Solves the 8-DOF system mapping src[k] -> dst[k].
  static Homography from_correspondences(const std::array<Point2, 4>& src,
                                         const std::array<Point2, 4>& dst);
  static Homography scaling(double sx, double sy);

  Point2 apply(Point2 p) const;
  Homography inverse() const;
  /// Same map expressed for images resampled by `factor` on both sides: S H S^-1.
  Homography rescaled(double factor) const;
  bool is_identity() const;
  const Eigen::Matrix3d& matrix() const { return m_; }

 private:
  Eigen::Matrix3d m_;
};

/// Inverse-mapped nearest-neighbour warp into a width x height output.
/// Output pixels whose preimage falls outside the input are 0.
Frame warp_topdown(const Frame& frame, const Homography& h, int width, int height);
ForegroundMask warp_topdown(const ForegroundMask& mask, const Homography& h, int width, int height);

/// Physical calibration of the warped view.
struct Calibration {
  static constexpr double kMpsToMph = 2.23694;

  double meters_per_pixel = 0.1;
  double line_a = 0.0;  // first referential row, warped px
  double line_b = 0.0;  // second referential row, warped px
  double frame_interval = 1.0 / 15.0;  // seconds
  double unit_factor = kMpsToMph;

  void validate() const;
  Calibration rescaled(double factor) const;  // for an image resampled by `factor`
};

/// displacement [px/frame] * meters_per_pixel / frame_interval * unit_factor.
double pixels_to_mph(double displacement, const Calibration& calib);

/// Simple polygon in warped pixel coordinates.
class Roi {
 public:
  Roi() = default;
  /// Throws std::invalid_argument for < 3 vertices or a self-intersecting ring.
  explicit Roi(std::vector<Point2> vertices);

  static Roi rectangle(double x0, double y0, double x1, double y1);

  const std::vector<Point2>& vertices() const { return vertices_; }
  Roi scaled(double factor) const;
  bool empty() const { return vertices_.empty(); }

 private:
  std::vector<Point2> vertices_;
};

/// Even-odd membership; points on an edge count as inside.
bool point_in_roi(Point2 p, const Roi& roi);

/// Scanline rasterization at pixel centers; agrees with point_in_roi on every pixel.
std::vector<std::uint8_t> rasterize_roi(const Roi& roi, int width, int height);

}  // namespace tiertraffic
