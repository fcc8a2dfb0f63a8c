#include "tiertraffic/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace tiertraffic {
namespace {

constexpr double kSingularEps = 1e-12;

void check_nonsingular(const Eigen::Matrix3d& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !std::isfinite(scale) ||
      std::abs(m.determinant()) <= kSingularEps * scale * scale * scale) {
    throw std::invalid_argument("homography is singular");
  }
}

double cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(Point2 p, Point2 a, Point2 b) {
  if (cross(a, b, p) != 0.0) return false;
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) && p.y >= std::min(a.y, b.y) &&
         p.y <= std::max(a.y, b.y);
}

int sign(double v) { return (v > 0) - (v < 0); }

bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2) {
  const int d1 = sign(cross(q1, q2, p1));
  const int d2 = sign(cross(q1, q2, p2));
  const int d3 = sign(cross(p1, p2, q1));
  const int d4 = sign(cross(p1, p2, q2));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  return (d1 == 0 && on_segment(p1, q1, q2)) || (d2 == 0 && on_segment(p2, q1, q2)) ||
         (d3 == 0 && on_segment(q1, p1, p2)) || (d4 == 0 && on_segment(q2, p1, p2));
}

// x where edge a-b crosses the horizontal line at y; caller guarantees a.y != b.y.
double edge_crossing_x(Point2 a, Point2 b, double y) {
  return a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
}

template <typename Image, typename Sampler>
void warp_impl(Image& out, const Homography& h, int in_w, int in_h, Sampler&& copy) {
  const Eigen::Matrix3d inv = h.inverse().matrix();
  for (int v = 0; v < out.height(); ++v) {
    for (int u = 0; u < out.width(); ++u) {
      const double w = inv(2, 0) * u + inv(2, 1) * v + inv(2, 2);
      if (w == 0.0) continue;
      const double sx = (inv(0, 0) * u + inv(0, 1) * v + inv(0, 2)) / w;
      const double sy = (inv(1, 0) * u + inv(1, 1) * v + inv(1, 2)) / w;
      const long ix = std::lround(sx);
      const long iy = std::lround(sy);
      if (ix < 0 || iy < 0 || ix >= in_w || iy >= in_h) continue;
      copy(u, v, static_cast<int>(ix), static_cast<int>(iy));
    }
  }
}

}  // namespace

Homography::Homography() : m_(Eigen::Matrix3d::Identity()) {}

Homography::Homography(const Eigen::Matrix3d& m) : m_(m) {
  check_nonsingular(m_);
  m_ /= m_(2, 2) != 0.0 ? m_(2, 2) : 1.0;
}

Homography Homography::from_correspondences(const std::array<Point2, 4>& src,
                                            const std::array<Point2, 4>& dst) {
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int k = 0; k < 4; ++k) {
    const double x = src[k].x, y = src[k].y, u = dst[k].x, v = dst[k].y;
    a.row(2 * k) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    a.row(2 * k + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * k) = u;
    b(2 * k + 1) = v;
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!lu.isInvertible()) throw std::invalid_argument("degenerate point correspondences");
  const Eigen::Matrix<double, 8, 1> h = lu.solve(b);
  Eigen::Matrix3d m;
  m << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  return Homography(m);
}

Homography Homography::scaling(double sx, double sy) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) = sx;
  m(1, 1) = sy;
  return Homography(m);
}

Point2 Homography::apply(Point2 p) const {
  const Eigen::Vector3d r = m_ * Eigen::Vector3d(p.x, p.y, 1.0);
  return {r(0) / r(2), r(1) / r(2)};
}

Homography Homography::inverse() const { return Homography(m_.inverse()); }

Homography Homography::rescaled(double factor) const {
  Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
  s(0, 0) = s(1, 1) = factor;
  Eigen::Matrix3d s_inv = Eigen::Matrix3d::Identity();
  s_inv(0, 0) = s_inv(1, 1) = 1.0 / factor;
  return Homography(s * m_ * s_inv);
}

bool Homography::is_identity() const { return m_ == Eigen::Matrix3d::Identity(); }

Frame warp_topdown(const Frame& frame, const Homography& h, int width, int height) {
  Frame out(width, height, frame.channels(), frame.index(), frame.timestamp());
  warp_impl(out, h, frame.width(), frame.height(), [&](int u, int v, int x, int y) {
    for (int c = 0; c < frame.channels(); ++c) out.at(c, v, u) = frame.at(c, y, x);
  });
  return out;
}

ForegroundMask warp_topdown(const ForegroundMask& mask, const Homography& h, int width, int height) {
  ForegroundMask out(width, height, mask.frame_index());
  warp_impl(out, h, mask.width(), mask.height(),
            [&](int u, int v, int x, int y) { out.at(u, v) = mask.at(x, y); });
  return out;
}

void Calibration::validate() const {
  if (!(meters_per_pixel > 0.0)) throw std::invalid_argument("meters_per_pixel must be positive");
  if (line_a == line_b) throw std::invalid_argument("referential lines must be distinct");
  if (!(frame_interval > 0.0)) throw std::invalid_argument("frame interval must be positive");
}

Calibration Calibration::rescaled(double factor) const {
  Calibration c = *this;
  c.meters_per_pixel = meters_per_pixel / factor;
  c.line_a = line_a * factor;
  c.line_b = line_b * factor;
  return c;
}

double pixels_to_mph(double displacement, const Calibration& calib) {
  if (displacement < 0.0) throw std::invalid_argument("displacement must be nonnegative");
  return displacement * calib.meters_per_pixel / calib.frame_interval * calib.unit_factor;
}

Roi::Roi(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw std::invalid_argument("ROI polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(vertices_[i], vertices_[(i + 1) % n], vertices_[j],
                             vertices_[(j + 1) % n])) {
        throw std::invalid_argument("ROI polygon is self-intersecting");
      }
    }
  }
}

Roi Roi::rectangle(double x0, double y0, double x1, double y1) {
  return Roi({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

Roi Roi::scaled(double factor) const {
  Roi r;
  r.vertices_ = vertices_;
  for (auto& v : r.vertices_) {
    v.x *= factor;
    v.y *= factor;
  }
  return r;
}

bool point_in_roi(Point2 p, const Roi& roi) {
  const auto& v = roi.vertices();
  const std::size_t n = v.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (on_segment(p, v[j], v[i])) return true;
    if ((v[i].y > p.y) != (v[j].y > p.y) && p.x < edge_crossing_x(v[i], v[j], p.y)) {
      inside = !inside;
    }
  }
  return inside;
}

std::vector<std::uint8_t> rasterize_roi(const Roi& roi, int width, int height) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(width) * height, 0);
  const auto& v = roi.vertices();
  const std::size_t n = v.size();
  std::vector<double> xs;
  for (int y = 0; y < height; ++y) {
    xs.clear();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      if ((v[i].y > y) != (v[j].y > y)) xs.push_back(edge_crossing_x(v[i], v[j], y));
    }
    std::sort(xs.begin(), xs.end());
    // Pixel x is inside iff an odd number of crossings lie strictly right of it.
    std::size_t right = 0;  // index of first crossing > x
    for (int x = 0; x < width; ++x) {
      while (right < xs.size() && !(x < xs[right])) ++right;
      if ((xs.size() - right) % 2 == 1) out[static_cast<std::size_t>(y) * width + x] = 1;
    }
  }
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const int x0 = std::max(0, static_cast<int>(std::ceil(std::min(v[i].x, v[j].x))));
    const int x1 = std::min(width - 1, static_cast<int>(std::floor(std::max(v[i].x, v[j].x))));
    const int y0 = std::max(0, static_cast<int>(std::ceil(std::min(v[i].y, v[j].y))));
    const int y1 = std::min(height - 1, static_cast<int>(std::floor(std::max(v[i].y, v[j].y))));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (on_segment({static_cast<double>(x), static_cast<double>(y)}, v[j], v[i])) {
          out[static_cast<std::size_t>(y) * width + x] = 1;
        }
      }
    }
  }
  return out;
}

}  // namespace tiertraffic
