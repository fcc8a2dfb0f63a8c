#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tiertraffic/geometry.hpp"

namespace tt = tiertraffic;

namespace {

tt::Frame gradient_frame(int w, int h) {
  tt::Frame f(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f.at(0, y, x) = static_cast<std::uint8_t>((x * 7 + y * 13) & 0xFF);
  }
  return f;
}

// Independent even-odd test at a point: count edges straddling the
// horizontal through p whose intersection lies to the right of p.
bool naive_even_odd(const std::vector<tt::Point2>& poly, double px, double py) {
  int crossings = 0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const tt::Point2 a = poly[k];
    const tt::Point2 b = poly[(k + 1) % poly.size()];
    const bool straddles = (a.y <= py && b.y > py) || (b.y <= py && a.y > py);
    if (!straddles) continue;
    const double t = (py - a.y) / (b.y - a.y);
    if (px < a.x + t * (b.x - a.x)) ++crossings;
  }
  return crossings % 2 == 1;
}

std::vector<tt::Point2> random_star_polygon(std::mt19937& rng, int n, double cx, double cy, double rmin,
                                            double rmax) {
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> rad(rmin, rmax);
  std::vector<double> angles(n);
  for (auto& a : angles) a = ang(rng);
  std::sort(angles.begin(), angles.end());
  std::vector<tt::Point2> poly;
  for (double a : angles) {
    const double r = rad(rng);
    poly.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  }
  return poly;
}

}  // namespace

TEST(HomographyTest, IdentityWarpCopiesFrame) {
  const tt::Frame f = gradient_frame(20, 12);
  EXPECT_EQ(tt::warp_topdown(f, tt::Homography(), 20, 12).data().size(), f.data().size());
  const tt::Frame out = tt::warp_topdown(f, tt::Homography(), 20, 12);
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 20; ++x) EXPECT_EQ(out.at(0, y, x), f.at(0, y, x));
  }
}

TEST(HomographyTest, DoubleScaleMapsEvenPixels) {
  const tt::Frame f = gradient_frame(10, 8);
  const tt::Frame out = tt::warp_topdown(f, tt::Homography::scaling(2.0, 2.0), 20, 16);
  for (int j = 0; j < 8; ++j) {
    for (int i = 0; i < 10; ++i) EXPECT_EQ(out.at(0, 2 * j, 2 * i), f.at(0, j, i));
  }
}

TEST(HomographyTest, CorrespondencesReproduceClosedFormMap) {
  Eigen::Matrix3d m;
  m << 1.2, 0.3, 5.0, -0.1, 0.9, 2.0, 0.001, 0.002, 1.0;
  const tt::Homography truth(m);
  const std::array<tt::Point2, 4> src{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  std::array<tt::Point2, 4> dst;
  for (int k = 0; k < 4; ++k) {
    const double x = src[k].x, y = src[k].y;
    const double w = 0.001 * x + 0.002 * y + 1.0;
    dst[k] = {(1.2 * x + 0.3 * y + 5.0) / w, (-0.1 * x + 0.9 * y + 2.0) / w};
  }
  const auto solved = tt::Homography::from_correspondences(src, dst);
  for (int k = 0; k < 4; ++k) {
    const tt::Point2 p = solved.apply(src[k]);
    EXPECT_LT(std::hypot(p.x - dst[k].x, p.y - dst[k].y), 0.5);
  }
  const tt::Point2 mid = solved.apply({0.5, 0.25});
  const tt::Point2 ref = truth.apply({0.5, 0.25});
  EXPECT_NEAR(mid.x, ref.x, 1e-9);
  EXPECT_NEAR(mid.y, ref.y, 1e-9);
}

TEST(HomographyTest, RoadCornersMapToRectangle) {
  const std::array<tt::Point2, 4> road{{{120, 40}, {200, 40}, {300, 170}, {20, 170}}};
  const std::array<tt::Point2, 4> rect{{{0, 0}, {100, 0}, {100, 300}, {0, 300}}};
  const auto h = tt::Homography::from_correspondences(road, rect);
  for (int k = 0; k < 4; ++k) {
    const auto p = h.apply(road[k]);
    EXPECT_NEAR(p.x, rect[k].x, 0.5);
    EXPECT_NEAR(p.y, rect[k].y, 0.5);
  }
}

TEST(HomographyTest, SingularRejected) {
  Eigen::Matrix3d m;
  m << 1, 2, 3, 2, 4, 6, 0, 0, 1;
  EXPECT_THROW(tt::Homography{m}, std::invalid_argument);
  const std::array<tt::Point2, 4> collinear{{{0, 0}, {1, 1}, {2, 2}, {3, 3}}};
  EXPECT_THROW(tt::Homography::from_correspondences(collinear, collinear), std::invalid_argument);
}

TEST(HomographyTest, WarpThenInverseWithinOnePixel) {
  Eigen::Matrix3d m;
  m << 1.05, 0.08, 3.0, -0.04, 0.97, 2.0, 0.0002, 0.0001, 1.0;
  const tt::Homography h(m);
  // Coordinate image: each pixel stores its own column (low) and row (high).
  const int w = 64, hgt = 48;
  tt::Frame coords(w, hgt, 3);
  for (int y = 0; y < hgt; ++y) {
    for (int x = 0; x < w; ++x) {
      coords.at(0, y, x) = static_cast<std::uint8_t>(x);
      coords.at(1, y, x) = static_cast<std::uint8_t>(y);
      coords.at(2, y, x) = 255;
    }
  }
  const tt::Frame there = tt::warp_topdown(coords, h, w, hgt);
  const tt::Frame back = tt::warp_topdown(there, h.inverse(), w, hgt);
  for (int y = 8; y < hgt - 8; ++y) {
    for (int x = 8; x < w - 8; ++x) {
      ASSERT_EQ(back.at(2, y, x), 255) << x << "," << y;
      EXPECT_LE(std::abs(back.at(0, y, x) - x), 1);
      EXPECT_LE(std::abs(back.at(1, y, x) - y), 1);
    }
  }
}

TEST(HomographyTest, RescaledMatchesConjugation) {
  Eigen::Matrix3d m;
  m << 1.1, 0.2, 4.0, 0.0, 0.9, -3.0, 0.0005, 0.0, 1.0;
  const tt::Homography h(m);
  const tt::Homography half = h.rescaled(0.5);
  const tt::Point2 p{40, 30};
  const tt::Point2 full = h.apply({p.x * 2, p.y * 2});
  const tt::Point2 q = half.apply(p);
  EXPECT_NEAR(q.x * 2, full.x, 1e-9);
  EXPECT_NEAR(q.y * 2, full.y, 1e-9);
}

TEST(CalibrationTest, PixelsToMph) {
  tt::Calibration c;
  c.meters_per_pixel = 0.1;
  c.frame_interval = 1.0 / 15.0;
  EXPECT_EQ(tt::pixels_to_mph(0.0, c), 0.0);
  EXPECT_NEAR(tt::pixels_to_mph(2.0, c), 2.0 * 0.1 * 15.0 * 2.23694, 1e-9);
  EXPECT_NEAR(tt::pixels_to_mph(2.0, c), 6.711, 1e-3);
  tt::Calibration d = c;
  d.meters_per_pixel = 0.2;
  EXPECT_EQ(tt::pixels_to_mph(2.0, d), 2.0 * tt::pixels_to_mph(2.0, c));
  EXPECT_NEAR(tt::pixels_to_mph(6.0, c), 3.0 * tt::pixels_to_mph(2.0, c), 1e-12);
  tt::Calibration slow = c;
  slow.frame_interval = 0.1;
  EXPECT_LT(tt::pixels_to_mph(2.0, slow), tt::pixels_to_mph(2.0, c));
  EXPECT_THROW(tt::pixels_to_mph(-1.0, c), std::invalid_argument);
}

TEST(CalibrationTest, ValidateRejectsBadValues) {
  tt::Calibration c;
  c.line_a = 10;
  c.line_b = 10;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.line_b = 20;
  c.meters_per_pixel = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(RoiTest, ConvexCentroidInsideAndFarPointOutside) {
  const tt::Roi roi({{10, 10}, {50, 12}, {60, 40}, {20, 45}});
  EXPECT_TRUE(tt::point_in_roi({35, 27}, roi));
  EXPECT_FALSE(tt::point_in_roi({100, 100}, roi));
  EXPECT_FALSE(tt::point_in_roi({-1, 20}, roi));
}

TEST(RoiTest, BoundaryCountsAsInside) {
  const tt::Roi roi = tt::Roi::rectangle(0, 0, 10, 10);
  EXPECT_TRUE(tt::point_in_roi({0, 5}, roi));
  EXPECT_TRUE(tt::point_in_roi({10, 10}, roi));
  EXPECT_TRUE(tt::point_in_roi({5, 10}, roi));
  EXPECT_FALSE(tt::point_in_roi({10.0001, 5}, roi));
}

TEST(RoiTest, RejectsDegenerateAndSelfIntersecting) {
  EXPECT_THROW(tt::Roi({{0, 0}, {1, 1}}), std::invalid_argument);
  EXPECT_THROW(tt::Roi({{0, 0}, {10, 10}, {10, 0}, {0, 10}}), std::invalid_argument);
}

TEST(RoiTest, RasterizationMatchesBruteForceOnRandomPolygons) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const auto poly = random_star_polygon(rng, 7 + trial % 6, 31.7, 32.3, 6.0, 29.0);
    const tt::Roi roi(poly);
    const auto raster = tt::rasterize_roi(roi, 64, 64);
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        const bool expect = naive_even_odd(poly, x, y);
        ASSERT_EQ(raster[static_cast<std::size_t>(y) * 64 + x] != 0, expect) << "trial " << trial << " at " << x << "," << y;
        ASSERT_EQ(tt::point_in_roi({double(x), double(y)}, roi), expect);
      }
    }
  }
}

TEST(RoiTest, RasterizationIncludesIntegerBoundary) {
  const auto raster = tt::rasterize_roi(tt::Roi::rectangle(2, 3, 6, 5), 10, 10);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) {
      const bool inside = x >= 2 && x <= 6 && y >= 3 && y <= 5;
      EXPECT_EQ(raster[static_cast<std::size_t>(y) * 10 + x] != 0, inside) << x << "," << y;
    }
  }
}
