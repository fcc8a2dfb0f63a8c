#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tiertraffic/detector.hpp"
#include "tiertraffic/scene.hpp"

namespace tt = tiertraffic;

namespace {

constexpr int kW = 80;
constexpr int kH = 120;

tt::SceneScript lane_script() {
  tt::SceneScript s;
  s.meters_per_pixel = 0.2;
  s.road_polygon = {{20, 0}, {60, 0}, {60, 119}, {20, 119}};
  s.seed = 21;
  return s;
}

tt::VehicleScript vehicle(int id, double x_m, double spawn, std::vector<tt::SpeedSegment> profile,
                          tt::Rgb color = {210, 40, 40}) {
  tt::VehicleScript v;
  v.id = id;
  v.spawn_time = spawn;
  v.path = {{x_m, 2.5}, {x_m, 21.5}};
  v.speed_profile = std::move(profile);
  v.color = color;
  return v;
}

// Straight re-evaluation of the decision rule from model state, no shortcuts.
bool naive_gfm_pixel(const tt::GfmDetector& det, const tt::Frame& frame, int x, int y) {
  const int d = frame.channels();
  double xv[3] = {0, 0, 0};
  for (int c = 0; c < d; ++c) xv[c] = frame.at(c, y, x);
  auto density = [&](const tt::GaussianComponent& g) {
    double det_cov = 1.0;
    for (int c = 0; c < d; ++c) det_cov *= g.variance[c];
    double q = 0.0;
    for (int c = 0; c < d; ++c) q += (xv[c] - g.mean[c]) * (xv[c] - g.mean[c]) / g.variance[c];
    return std::pow(2.0 * std::numbers::pi, -0.5 * d) / std::sqrt(det_cov) * std::exp(-0.5 * q);
  };
  const auto bg = det.background().components(x, y);
  const double w1 = bg[0].weight;
  const double bg_side = density(bg[0]) * w1;
  double best = -1.0, p_f = 0.0;
  for (const auto& g : det.foreground().components()) {
    const double p = density(g);
    if (p * g.weight > best) {
      best = p * g.weight;
      p_f = p;
    }
  }
  return p_f * (1.0 - w1) > bg_side;
}

}  // namespace

TEST(GfmDetectorTest, MatchesBruteForceEvaluatorBitExact) {
  auto script = lane_script();
  script.vehicles.push_back(vehicle(1, 6.0, 2.5, {{0.0, 7.0}}, {210, 40, 40}));
  script.vehicles.push_back(vehicle(2, 10.0, 3.0, {{0.0, 5.0}, {1.0, 0.0}}, {40, 50, 200}));
  script.vehicles.push_back(vehicle(3, 8.0, 3.5, {{0.0, 9.0}}, {230, 220, 60}));
  const tt::SceneRenderer r(script, {kW, kH, 15.0, 6.0});
  tt::GfmDetector det(kW, kH, 3);
  int fg_seen = 0;
  for (int i = 0; i < r.frame_count(); ++i) {
    const tt::Frame f = r.render(i);
    if (i >= 40 && i % 5 == 0) {
      const tt::ForegroundMask mask = det.classify(f);
      for (int y = 0; y < kH; ++y) {
        for (int x = 0; x < kW; ++x) {
          ASSERT_EQ(mask.at(x, y) != 0, naive_gfm_pixel(det, f, x, y)) << "frame " << i << " at " << x << "," << y;
        }
      }
      fg_seen += static_cast<int>(mask.count());
    }
    det.detect(f);
  }
  EXPECT_GT(fg_seen, 0);
  EXPECT_GE(det.foreground().components().size(), 3u);
}

TEST(DetectorTest, MovingVehicleInBothMasks) {
  auto script = lane_script();
  script.vehicles.push_back(vehicle(1, 8.0, 3.0, {{0.0, 6.0}}));
  const tt::SceneRenderer r(script, {kW, kH, 15.0, 6.0});
  tt::GfmDetector gfm(kW, kH, 3);
  tt::ZivkovicDetector ziv(kW, kH, 3);
  tt::VehicleMotion motion(script.vehicles[0], script.meters_per_pixel);
  for (int i = 0; i < r.frame_count(); ++i) {
    const tt::Frame f = r.render(i);
    const auto mg = gfm.detect(f);
    const auto mz = ziv.detect(f);
    if (i == 60) {  // t = 4 s, one second after spawn
      const auto c = motion.centroid_at(r.timestamp(i));
      const int cx = static_cast<int>(std::lround(c.x));
      const int cy = static_cast<int>(std::lround(c.y));
      EXPECT_EQ(mg.at(cx, cy), 1);
      EXPECT_EQ(mz.at(cx, cy), 1);
    }
  }
}

TEST(DetectorTest, StoppedVehicleStaysInGfmButLeavesZivkovic) {
  auto script = lane_script();
  // Enters at 3 s, stops at 4 s for 25 s.
  script.vehicles.push_back(vehicle(1, 8.0, 3.0, {{0.0, 6.0}, {1.0, 0.0}, {26.0, 6.0}}));
  const tt::SceneRenderer r(script, {kW, kH, 15.0, 24.0});
  tt::AdaptiveParams ap;
  ap.absorption_seconds = 1.0;
  tt::GfmDetector gfm(kW, kH, 3);
  tt::ZivkovicDetector ziv(kW, kH, 3, ap);
  tt::VehicleMotion motion(script.vehicles[0], script.meters_per_pixel);
  const int check = static_cast<int>(std::lround((4.0 + ap.absorption_seconds + 15.0) * 15.0));
  ASSERT_LT(check, r.frame_count());
  for (int i = 0; i <= check; ++i) {
    const tt::Frame f = r.render(i);
    const auto mg = gfm.detect(f);
    const auto mz = ziv.detect(f);
    if (i == check) {
      const auto c = motion.centroid_at(r.timestamp(i));
      const int cx = static_cast<int>(std::lround(c.x));
      const int cy = static_cast<int>(std::lround(c.y));
      EXPECT_EQ(mg.at(cx, cy), 1);
      EXPECT_EQ(mz.at(cx, cy), 0);
      // Most of the body, not just the centre.
      int g = 0, z = 0, n = 0;
      for (int y = cy - 8; y <= cy + 8; ++y) {
        for (int x = cx - 3; x <= cx + 3; ++x) {
          g += mg.at(x, y);
          z += mz.at(x, y);
          ++n;
        }
      }
      EXPECT_GT(g, 0.9 * n);
      EXPECT_LT(z, 0.1 * n);
    }
  }
}

TEST(DetectorTest, CleanBackgroundFalsePositiveRate) {
  const tt::SceneRenderer r(lane_script(), {kW, kH, 15.0, 14.0});
  tt::GfmDetector gfm(kW, kH, 3);
  tt::ZivkovicDetector ziv(kW, kH, 3);
  double worst_g = 0.0, worst_z = 0.0;
  for (int i = 0; i < r.frame_count(); ++i) {
    const tt::Frame f = r.render(i);
    const auto mg = gfm.detect(f);
    const auto mz = ziv.detect(f);
    if (i >= 100) {
      worst_g = std::max(worst_g, static_cast<double>(mg.count()) / mg.size());
      worst_z = std::max(worst_z, static_cast<double>(mz.count()) / mz.size());
    }
  }
  EXPECT_LE(worst_g, 0.005);
  EXPECT_LE(worst_z, 0.005);
}

TEST(DetectorTest, WorkRatioBetweenConfigurations) {
  tt::GfmDetector big(640, 360, 3);
  tt::GfmDetector small(320, 180, 1);
  big.detect(tt::Frame(640, 360, 3));
  small.detect(tt::Frame(320, 180, 1));
  EXPECT_EQ(big.work().pixels, 4 * small.work().pixels);
  EXPECT_EQ(big.work().feature_scalars, 12 * small.work().feature_scalars);
}

TEST(MorphologyTest, OpeningRemovesSingleton) {
  tt::ForegroundMask m(9, 9);
  m.at(4, 4) = 1;
  EXPECT_EQ(tt::morphology_enhance(m).count(), 0u);
}

TEST(MorphologyTest, ClosingFillsHole) {
  tt::ForegroundMask m(20, 20);
  for (int y = 5; y < 15; ++y) {
    for (int x = 5; x < 15; ++x) m.at(x, y) = 1;
  }
  m.at(9, 9) = 0;
  const auto out = tt::morphology_enhance(m);
  EXPECT_EQ(out.at(9, 9), 1);
  EXPECT_EQ(out.count(), 100u);
}

TEST(MorphologyTest, EmptyStaysEmptyAndBordersBehave) {
  EXPECT_EQ(tt::morphology_enhance(tt::ForegroundMask(7, 5)).count(), 0u);
  tt::ForegroundMask full(6, 4);
  for (auto& b : full.bits()) b = 1;
  EXPECT_EQ(tt::erode3x3(full).count(), full.size());
  EXPECT_EQ(tt::morphology_enhance(full).count(), full.size());
}

TEST(MorphologyTest, MatchesNeighbourhoodDefinition) {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 23), h = 1 + static_cast<int>(rng() % 17);
    tt::ForegroundMask m(w, h);
    const unsigned density = 1 + rng() % 9;
    for (auto& b : m.bits()) b = rng() % 10 < density ? 1 : 0;
    for (bool erode : {true, false}) {
      const auto got = erode ? tt::erode3x3(m) : tt::dilate3x3(m);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          bool all = true, any = false;
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const int xx = x + dx, yy = y + dy;
              const bool inside = xx >= 0 && yy >= 0 && xx < w && yy < h;
              all = all && (!inside || m.at(xx, yy));
              any = any || (inside && m.at(xx, yy));
            }
          }
          ASSERT_EQ(got.at(x, y), erode ? all : any) << trial << ' ' << x << ',' << y;
        }
      }
    }
  }
}
