#include <gtest/gtest.h>

#include "tiertraffic/scenario.hpp"

namespace tt = tiertraffic;

TEST(ScenarioTest, DeterministicInSeed) {
  tt::DeskScenarioParams p;
  p.duration = 10.0;
  p.events = {{2.0, 6.0, 0, 4}};
  const auto a = tt::build_desk_scenario(p);
  const auto b = tt::build_desk_scenario(p);
  ASSERT_EQ(a.script.vehicles.size(), b.script.vehicles.size());
  for (std::size_t i = 0; i < a.script.vehicles.size(); ++i) {
    EXPECT_EQ(a.script.vehicles[i].spawn_time, b.script.vehicles[i].spawn_time);
    EXPECT_EQ(a.script.vehicles[i].speed_profile.front().speed, b.script.vehicles[i].speed_profile.front().speed);
  }
  tt::SceneRenderer ra(a.script, a.spec);
  tt::SceneRenderer rb(b.script, b.spec);
  EXPECT_EQ(ra.render(40), rb.render(40));
  p.seed = 2;
  const auto c = tt::build_desk_scenario(p);
  bool differs = c.script.vehicles.size() != a.script.vehicles.size();
  for (std::size_t i = 0; !differs && i < a.script.vehicles.size(); ++i) {
    differs = a.script.vehicles[i].spawn_time != c.script.vehicles[i].spawn_time;
  }
  EXPECT_TRUE(differs);
}

TEST(ScenarioTest, StopEventProducesCongestionTruth) {
  tt::DeskScenarioParams p;
  p.duration = 30.0;
  p.events = {{3.0, 13.0, 0, 4}};
  p.first_free_lane = 4;
  p.lanes = 4;
  const auto s = tt::build_desk_scenario(p);
  EXPECT_EQ(s.script.vehicles.size(), 4u);
  tt::SceneRenderer r(s.script, s.spec);
  const auto truth = r.ground_truth();
  int first = -1;
  int last = -1;
  for (int i = 0; i < truth.frame_count(); ++i) {
    if (!truth.congestion[i]) continue;
    if (first < 0) first = i;
    last = i;
  }
  EXPECT_NEAR(first, 13.0 * p.fps, 2);
  EXPECT_NEAR(last, 16.0 * p.fps, 2);
}

TEST(ScenarioTest, GeometryMatchesParams) {
  tt::DeskScenarioParams p;
  const auto s = tt::build_desk_scenario(p);
  EXPECT_EQ(s.geometry.width, 320);
  EXPECT_EQ(s.geometry.height, 180);
  EXPECT_EQ(s.geometry.calibration.line_a, p.line_a);
  EXPECT_EQ(s.geometry.calibration.meters_per_pixel, p.meters_per_pixel);
  EXPECT_TRUE(s.geometry.homography.is_identity());
  EXPECT_NO_THROW(s.geometry.validate());
  EXPECT_EQ(s.spec.frame_count(), 1800);
}

TEST(ScenarioTest, Validation) {
  tt::DeskScenarioParams p;
  p.events = {{0.0, 13.0, 6, 4}};
  EXPECT_THROW(tt::build_desk_scenario(p), std::invalid_argument);
  p.events = {{110.0, 13.0, 0, 4}};
  EXPECT_THROW(tt::build_desk_scenario(p), std::invalid_argument);
  p.events.clear();
  p.line_b = p.line_a;
  EXPECT_THROW(tt::build_desk_scenario(p), std::invalid_argument);
  p = {};
  p.max_speed = 1.0;
  EXPECT_THROW(tt::build_desk_scenario(p), std::invalid_argument);
}

TEST(ScenarioTest, ThirdsTrace) {
  const auto t = tt::thirds_trace(120.0, 1000.0, 0.3);
  EXPECT_EQ(t.rate_at(10.0), tt::kUnlimitedRate);
  EXPECT_DOUBLE_EQ(t.rate_at(50.0), 300.0);
  EXPECT_EQ(t.rate_at(80.0), tt::kUnlimitedRate);
  EXPECT_EQ(t.breakpoints(), (std::vector<double>{40.0, 80.0}));
}
