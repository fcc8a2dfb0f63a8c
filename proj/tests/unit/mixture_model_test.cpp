#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <numbers>
#include <random>

#include "tiertraffic/mixture_model.hpp"

namespace tt = tiertraffic;

namespace {

tt::Frame gray(int w, int h, std::uint8_t v) {
  tt::Frame f(w, h, 1);
  for (auto& p : f.data()) p = v;
  return f;
}

double weight_sum(std::span<const tt::GaussianComponent> comps) {
  double s = 0.0;
  for (const auto& g : comps) s += g.weight;
  return s;
}

}  // namespace

TEST(PixelMixtureTest, ConstantPixelConverges) {
  tt::PixelMixtureModel m(1, 1, 1);
  for (int i = 0; i < 500; ++i) m.update(gray(1, 1, 137));
  const auto comps = m.components(0, 0);
  EXPECT_NEAR(comps[0].mean[0], 137.0, 0.5);
  EXPECT_NEAR(comps[0].weight, 1.0, 0.05);
}

TEST(PixelMixtureTest, AlternatingValuesReachEmaFixedPoint) {
  tt::MixtureParams p;
  p.learning_rate = 0.01;
  tt::PixelMixtureModel m(1, 1, 1, p);
  for (int i = 0; i < 1000; ++i) m.update(gray(1, 1, i % 2 == 0 ? 40 : 200));
  // Two-step recurrence w <- (1-r)^2 w + r has fixed point 1 / (2 - r) for the
  // value seen last, and (1 - r) / (2 - r) for the other.
  const double r = p.learning_rate;
  const auto comps = m.components(0, 0);
  ASSERT_EQ(comps.size(), 2u);
  EXPECT_EQ(comps[0].mean[0], 200.0);
  EXPECT_NEAR(comps[0].weight, 1.0 / (2.0 - r), 1e-3);
  EXPECT_NEAR(comps[1].weight, (1.0 - r) / (2.0 - r), 1e-3);
  EXPECT_NEAR(comps[0].weight, 0.5, 0.1);
  EXPECT_NEAR(comps[1].weight, 0.5, 0.1);
}

TEST(PixelMixtureTest, WeightsNormalizedAndVarianceFloorHeld) {
  tt::MixtureParams p;
  p.components = 3;
  tt::PixelMixtureModel m(6, 5, 3, p);
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> v(0, 255);
  for (int i = 0; i < 300; ++i) {
    tt::Frame f(6, 5, 3);
    for (auto& px : f.data()) px = static_cast<std::uint8_t>(i % 7 == 0 ? v(rng) : 90 + v(rng) % 3);
    m.update(f);
    for (int y = 0; y < 5; ++y) {
      for (int x = 0; x < 6; ++x) {
        const auto comps = m.components(x, y);
        ASSERT_GE(comps.size(), 1u);
        ASSERT_LE(comps.size(), 3u);
        ASSERT_NEAR(weight_sum(comps), 1.0, 1e-9);
        for (std::size_t k = 0; k < comps.size(); ++k) {
          if (k > 0) {
            ASSERT_GE(comps[k - 1].weight, comps[k].weight);
          }
          for (int c = 0; c < 3; ++c) ASSERT_GE(comps[k].variance[c], p.variance_floor);
        }
      }
    }
  }
}

TEST(PixelMixtureTest, SelectiveUpdateSkipsMaskedPixels) {
  tt::PixelMixtureModel m(2, 1, 1);
  m.update(gray(2, 1, 50));
  tt::ForegroundMask skip(2, 1);
  skip.at(1, 0) = 1;
  for (int i = 0; i < 50; ++i) m.update(gray(2, 1, 200), skip);
  EXPECT_EQ(m.components(1, 0).size(), 1u);
  EXPECT_EQ(m.components(1, 0)[0].mean[0], 50.0);
  EXPECT_EQ(m.components(0, 0).size(), 2u);
}

TEST(PixelMixtureTest, ShapeMismatchThrows) {
  tt::PixelMixtureModel m(4, 4, 3);
  EXPECT_THROW(m.update(gray(4, 4, 1)), std::invalid_argument);
  EXPECT_THROW(tt::PixelMixtureModel(4, 4, 4), std::invalid_argument);
}

TEST(BackgroundDensityTest, PeakTailAndPrior) {
  tt::PixelMixtureModel m(1, 1, 3);
  tt::Frame f(1, 1, 3);
  f.at(0, 0, 0) = 10;
  f.at(1, 0, 0) = 20;
  f.at(2, 0, 0) = 30;
  m.update(f);
  const auto& g = m.components(0, 0)[0];
  const tt::Feature mean{10, 20, 30};
  const auto at_mean = m.background_density(mean, 0, 0);
  const double var = g.variance[0];
  const double peak = std::pow(2.0 * std::numbers::pi, -1.5) / std::sqrt(var * var * var);
  EXPECT_NEAR(at_mean.density, peak, 1e-15);
  EXPECT_EQ(at_mean.prior, 1.0);
  const double sigma = std::sqrt(var);
  const auto far = m.background_density({10 + 6.5 * sigma, 20, 30}, 0, 0);
  EXPECT_LT(far.density, 1e-6 * peak);
}

TEST(GlobalForegroundTest, FirstSampleBootstraps) {
  tt::GlobalForegroundModel gfm(3);
  gfm.update({200, 30, 30});
  ASSERT_EQ(gfm.components().size(), 1u);
  EXPECT_EQ(gfm.components()[0].mean, (tt::Feature{200, 30, 30}));
  EXPECT_EQ(gfm.components()[0].weight, 1.0);
}

TEST(GlobalForegroundTest, TwoClustersMatchOfflineClustering) {
  tt::GlobalForegroundModel gfm(3);
  std::mt19937 rng(99);
  std::normal_distribution<double> noise(0.0, 3.0);
  const tt::Feature centers[2] = {{200, 40, 40}, {40, 60, 190}};
  std::vector<tt::Feature> stream;
  for (int i = 0; i < 4000; ++i) {
    const auto& c = centers[rng() % 2];
    stream.push_back({c[0] + noise(rng), c[1] + noise(rng), c[2] + noise(rng)});
  }
  for (const auto& x : stream) {
    gfm.update(x);
    ASSERT_NEAR(weight_sum(gfm.components()), 1.0, 1e-9);
  }

  // Offline reference: Lloyd's k-means with k = 2 started at the first two
  // samples that differ by more than 50 in some channel.
  tt::Feature mu[2] = {stream[0], stream[0]};
  for (const auto& x : stream) {
    if (std::abs(x[0] - mu[0][0]) > 50) {
      mu[1] = x;
      break;
    }
  }
  for (int iter = 0; iter < 20; ++iter) {
    tt::Feature sum[2] = {};
    int n[2] = {0, 0};
    for (const auto& x : stream) {
      double d[2];
      for (int k = 0; k < 2; ++k) {
        d[k] = 0;
        for (int c = 0; c < 3; ++c) d[k] += (x[c] - mu[k][c]) * (x[c] - mu[k][c]);
      }
      const int k = d[0] <= d[1] ? 0 : 1;
      ++n[k];
      for (int c = 0; c < 3; ++c) sum[k][c] += x[c];
    }
    for (int k = 0; k < 2; ++k) {
      for (int c = 0; c < 3; ++c) mu[k][c] = sum[k][c] / n[k];
    }
  }

  // Noise tails beyond the creation threshold spawn light components; the
  // two heaviest carry the clusters.
  std::vector<tt::GaussianComponent> heavy(gfm.components().begin(), gfm.components().end());
  std::sort(heavy.begin(), heavy.end(), [](const auto& a, const auto& b) { return a.weight > b.weight; });
  ASSERT_GE(heavy.size(), 2u);
  heavy.resize(2);
  EXPECT_GT(heavy[1].weight, 0.3);
  for (const auto& ref : mu) {
    bool found = false;
    for (const auto& g : heavy) {
      bool close = true;
      for (int c = 0; c < 3; ++c) close &= std::abs(g.mean[c] - ref[c]) <= 3.0;  // 1 sigma
      found |= close;
    }
    EXPECT_TRUE(found) << ref[0] << "," << ref[1] << "," << ref[2];
  }
}

TEST(GlobalForegroundTest, EvictsLightestAtCapacity) {
  tt::ForegroundParams p;
  p.components = 3;
  tt::GlobalForegroundModel gfm(1, p);
  for (int i = 0; i < 50; ++i) gfm.update({10});
  for (int i = 0; i < 20; ++i) gfm.update({100});
  gfm.update({200});
  gfm.update({250});  // evicts the 200 component, the lightest
  ASSERT_EQ(gfm.components().size(), 3u);
  std::vector<double> means;
  for (const auto& g : gfm.components()) means.push_back(g.mean[0]);
  EXPECT_NE(std::find(means.begin(), means.end(), 250.0), means.end());
  EXPECT_EQ(std::find(means.begin(), means.end(), 200.0), means.end());
  EXPECT_NEAR(weight_sum(gfm.components()), 1.0, 1e-9);
}

TEST(GlobalForegroundTest, DensityPicksMaxWeightedComponent) {
  tt::GlobalForegroundModel gfm(1);
  EXPECT_EQ(gfm.foreground_density({5}).index, -1);
  gfm.update({10});
  gfm.update({60});
  const auto m = gfm.foreground_density({58});
  EXPECT_EQ(gfm.components()[m.index].mean[0], 60.0);
  EXPECT_LE(m.density, gfm.max_peak());
}

TEST(ClassifyPixelTest, DecisionRule) {
  EXPECT_TRUE(tt::classify_pixel({0.1, 1.0}, {0.9, 1.0}));
  EXPECT_FALSE(tt::classify_pixel({0.9, 1.0}, {0.1, 1.0}));
  EXPECT_FALSE(tt::classify_pixel({0.5, 0.5}, {0.5, 0.5}));
  EXPECT_FALSE(tt::classify_pixel({0.0, 0.0}, {0.0, 1.0}));
}

TEST(AdaptiveMixtureTest, LearningRateFromAbsorptionTime) {
  tt::AdaptiveParams p;
  p.absorption_seconds = 2.0;
  p.fps = 15.0;
  EXPECT_NEAR(std::pow(1.0 - p.learning_rate(), 30.0), p.background_ratio, 1e-12);
}

TEST(AdaptiveMixtureTest, StationaryValueAbsorbedNearAbsorptionTime) {
  tt::AdaptiveParams p;
  p.absorption_seconds = 1.0;
  p.fps = 15.0;
  tt::AdaptiveMixtureModel m(1, 1, 1, p);
  for (int i = 0; i < 300; ++i) m.update(gray(1, 1, 100));
  int absorbed_at = -1;
  for (int i = 0; i < 60; ++i) {
    const auto mask = m.classify(gray(1, 1, 180));
    if (!mask.at(0, 0) && absorbed_at < 0) absorbed_at = i;
    m.update(gray(1, 1, 180));
  }
  // Background weight decays as (1 - a)^n, crossing TB after 15 frames.
  EXPECT_GE(absorbed_at, 14);
  EXPECT_LE(absorbed_at, 18);
}

TEST(AdaptiveMixtureTest, WeightsNormalizedAndBounded) {
  tt::AdaptiveMixtureModel m(3, 3, 3);
  std::mt19937 rng(5);
  for (int i = 0; i < 200; ++i) {
    tt::Frame f(3, 3, 3);
    for (auto& v : f.data()) v = static_cast<std::uint8_t>(rng() % 4 == 0 ? rng() & 0xFF : 120);
    m.update(f);
    for (int y = 0; y < 3; ++y) {
      for (int x = 0; x < 3; ++x) {
        const auto comps = m.components(x, y);
        ASSERT_GE(comps.size(), 1u);
        ASSERT_LE(comps.size(), 5u);
        ASSERT_NEAR(weight_sum(comps), 1.0, 1e-9);
        for (const auto& g : comps) {
          for (int c = 0; c < 3; ++c) {
            ASSERT_GE(g.variance[c], m.params().min_variance);
            ASSERT_LE(g.variance[c], m.params().max_variance);
          }
        }
      }
    }
  }
}
