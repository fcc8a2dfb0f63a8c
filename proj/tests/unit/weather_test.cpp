#include <gtest/gtest.h>

#include <cmath>

#include "tiertraffic/weather.hpp"

namespace tt = tiertraffic;

namespace {

tt::Frame flat_frame(int w, int h, std::uint8_t v, int index = 0) {
  tt::Frame f(w, h, 3, index, index / 15.0);
  for (auto& p : f.data()) p = v;
  return f;
}

std::size_t changed_pixels(const tt::Frame& a, const tt::Frame& b) {
  std::size_t n = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      bool diff = false;
      for (int c = 0; c < a.channels(); ++c) diff |= a.at(c, y, x) != b.at(c, y, x);
      n += diff;
    }
  }
  return n;
}

}  // namespace

TEST(WeatherTest, SunnyIsIdentity) {
  const tt::Frame f = flat_frame(32, 20, 90, 3);
  EXPECT_EQ(tt::apply_weather(f, tt::WeatherModel::sunny(7)), f);
}

TEST(WeatherTest, SpeckCountIsExactWithoutBlur) {
  for (int size : {1, 2, 3}) {
    for (double density : {0.0, 0.013, 0.05, 0.2}) {
      tt::WeatherModel m = tt::WeatherModel::snowy(11);
      m.blur_radius = 0;
      m.illumination = 1.0;
      m.speck_size = size;
      m.noise_density = density;
      const tt::Frame f = flat_frame(97, 61, 80, 4);
      const tt::Frame out = tt::apply_weather(f, m);
      EXPECT_EQ(changed_pixels(f, out), static_cast<std::size_t>(std::floor(density * 97 * 61)))
          << "size " << size << " density " << density;
    }
  }
}

TEST(WeatherTest, StreakCountIsExactWithoutBlur) {
  tt::WeatherModel m = tt::WeatherModel::rainy(3);
  m.blur_radius = 0;
  m.illumination = 1.0;
  const tt::Frame f = flat_frame(64, 48, 60, 9);
  EXPECT_EQ(changed_pixels(f, tt::apply_weather(f, m)), static_cast<std::size_t>(std::floor(m.noise_density * 64 * 48)));
}

TEST(WeatherTest, DeterministicPerFrameAndSeed) {
  const tt::WeatherModel m = tt::WeatherModel::snowy(5);
  const tt::Frame a = flat_frame(40, 30, 100, 12);
  EXPECT_EQ(tt::apply_weather(a, m), tt::apply_weather(a, m));
  const tt::Frame b = flat_frame(40, 30, 100, 13);
  auto out_a = tt::apply_weather(a, m);
  auto out_b = tt::apply_weather(b, m);
  out_b.set_index(12);
  out_b.set_timestamp(a.timestamp());
  EXPECT_NE(out_a, out_b);
  EXPECT_NE(tt::apply_weather(a, m), tt::apply_weather(a, tt::WeatherModel::snowy(6)));
}

TEST(WeatherTest, IlluminationAndBlurOnFlatFrame) {
  tt::WeatherModel m = tt::WeatherModel::snowy(1);
  m.noise_density = 0.0;
  const tt::Frame out = tt::apply_weather(flat_frame(20, 20, 100), m);
  for (auto v : out.data()) EXPECT_EQ(v, std::lround(100 * m.illumination));
}

TEST(WeatherTest, ParsesNamesAndValidates) {
  EXPECT_EQ(tt::parse_weather_kind("snowy"), tt::WeatherKind::kSnowy);
  EXPECT_EQ(tt::to_string(tt::WeatherKind::kRainy), "rainy");
  EXPECT_THROW(tt::parse_weather_kind("foggy"), std::invalid_argument);
  tt::WeatherModel m = tt::WeatherModel::rainy();
  m.noise_density = 1.5;
  EXPECT_THROW(tt::apply_weather(flat_frame(4, 4, 0), m), std::invalid_argument);
}
