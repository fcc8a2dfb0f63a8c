#include "tiertraffic/weather.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "tiertraffic/rng.hpp"

namespace tiertraffic {
namespace {

constexpr std::uint8_t kSpeckValue = 235;
constexpr int kStreakTarget = 200;

void box_blur(Frame& frame, int radius) {
  if (radius <= 0) return;
  const int w = frame.width();
  const int h = frame.height();
  const int span = 2 * radius + 1;
  std::vector<int> tmp(static_cast<std::size_t>(w) * h);
  for (int c = 0; c < frame.channels(); ++c) {
    auto plane = frame.plane(c);
    for (int y = 0; y < h; ++y) {
      const std::uint8_t* row = plane.data() + static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) {
        int sum = 0;
        for (int k = -radius; k <= radius; ++k) sum += row[std::clamp(x + k, 0, w - 1)];
        tmp[static_cast<std::size_t>(y) * w + x] = sum;
      }
    }
    const double norm = 1.0 / (span * span);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        int sum = 0;
        for (int k = -radius; k <= radius; ++k) sum += tmp[static_cast<std::size_t>(std::clamp(y + k, 0, h - 1)) * w + x];
        plane[static_cast<std::size_t>(y) * w + x] = saturate_u8(sum * norm);
      }
    }
  }
}

}  // namespace

std::string to_string(WeatherKind kind) {
  switch (kind) {
    case WeatherKind::kSunny: return "sunny";
    case WeatherKind::kRainy: return "rainy";
    case WeatherKind::kSnowy: return "snowy";
  }
  return "unknown";
}

WeatherKind parse_weather_kind(const std::string& name) {
  if (name == "sunny") return WeatherKind::kSunny;
  if (name == "rainy") return WeatherKind::kRainy;
  if (name == "snowy") return WeatherKind::kSnowy;
  throw std::invalid_argument("unknown weather kind: " + name);
}

WeatherModel WeatherModel::sunny(std::uint64_t seed) {
  WeatherModel m;
  m.seed = seed;
  return m;
}

WeatherModel WeatherModel::rainy(std::uint64_t seed) {
  WeatherModel m;
  m.kind = WeatherKind::kRainy;
  m.noise_density = 0.01;
  m.speck_size = 4;
  m.blur_radius = 1;
  m.illumination = 0.9;
  m.seed = seed;
  return m;
}

WeatherModel WeatherModel::snowy(std::uint64_t seed) {
  WeatherModel m;
  m.kind = WeatherKind::kSnowy;
  m.noise_density = 0.02;
  m.speck_size = 1;
  m.blur_radius = 2;
  m.illumination = 0.85;
  m.seed = seed;
  return m;
}

WeatherModel WeatherModel::preset(WeatherKind kind, std::uint64_t seed) {
  switch (kind) {
    case WeatherKind::kRainy: return rainy(seed);
    case WeatherKind::kSnowy: return snowy(seed);
    case WeatherKind::kSunny: break;
  }
  return sunny(seed);
}

void WeatherModel::validate() const {
  if (!(noise_density >= 0.0 && noise_density <= 1.0)) throw std::invalid_argument("noise density must be in [0,1]");
  if (speck_size < 1) throw std::invalid_argument("speck size must be >= 1");
  if (blur_radius < 0) throw std::invalid_argument("blur radius must be >= 0");
  if (!(illumination >= 0.0)) throw std::invalid_argument("illumination must be nonnegative");
}

Frame apply_weather(const Frame& frame, const WeatherModel& model) {
  if (model.kind == WeatherKind::kSunny) return frame;
  model.validate();

  Frame out = frame;
  if (model.illumination != 1.0) {
    for (auto& v : out.data()) {
      v = saturate_u8(v * model.illumination);
    }
  }
  box_blur(out, model.blur_radius);

  const int w = out.width();
  const int h = out.height();
  const std::size_t target = static_cast<std::size_t>(std::floor(model.noise_density * w * h));
  if (target == 0) return out;

  std::mt19937_64 rng(hash_mix(model.seed, static_cast<std::uint64_t>(frame.index())));
  std::uniform_int_distribution<int> px(0, w - 1);
  std::uniform_int_distribution<int> py(0, h - 1);
  std::vector<std::uint8_t> marked(static_cast<std::size_t>(w) * h, 0);
  std::size_t count = 0;
  const int s = model.speck_size;
  const bool streak = model.kind == WeatherKind::kRainy;

  auto overwrite = [&](int x, int y) {
    const std::size_t i = static_cast<std::size_t>(y) * w + x;
    if (marked[i] || count >= target) return;
    marked[i] = 1;
    ++count;
    for (int c = 0; c < out.channels(); ++c) {
      auto& v = out.at(c, y, x);
      v = streak ? static_cast<std::uint8_t>((v + kStreakTarget + 1) / 2) : kSpeckValue;
    }
  };

  while (count < target) {
    const int x0 = px(rng);
    const int y0 = py(rng);
    if (streak) {
      // Vertical streak of length s.
      for (int k = 0; k < s && y0 + k < h; ++k) overwrite(x0, y0 + k);
    } else {
      for (int dy = 0; dy < s && y0 + dy < h; ++dy) {
        for (int dx = 0; dx < s && x0 + dx < w; ++dx) overwrite(x0 + dx, y0 + dy);
      }
    }
  }
  return out;
}

}  // namespace tiertraffic
