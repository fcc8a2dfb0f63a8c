#include "tiertraffic/scene.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "tiertraffic/rng.hpp"

namespace tiertraffic {
namespace {

constexpr double kEdgeTolerance = 1e-9;

// Pixel span [first, last] covered by an interval of half-width `half` around `center`.
std::pair<int, int> covered_span(double center, double half) {
  return {static_cast<int>(std::ceil(center - half)), static_cast<int>(std::ceil(center + half)) - 1};
}

struct RectExtent {
  double half_w;
  double half_h;
};

RectExtent extent_for(const VehicleScript& v, double mpp, bool vertical) {
  const double w = v.width / mpp / 2.0;
  const double l = v.length / mpp / 2.0;
  return vertical ? RectExtent{w, l} : RectExtent{l, w};
}

bool leg_is_vertical(Point2 a, Point2 b) { return std::abs(b.y - a.y) >= std::abs(b.x - a.x); }


}  // namespace

void SceneScript::validate(const VideoSpec& spec) const {
  spec.validate();
  if (!(meters_per_pixel > 0.0)) throw std::invalid_argument("meters_per_pixel must be positive");
  if (noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be nonnegative");
  for (const auto& v : vehicles) {
    const std::string who = "vehicle " + std::to_string(v.id);
    if (v.path.size() < 2) throw std::invalid_argument(who + ": path needs at least 2 points");
    if (v.speed_profile.empty() || v.speed_profile.front().start != 0.0) {
      throw std::invalid_argument(who + ": speed profile must start at t=0");
    }
    for (std::size_t k = 0; k < v.speed_profile.size(); ++k) {
      if (v.speed_profile[k].speed < 0.0) throw std::invalid_argument(who + ": negative speed");
      if (k > 0 && !(v.speed_profile[k].start > v.speed_profile[k - 1].start)) {
        throw std::invalid_argument(who + ": speed segments must be increasing in time");
      }
    }
    if (!(v.width > 0.0) || !(v.length > 0.0)) throw std::invalid_argument(who + ": size must be positive");
    for (std::size_t k = 0; k + 1 < v.path.size(); ++k) {
      const bool vertical = leg_is_vertical(v.path[k], v.path[k + 1]);
      const auto ext = extent_for(v, meters_per_pixel, vertical);
      for (const Point2& m : {v.path[k], v.path[k + 1]}) {
        const double cx = m.x / meters_per_pixel;
        const double cy = m.y / meters_per_pixel;
        if (cx - ext.half_w < -kEdgeTolerance || cy - ext.half_h < -kEdgeTolerance ||
            cx + ext.half_w > spec.width + kEdgeTolerance ||
            cy + ext.half_h > spec.height + kEdgeTolerance) {
          throw std::invalid_argument(who + ": leaves the frame along its path");
        }
      }
    }
  }
}

const VehicleTruth* GroundTruth::find(int vehicle_id) const {
  for (const auto& v : vehicles) {
    if (v.vehicle_id == vehicle_id) return &v;
  }
  return nullptr;
}

VehicleMotion::VehicleMotion(const VehicleScript& script, double meters_per_pixel)
    : script_(script), mpp_(meters_per_pixel) {
  cumulative_.push_back(0.0);
  for (std::size_t k = 1; k < script_.path.size(); ++k) {
    const double dx = script_.path[k].x - script_.path[k - 1].x;
    const double dy = script_.path[k].y - script_.path[k - 1].y;
    path_length_ += std::hypot(dx, dy);
    cumulative_.push_back(path_length_);
  }
}

double VehicleMotion::distance_at(double t) const {
  const double tau = t - script_.spawn_time;
  if (tau <= 0.0) return 0.0;
  double s = 0.0;
  const auto& prof = script_.speed_profile;
  for (std::size_t k = 0; k < prof.size(); ++k) {
    const double end = k + 1 < prof.size() ? prof[k + 1].start : tau;
    const double until = std::min(end, tau);
    if (until > prof[k].start) s += prof[k].speed * (until - prof[k].start);
    if (end >= tau) break;
  }
  return s;
}

double VehicleMotion::speed_at(double t) const {
  const double tau = t - script_.spawn_time;
  double v = script_.speed_profile.front().speed;
  for (const auto& seg : script_.speed_profile) {
    if (seg.start <= tau) v = seg.speed;
  }
  return v;
}

bool VehicleMotion::visible_at(double t) const {
  return t >= script_.spawn_time && distance_at(t) < path_length_;
}

Point2 VehicleMotion::point_at_distance(double s, bool* vertical) const {
  const auto& p = script_.path;
  std::size_t k = 1;
  while (k + 1 < p.size() && cumulative_[k] <= s) ++k;
  const double leg = cumulative_[k] - cumulative_[k - 1];
  const double f = leg > 0.0 ? std::clamp((s - cumulative_[k - 1]) / leg, 0.0, 1.0) : 0.0;
  if (vertical) *vertical = leg_is_vertical(p[k - 1], p[k]);
  return {(p[k - 1].x + f * (p[k].x - p[k - 1].x)) / mpp_, (p[k - 1].y + f * (p[k].y - p[k - 1].y)) / mpp_};
}

Point2 VehicleMotion::centroid_at(double t, bool* vertical) const {
  return point_at_distance(distance_at(t), vertical);
}

SceneRenderer::SceneRenderer(SceneScript script, VideoSpec spec)
    : script_(std::move(script)), spec_(spec) {
  script_.validate(spec_);
  for (const auto& v : script_.vehicles) motions_.emplace_back(v, script_.meters_per_pixel);

  background_ = Frame(spec_.width, spec_.height, 3);
  std::vector<std::uint8_t> road(background_.pixel_count(), 0);
  if (script_.road_polygon.size() >= 3) road = rasterize_roi(Roi(script_.road_polygon), spec_.width, spec_.height);
  for (int y = 0; y < spec_.height; ++y) {
    for (int x = 0; x < spec_.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * spec_.width + x;
      const Rgb& base = road[i] ? script_.road_color : script_.ground_color;
      // Fixed surface texture, +-4 levels.
      const int texture = static_cast<int>(hash_mix(script_.seed, i) % 9) - 4;
      for (int c = 0; c < 3; ++c) background_.at(c, y, x) = saturate_u8(base[c] + texture);
    }
  }
}

Frame SceneRenderer::render(int index) const {
  Frame frame = background_;
  frame.set_index(index);
  const double t = timestamp(index);
  frame.set_timestamp(t);

  for (std::size_t k = 0; k < motions_.size(); ++k) {
    if (!motions_[k].visible_at(t)) continue;
    bool vertical = true;
    const Point2 c = motions_[k].centroid_at(t, &vertical);
    const auto ext = extent_for(script_.vehicles[k], script_.meters_per_pixel, vertical);
    auto [x0, x1] = covered_span(c.x, ext.half_w);
    auto [y0, y1] = covered_span(c.y, ext.half_h);
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, spec_.width - 1);
    y1 = std::min(y1, spec_.height - 1);
    const Rgb& color = script_.vehicles[k].color;
    for (int ch = 0; ch < 3; ++ch) {
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) frame.at(ch, y, x) = color[ch];
      }
    }
  }

  if (script_.noise_sigma > 0.0) {
    const auto& table = standard_normal_table();
    std::mt19937 rng(static_cast<std::uint32_t>(hash_mix(script_.seed ^ 0x5eed5eedULL, static_cast<std::uint64_t>(index))));
    auto data = frame.data();
    for (std::size_t i = 0; i < data.size(); i += 2) {
      const std::uint32_t r = rng();
      data[i] = saturate_u8(data[i] + script_.noise_sigma * table[r & 0xFFFF]);
      if (i + 1 < data.size()) data[i + 1] = saturate_u8(data[i + 1] + script_.noise_sigma * table[r >> 16]);
    }
  }
  return frame;
}

GroundTruth SceneRenderer::ground_truth() const {
  GroundTruth truth;
  truth.fps = spec_.fps;
  const int n = frame_count();
  truth.frames.resize(n);
  truth.congestion.assign(n, 0);

  std::optional<Roi> roi;
  if (script_.annotations.roi.size() >= 3) roi = Roi(script_.annotations.roi);

  const int min_run = static_cast<int>(std::lround(script_.annotations.congestion_min_seconds * spec_.fps));
  int run = 0;
  for (int i = 0; i < n; ++i) {
    const double t = timestamp(i);
    int stopped = 0;
    for (std::size_t k = 0; k < motions_.size(); ++k) {
      if (!motions_[k].visible_at(t)) continue;
      VehicleState s;
      s.vehicle_id = script_.vehicles[k].id;
      s.centroid = motions_[k].centroid_at(t);
      s.speed = motions_[k].speed_at(t);
      s.in_roi = roi && point_in_roi(s.centroid, *roi);
      if (s.in_roi && s.speed == 0.0) ++stopped;
      truth.frames[i].push_back(s);
    }
    run = stopped >= script_.annotations.congestion_min_vehicles ? run + 1 : 0;
    truth.congestion[i] = run > min_run ? 1 : 0;
  }

  const double lines[2] = {script_.annotations.line_a, script_.annotations.line_b};
  const bool have_lines = lines[0] != lines[1];
  for (std::size_t k = 0; k < motions_.size(); ++k) {
    VehicleTruth vt;
    vt.vehicle_id = script_.vehicles[k].id;
    if (have_lines) {
      int cross[2] = {-1, -1};
      std::optional<double> prev_y;
      for (int i = 0; i < n; ++i) {
        const double t = timestamp(i);
        if (!motions_[k].visible_at(t)) {
          prev_y.reset();
          continue;
        }
        const double y = motions_[k].centroid_at(t).y;
        if (prev_y) {
          for (int l = 0; l < 2; ++l) {
            const bool down = *prev_y < lines[l] && y >= lines[l];
            const bool up = *prev_y > lines[l] && y <= lines[l];
            if (cross[l] < 0 && (down || up)) cross[l] = i;
          }
        }
        prev_y = y;
      }
      if (cross[0] >= 0 && cross[1] >= 0 && cross[0] != cross[1]) {
        vt.window_first = std::min(cross[0], cross[1]);
        vt.window_last = std::max(cross[0], cross[1]);
        const double t0 = timestamp(vt.window_first);
        const double t1 = timestamp(vt.window_last);
        const double meters = motions_[k].distance_at(t1) - motions_[k].distance_at(t0);
        vt.speed_mph = meters / (t1 - t0) * Calibration::kMpsToMph;
      }
    }
    truth.vehicles.push_back(vt);
  }
  return truth;
}

SceneSequence generate_scene(const SceneScript& script, const VideoSpec& spec) {
  SceneRenderer renderer(script, spec);
  SceneSequence seq;
  seq.frames.reserve(renderer.frame_count());
  for (int i = 0; i < renderer.frame_count(); ++i) seq.frames.push_back(renderer.render(i));
  seq.truth = renderer.ground_truth();
  return seq;
}

}  // namespace tiertraffic
