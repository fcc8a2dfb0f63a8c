#include "tiertraffic/speed.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace tiertraffic {
namespace {

int find_root(std::vector<int>& parent, int a) {
  while (parent[a] != a) {
    parent[a] = parent[parent[a]];
    a = parent[a];
  }
  return a;
}

void unite(std::vector<int>& parent, int a, int b) {
  a = find_root(parent, a);
  b = find_root(parent, b);
  if (a == b) return;
  if (a < b) std::swap(a, b);
  parent[a] = b;  // smaller provisional id wins, preserving discovery order
}

}  // namespace

std::vector<int> label_image(const ForegroundMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> labels(static_cast<std::size_t>(w) * h, 0);
  std::vector<int> parent{0};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      int current = 0;
      // Already-visited 8-neighbours: W, NW, N, NE.
      const int nbr[4][2] = {{-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
      for (const auto& d : nbr) {
        const int xx = x + d[0];
        const int yy = y + d[1];
        if (xx < 0 || yy < 0 || xx >= w) continue;
        const int l = labels[static_cast<std::size_t>(yy) * w + xx];
        if (l == 0) continue;
        if (current == 0) {
          current = l;
        } else {
          unite(parent, current, l);
        }
      }
      if (current == 0) {
        current = static_cast<int>(parent.size());
        parent.push_back(current);
      }
      labels[static_cast<std::size_t>(y) * w + x] = current;
    }
  }
  // Final ids follow the row-major position of each component's first pixel.
  std::vector<int> final_id(parent.size(), 0);
  int next = 0;
  for (auto& l : labels) {
    if (l == 0) continue;
    const int root = find_root(parent, l);
    if (final_id[root] == 0) final_id[root] = ++next;
    l = final_id[root];
  }
  return labels;
}

std::vector<Blob> label_components(const ForegroundMask& mask, int min_area) {
  const auto labels = label_image(mask);
  const int n = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
  std::vector<Blob> blobs(n);
  std::vector<double> sx(n, 0.0), sy(n, 0.0);
  for (int k = 0; k < n; ++k) {
    blobs[k].label = k + 1;
    blobs[k].frame_index = mask.frame_index();
    blobs[k].x0 = mask.width();
    blobs[k].y0 = mask.height();
    blobs[k].x1 = -1;
    blobs[k].y1 = -1;
  }
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const int l = labels[static_cast<std::size_t>(y) * mask.width() + x];
      if (l == 0) continue;
      Blob& b = blobs[l - 1];
      ++b.area;
      sx[l - 1] += x;
      sy[l - 1] += y;
      b.x0 = std::min(b.x0, x);
      b.y0 = std::min(b.y0, y);
      b.x1 = std::max(b.x1, x);
      b.y1 = std::max(b.y1, y);
    }
  }
  std::vector<Blob> out;
  for (int k = 0; k < n; ++k) {
    if (blobs[k].area < min_area) continue;
    blobs[k].centroid = {sx[k] / blobs[k].area, sy[k] / blobs[k].area};
    out.push_back(blobs[k]);
  }
  return out;
}

void TrackerParams::validate() const {
  if (!(max_link_distance > 0.0)) throw std::invalid_argument("max link distance must be positive");
  if (max_gap < 0) throw std::invalid_argument("max gap must be nonnegative");
}

TrajectoryLinker::TrajectoryLinker(TrackerParams params) : params_(params) { params_.validate(); }

void TrajectoryLinker::step(int frame_index, const std::vector<Blob>& blobs) {
  if (last_frame_ && frame_index <= *last_frame_) {
    throw std::invalid_argument("frames must arrive in strictly increasing order");
  }
  last_frame_ = frame_index;

  struct Pair {
    double dist;
    std::size_t traj;
    std::size_t blob;
  };
  std::vector<Pair> pairs;
  for (std::size_t t = 0; t < active_.size(); ++t) {
    const Point2 last = active_[t].observations.back().centroid;
    for (std::size_t b = 0; b < blobs.size(); ++b) {
      const double d = std::hypot(blobs[b].centroid.x - last.x, blobs[b].centroid.y - last.y);
      if (d <= params_.max_link_distance) pairs.push_back({d, t, b});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.dist, a.traj, a.blob) < std::tie(b.dist, b.traj, b.blob);
  });
  std::vector<char> traj_used(active_.size(), 0), blob_used(blobs.size(), 0);
  for (const auto& p : pairs) {
    if (traj_used[p.traj] || blob_used[p.blob]) continue;
    traj_used[p.traj] = blob_used[p.blob] = 1;
    active_[p.traj].observations.push_back({frame_index, blobs[p.blob].centroid});
    active_[p.traj].missed = 0;
  }

  std::vector<Trajectory> still;
  for (std::size_t t = 0; t < active_.size(); ++t) {
    Trajectory& tr = active_[t];
    if (!traj_used[t] && ++tr.missed > params_.max_gap) {
      tr.state = TrajectoryState::kCompleted;
      completed_.push_back(std::move(tr));
    } else {
      still.push_back(std::move(tr));
    }
  }
  active_ = std::move(still);

  for (std::size_t b = 0; b < blobs.size(); ++b) {
    if (blob_used[b]) continue;
    Trajectory tr;
    tr.id = next_id_++;
    tr.observations.push_back({frame_index, blobs[b].centroid});
    active_.push_back(std::move(tr));
  }
}

void TrajectoryLinker::finish() {
  for (auto& tr : active_) {
    tr.state = TrajectoryState::kCompleted;
    completed_.push_back(std::move(tr));
  }
  active_.clear();
}

std::vector<Trajectory> TrajectoryLinker::take_completed() {
  std::vector<Trajectory> out = std::move(completed_);
  completed_.clear();
  return out;
}

std::optional<std::size_t> crossing_index(const std::vector<Observation>& obs, double line) {
  for (std::size_t k = 1; k < obs.size(); ++k) {
    const double a = obs[k - 1].centroid.y;
    const double b = obs[k].centroid.y;
    if ((a < line && line <= b) || (a > line && line >= b)) return k;
  }
  return std::nullopt;
}

std::optional<SpeedReport> estimate_speed(const Trajectory& traj, const Calibration& calib) {
  const auto& obs = traj.observations;
  const auto ka = crossing_index(obs, calib.line_a);
  const auto kb = crossing_index(obs, calib.line_b);
  if (!ka || !kb || *ka == *kb) return std::nullopt;
  const std::size_t first = std::min(*ka, *kb);
  const std::size_t last = std::max(*ka, *kb);

  SpeedReport r;
  r.trajectory_id = traj.id;
  r.f = static_cast<int>(last - first);
  r.first_frame = obs[first].frame;
  r.last_frame = obs[last].frame;
  r.entry = obs[first].centroid;
  double sum = 0.0;
  for (std::size_t k = first + 1; k <= last; ++k) {
    const double d = std::hypot(obs[k].centroid.x - obs[k - 1].centroid.x, obs[k].centroid.y - obs[k - 1].centroid.y);
    r.displacements.push_back(d);
    sum += d;
  }
  r.mean_mph = calib.unit_factor * calib.meters_per_pixel * (sum / calib.frame_interval) / r.f;
  return r;
}

SpeedDetector::SpeedDetector(Calibration calib, SpeedParams params)
    : calib_(calib), params_(params), linker_(params.tracker) {
  calib_.validate();
  if (params_.min_blob_area < 1) throw std::invalid_argument("min blob area must be >= 1");
}

void SpeedDetector::collect() {
  for (const auto& tr : linker_.take_completed()) {
    if (auto r = estimate_speed(tr, calib_)) reports_.push_back(std::move(*r));
  }
}

void SpeedDetector::push(const ForegroundMask& mask) {
  linker_.step(mask.frame_index(), label_components(mask, params_.min_blob_area));
  collect();
}

const std::vector<SpeedReport>& SpeedDetector::finish() {
  linker_.finish();
  collect();
  return reports_;
}

std::vector<SpeedReport> detect_speeds(const std::vector<ForegroundMask>& masks, const Calibration& calib,
                                       SpeedParams params) {
  SpeedDetector det(calib, params);
  for (const auto& m : masks) det.push(m);
  return det.finish();
}

void write_speed_csv(std::ostream& out, const std::vector<SpeedReport>& reports) {
  out << "trajectory_id,first_frame,last_frame,f,mean_mph\n";
  for (const auto& r : reports) {
    out << r.trajectory_id << ',' << r.first_frame << ',' << r.last_frame << ',' << r.f << ','
        << std::setprecision(10) << r.mean_mph << '\n';
  }
}

}  // namespace tiertraffic
