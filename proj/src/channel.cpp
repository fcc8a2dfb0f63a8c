#include "tiertraffic/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace tiertraffic {
namespace {

// Slack on the delivery test so accumulated rounding cannot drop a frame
// that the exact arithmetic would deliver.
constexpr double kByteSlack = 1e-9;
// The bucket never banks a whole frame, so a frame needs bytes from its own slot.
constexpr double kCarryFraction = 1.0 - 1e-6;

}  // namespace

LinkTrace::LinkTrace(std::vector<TraceSegment> segments, double duration)
    : segments_(std::move(segments)), duration_(duration) {
  if (!(duration_ > 0.0)) throw std::invalid_argument("trace duration must be positive");
  if (segments_.empty() || segments_.front().start != 0.0) throw std::invalid_argument("trace must start at t = 0");
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    if (!(segments_[k].rate >= 0.0)) throw std::invalid_argument("trace rates must be nonnegative");
    if (k > 0 && !(segments_[k].start > segments_[k - 1].start)) {
      throw std::invalid_argument("trace segments must start in increasing order");
    }
    if (!(segments_[k].start < duration_)) throw std::invalid_argument("trace segment starts after the end");
  }
}

LinkTrace LinkTrace::constant(double rate, double duration) { return LinkTrace({{0.0, rate}}, duration); }

LinkTrace LinkTrace::limited_window(double good_rate, double limit_rate, double limit_start, double limit_end,
                                    double duration) {
  if (!(limit_start < limit_end)) throw std::invalid_argument("limit window must be nonempty");
  std::vector<TraceSegment> segs;
  if (limit_start > 0.0) segs.push_back({0.0, good_rate});
  segs.push_back({std::max(0.0, limit_start), limit_rate});
  if (limit_end < duration) segs.push_back({limit_end, good_rate});
  return LinkTrace(std::move(segs), duration);
}

double LinkTrace::rate_at(double t) const {
  double r = segments_.front().rate;
  for (const auto& s : segments_) {
    if (s.start <= t) r = s.rate;
  }
  return r;
}

double LinkTrace::bytes_between(double t0, double t1) const {
  if (t1 <= t0) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const double a = std::max(t0, segments_[k].start);
    const double b = std::min(t1, k + 1 < segments_.size() ? segments_[k + 1].start : std::max(t1, duration_));
    if (b > a) total += segments_[k].rate * (b - a);
  }
  return total;
}

double LinkTrace::mean_rate(double t0, double t1) const {
  if (t1 <= t0) return rate_at(t0);
  return bytes_between(t0, t1) / (t1 - t0);
}

std::vector<double> LinkTrace::breakpoints() const {
  std::vector<double> out;
  for (std::size_t k = 1; k < segments_.size(); ++k) out.push_back(segments_[k].start);
  return out;
}

LinkTrace read_trace_csv(std::istream& in, double duration) {
  std::string line;
  std::vector<TraceSegment> segs;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.find("t_start") != std::string::npos) continue;
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b)) {
      throw std::invalid_argument("trace line " + std::to_string(lineno) + ": expected two fields");
    }
    try {
      segs.push_back({std::stod(a), std::stod(b)});
    } catch (const std::exception&) {
      throw std::invalid_argument("trace line " + std::to_string(lineno) + ": not a number");
    }
  }
  return LinkTrace(std::move(segs), duration);
}

LinkTrace load_trace_csv(const std::filesystem::path& path, double duration) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open trace file: " + path.string());
  return read_trace_csv(in, duration);
}

void write_trace_csv(std::ostream& out, const LinkTrace& trace) {
  out << "t_start_s,rate_bytes_per_s\n";
  for (const auto& s : trace.segments()) {
    out << std::setprecision(12) << s.start << ',';
    if (std::isinf(s.rate)) {
      out << "inf\n";
    } else {
      out << s.rate << '\n';
    }
  }
}

double penalty_factor(double c, double c_t) {
  if (!(c_t > 0.0 && c_t <= 1.0)) throw std::invalid_argument("c_t must be in (0,1]");
  return std::min(c, c_t) / c_t;
}

double measure_condition(const LinkTrace& trace, double t, double window, double reference_rate) {
  if (!(window > 0.0)) throw std::invalid_argument("measurement window must be positive");
  if (!(reference_rate > 0.0)) throw std::invalid_argument("reference rate must be positive");
  const double t0 = std::max(0.0, t - window);
  const double rate = t > t0 ? trace.mean_rate(t0, t) : trace.rate_at(t);
  return std::clamp(rate / reference_rate, 0.0, 1.0);
}

ChannelParams ChannelParams::uncompressed(int width, int height, int channels, double fps) {
  ChannelParams p;
  p.frame_bytes = static_cast<double>(width) * height * channels;
  p.reference_rate = p.frame_bytes * fps;
  return p;
}

void ChannelParams::validate() const {
  if (!(frame_bytes > 0.0)) throw std::invalid_argument("frame size must be positive");
  if (!(reference_rate > 0.0)) throw std::invalid_argument("reference rate must be positive");
  if (!(c_t > 0.0 && c_t <= 1.0)) throw std::invalid_argument("c_t must be in (0,1]");
}

std::size_t DeliverySchedule::delivered_count() const {
  return static_cast<std::size_t>(std::count(delivered.begin(), delivered.end(), 1));
}

double DeliverySchedule::delivered_fraction() const {
  return delivered.empty() ? 1.0 : static_cast<double>(delivered_count()) / delivered.size();
}

DeliverySchedule transmit_schedule(int frame_count, double fps, const LinkTrace& trace, const ChannelParams& params) {
  params.validate();
  if (!(fps > 0.0)) throw std::invalid_argument("fps must be positive");
  const double span = frame_count / fps;
  if (trace.duration() + 1e-9 < span) throw std::invalid_argument("trace shorter than the stream");

  DeliverySchedule out;
  out.delivered.assign(static_cast<std::size_t>(std::max(frame_count, 0)), 0);
  const double cap = params.frame_bytes * kCarryFraction;
  double carry = cap;
  for (int i = 0; i < frame_count; ++i) {
    double tokens = carry + trace.bytes_between(i / fps, (i + 1) / fps);
    if (tokens >= params.frame_bytes * (1.0 - kByteSlack)) {
      out.delivered[i] = 1;
      tokens = std::max(0.0, tokens - params.frame_bytes);
    }
    carry = std::min(cap, tokens);
  }
  out.mean_condition = span > 0.0 ? std::clamp(trace.mean_rate(0.0, span) / params.reference_rate, 0.0, 1.0) : 1.0;
  out.q_c = penalty_factor(out.mean_condition, params.c_t) * out.q_e;
  return out;
}

DegradedStream transmit(const std::vector<Frame>& source, double fps, const LinkTrace& trace,
                        const ChannelParams& params) {
  DegradedStream out;
  out.schedule = transmit_schedule(static_cast<int>(source.size()), fps, trace, params);
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (out.schedule.delivered[i]) out.frames.push_back(source[i]);
  }
  return out;
}

}  // namespace tiertraffic
