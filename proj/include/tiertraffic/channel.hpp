#pragma once

#include <filesystem>
#include <istream>
#include <limits>
#include <ostream>
#include <vector>

#include "tiertraffic/frame.hpp"

namespace tiertraffic {

inline constexpr double kUnlimitedRate = std::numeric_limits<double>::infinity();

struct TraceSegment {
  double start = 0.0;  // s
  double rate = 0.0;   // bytes/s, may be kUnlimitedRate
};

/// Piecewise-constant available rate over [0, duration).
class LinkTrace {
 public:
  LinkTrace() = default;
  /// Segments must start at 0, strictly increase and lie before `duration`;
  /// rates must be nonnegative. Throws std::invalid_argument otherwise.
  LinkTrace(std::vector<TraceSegment> segments, double duration);

  static LinkTrace constant(double rate, double duration);
  /// `good_rate` outside [limit_start, limit_end), `limit_rate` inside.
  static LinkTrace limited_window(double good_rate, double limit_rate, double limit_start, double limit_end,
                                  double duration);

  const std::vector<TraceSegment>& segments() const { return segments_; }
  double duration() const { return duration_; }
  double rate_at(double t) const;
  /// Integral of the rate over [t0, t1]; infinite if an unlimited segment is crossed.
  double bytes_between(double t0, double t1) const;
  double mean_rate(double t0, double t1) const;
  /// Segment start times after 0.
  std::vector<double> breakpoints() const;

 private:
  std::vector<TraceSegment> segments_;
  double duration_ = 0.0;
};

/// CSV with header t_start_s,rate_bytes_per_s; "inf" marks an unlimited segment.
LinkTrace read_trace_csv(std::istream& in, double duration);
LinkTrace load_trace_csv(const std::filesystem::path& path, double duration);
void write_trace_csv(std::ostream& out, const LinkTrace& trace);

/// alpha = min(c, c_t) / c_t. Throws std::invalid_argument unless c_t in (0, 1].
double penalty_factor(double c, double c_t);

/// clamp(mean rate over [t - window, t] / reference_rate, 0, 1), the window
/// truncated at 0. At t = 0 the instantaneous rate is used.
double measure_condition(const LinkTrace& trace, double t, double window, double reference_rate);

struct ChannelParams {
  double frame_bytes = 0.0;     // per frame, > 0
  double reference_rate = 0.0;  // bytes/s that maps to c = 1
  double c_t = 1.0;             // condition below which transferred quality is penalized

  /// width * height * channels bytes per frame, reference = frame_bytes * fps.
  static ChannelParams uncompressed(int width, int height, int channels, double fps);
  void validate() const;
};

/// Which frames survive the link. Frame i is delivered iff the carried-over
/// bytes plus what the link carries during its slot [i / fps, (i + 1) / fps)
/// cover a full frame. What is left carries to the next slot, capped just
/// below one frame; the carry starts at that cap. The long-run delivered
/// fraction therefore equals the offered rate over the required rate.
struct DeliverySchedule {
  std::vector<std::uint8_t> delivered;  // per source frame
  double mean_condition = 1.0;          // c over the whole stream
  double q_e = 1.0;
  double q_c = 1.0;                     // penalty_factor(mean_condition, c_t) * q_e

  std::size_t delivered_count() const;
  double delivered_fraction() const;
};

DeliverySchedule transmit_schedule(int frame_count, double fps, const LinkTrace& trace, const ChannelParams& params);

struct DegradedStream {
  std::vector<Frame> frames;  // delivered, original order, indices and timestamps
  DeliverySchedule schedule;
};

/// Applies transmit_schedule to an in-memory stream.
DegradedStream transmit(const std::vector<Frame>& source, double fps, const LinkTrace& trace,
                        const ChannelParams& params);

}  // namespace tiertraffic
