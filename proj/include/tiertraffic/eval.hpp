#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tiertraffic/channel.hpp"
#include "tiertraffic/scene.hpp"
#include "tiertraffic/tier.hpp"

namespace tiertraffic {

/// Inclusive frame range of a maximal run of set flags.
struct Event {
  int first = 0;
  int last = 0;
};

std::vector<Event> find_events(const std::vector<std::uint8_t>& flags);

struct EventCounts {
  int truth = 0;
  int missed = 0;    // truth events overlapped by no detected event
  int spurious = 0;  // detected events overlapping no truth event
};

/// Throws std::invalid_argument when the series differ in length.
EventCounts count_events(const std::vector<std::uint8_t>& detected, const std::vector<std::uint8_t>& truth);

/// (missed + spurious) / truth events; empty when there are no truth events.
std::optional<double> congestion_error(const std::vector<std::uint8_t>& detected,
                                       const std::vector<std::uint8_t>& truth);

/// A scripted vehicle's speed and the estimate matched to it, if any.
struct SpeedPair {
  double truth = 0.0;  // mph
  std::optional<double> measured;
};

/// Mean of |truth - measured| / truth, an unmatched vehicle counting 1.
/// Zero for an empty input. Throws when a truth speed is not positive.
double speed_error(const std::vector<SpeedPair>& pairs);
/// sqrt(mean (truth - measured)^2), an unmatched vehicle contributing truth^2.
double rms_error(const std::vector<SpeedPair>& pairs);

struct MatchedVehicle {
  int vehicle_id = 0;
  int window_first = 0;  // truth crossing frames
  int window_last = 0;
  SpeedPair pair;
};

/// Greedy closest-first assignment of reports to scripted vehicles that cross
/// both referential rows, by the distance between the report's entry point and
/// the vehicle's centroid at the report's first frame. Pairs farther apart
/// than `max_distance` (source px) are not matched. One row per scripted
/// vehicle with a truth speed, in vehicle order.
std::vector<MatchedVehicle> match_reports(const std::vector<TaggedReport>& reports, const GroundTruth& truth,
                                          double max_distance = 12.0);

struct ErrorReport {
  std::optional<double> congestion_error;
  double speed_error = 0.0;
  double rms_error = 0.0;
  double mean_speed = 0.0;  // mph over matched estimates, 0 when none
  EventCounts events;
  int vehicles = 0;
  int matched = 0;
};

/// Pools event counts and speed pairs across runs or windows.
class ErrorAccumulator {
 public:
  void add_events(const EventCounts& c);
  void add_pairs(const std::vector<SpeedPair>& pairs);
  void merge(const ErrorAccumulator& other);
  ErrorReport report() const;

 private:
  EventCounts events_;
  std::vector<SpeedPair> pairs_;
};

/// Errors restricted to source frames [first, last]. Congestion events are
/// matched over the whole run and count when they start inside the range;
/// vehicles count when their truth window starts inside it.
ErrorReport evaluate_window(const std::vector<std::uint8_t>& detected, const std::vector<MatchedVehicle>& matches,
                            const GroundTruth& truth, int first, int last, ErrorAccumulator* pool = nullptr);

ErrorReport evaluate(const DetectionSeries& series, const GroundTruth& truth, double max_distance = 12.0);

/// Per-frame flag: the link offers less than the reference rate at the frame's start.
std::vector<std::uint8_t> bad_frames(const LinkTrace& trace, int frame_count, double fps, double reference_rate);

struct WindowChoice {
  double phi = 0.0;
  bool reachable = false;
  int length = 0;
  std::vector<int> firsts;  // start frames of every window tied at the closest bad fraction
  double bad_fraction = 0.0;  // mean over the chosen windows
};

/// For each target fraction, all windows of `length` frames whose bad
/// fraction is closest to it. A target is unreachable when the closest
/// windows miss it by more than `tolerance`.
std::vector<WindowChoice> choose_windows(const std::vector<std::uint8_t>& bad, int length,
                                         const std::vector<double>& phis, double tolerance = 0.05);

/// Errors pooled over the chosen windows: event counts and speed pairs of
/// every window are summed before the ratios are taken.
ErrorReport evaluate_windows(const std::vector<std::uint8_t>& detected, const std::vector<MatchedVehicle>& matches,
                             const GroundTruth& truth, const WindowChoice& choice, ErrorAccumulator* pool = nullptr);

/// Two-level one-way ANOVA.
struct AnovaResult {
  double coefficient = 0.0;  // mean(level 1) - mean(level 0)
  double mean0 = 0.0;
  double mean1 = 0.0;
  int n0 = 0;
  int n1 = 0;
  double f = 0.0;
  double df_between = 1.0;
  double df_within = 0.0;
  double p_value = 0.0;  // NaN when degenerate with equal means
  bool degenerate = false;  // zero within-group variance
};

/// Throws std::domain_error when a level has fewer than two samples or the
/// factor is not 0/1.
AnovaResult one_way_anova(const std::vector<int>& factor, const std::vector<double>& values);

/// Regularized incomplete beta I_x(a, b) by numerical quadrature.
double incomplete_beta(double x, double a, double b);
/// P(F > f) for F ~ F(d1, d2).
double f_survival(double f, double d1, double d2);

}  // namespace tiertraffic
