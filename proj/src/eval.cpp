#include "tiertraffic/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace tiertraffic {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool overlaps(const Event& a, const Event& b) { return a.first <= b.last && b.first <= a.last; }

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Unnormalized integral of t^(a-1) (1-t)^(b-1) over [0, x]; callers keep x <= 1/2.
double beta_integral(double x, double a, double b) {
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate([&](double t) { return std::pow(t, a - 1.0) * std::pow(1.0 - t, b - 1.0); }, 0.0, x);
}

}  // namespace

std::vector<Event> find_events(const std::vector<std::uint8_t>& flags) {
  std::vector<Event> out;
  for (int i = 0; i < static_cast<int>(flags.size()); ++i) {
    if (!flags[i]) continue;
    if (!out.empty() && out.back().last == i - 1) {
      out.back().last = i;
    } else {
      out.push_back({i, i});
    }
  }
  return out;
}

EventCounts count_events(const std::vector<std::uint8_t>& detected, const std::vector<std::uint8_t>& truth) {
  if (detected.size() != truth.size()) throw std::invalid_argument("detected and truth series differ in length");
  const auto d = find_events(detected);
  const auto t = find_events(truth);
  EventCounts c;
  c.truth = static_cast<int>(t.size());
  for (const auto& te : t) {
    if (std::none_of(d.begin(), d.end(), [&](const Event& de) { return overlaps(te, de); })) ++c.missed;
  }
  for (const auto& de : d) {
    if (std::none_of(t.begin(), t.end(), [&](const Event& te) { return overlaps(te, de); })) ++c.spurious;
  }
  return c;
}

std::optional<double> congestion_error(const std::vector<std::uint8_t>& detected,
                                       const std::vector<std::uint8_t>& truth) {
  const EventCounts c = count_events(detected, truth);
  if (c.truth == 0) return std::nullopt;
  return static_cast<double>(c.missed + c.spurious) / c.truth;
}

double speed_error(const std::vector<SpeedPair>& pairs) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : pairs) {
    if (!(p.truth > 0.0)) throw std::invalid_argument("truth speed must be positive");
    sum += p.measured ? std::abs(p.truth - *p.measured) / p.truth : 1.0;
  }
  return sum / pairs.size();
}

double rms_error(const std::vector<SpeedPair>& pairs) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : pairs) {
    const double r = p.truth - p.measured.value_or(0.0);
    sum += r * r;
  }
  return std::sqrt(sum / pairs.size());
}

std::vector<MatchedVehicle> match_reports(const std::vector<TaggedReport>& reports, const GroundTruth& truth,
                                          double max_distance) {
  std::vector<MatchedVehicle> out;
  std::vector<int> row_of_vehicle;
  for (const auto& v : truth.vehicles) {
    row_of_vehicle.push_back(v.speed_mph ? static_cast<int>(out.size()) : -1);
    if (!v.speed_mph) continue;
    MatchedVehicle m;
    m.vehicle_id = v.vehicle_id;
    m.window_first = v.window_first;
    m.window_last = v.window_last;
    m.pair.truth = *v.speed_mph;
    out.push_back(m);
  }

  struct Candidate {
    double distance;
    std::size_t report;
    int row;
  };
  std::vector<Candidate> candidates;
  for (std::size_t r = 0; r < reports.size(); ++r) {
    const int frame = reports[r].report.first_frame;
    if (frame < 0 || frame >= truth.frame_count()) continue;
    for (const auto& s : truth.frames[frame]) {
      const auto it = std::find_if(truth.vehicles.begin(), truth.vehicles.end(),
                                   [&](const VehicleTruth& v) { return v.vehicle_id == s.vehicle_id; });
      if (it == truth.vehicles.end()) continue;
      const int row = row_of_vehicle[it - truth.vehicles.begin()];
      if (row < 0) continue;
      const double d = std::hypot(s.centroid.x - reports[r].entry_source.x, s.centroid.y - reports[r].entry_source.y);
      if (d <= max_distance) candidates.push_back({d, r, row});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.distance < b.distance; });
  std::vector<std::uint8_t> report_used(reports.size(), 0);
  for (const auto& c : candidates) {
    if (report_used[c.report] || out[c.row].pair.measured) continue;
    report_used[c.report] = 1;
    out[c.row].pair.measured = reports[c.report].report.mean_mph;
  }
  return out;
}

void ErrorAccumulator::add_events(const EventCounts& c) {
  events_.truth += c.truth;
  events_.missed += c.missed;
  events_.spurious += c.spurious;
}

void ErrorAccumulator::add_pairs(const std::vector<SpeedPair>& pairs) {
  pairs_.insert(pairs_.end(), pairs.begin(), pairs.end());
}

void ErrorAccumulator::merge(const ErrorAccumulator& other) {
  add_events(other.events_);
  add_pairs(other.pairs_);
}

ErrorReport ErrorAccumulator::report() const {
  ErrorReport r;
  r.events = events_;
  if (events_.truth > 0) r.congestion_error = static_cast<double>(events_.missed + events_.spurious) / events_.truth;
  r.speed_error = speed_error(pairs_);
  r.rms_error = rms_error(pairs_);
  r.vehicles = static_cast<int>(pairs_.size());
  double sum = 0.0;
  for (const auto& p : pairs_) {
    if (!p.measured) continue;
    ++r.matched;
    sum += *p.measured;
  }
  r.mean_speed = r.matched > 0 ? sum / r.matched : 0.0;
  return r;
}

ErrorReport evaluate_window(const std::vector<std::uint8_t>& detected, const std::vector<MatchedVehicle>& matches,
                            const GroundTruth& truth, int first, int last, ErrorAccumulator* pool) {
  const int n = static_cast<int>(truth.congestion.size());
  if (static_cast<int>(detected.size()) != n) throw std::invalid_argument("detected series does not match truth");
  if (first < 0 || last >= n || first > last) throw std::invalid_argument("window outside the run");
  // Events are matched over the whole run and counted where they begin.
  const auto de = find_events(detected);
  const auto te = find_events(truth.congestion);
  auto inside = [&](const Event& e) { return e.first >= first && e.first <= last; };
  EventCounts counts;
  for (const auto& t : te) {
    if (!inside(t)) continue;
    ++counts.truth;
    if (std::none_of(de.begin(), de.end(), [&](const Event& d) { return overlaps(t, d); })) ++counts.missed;
  }
  for (const auto& d : de) {
    if (inside(d) && std::none_of(te.begin(), te.end(), [&](const Event& t) { return overlaps(t, d); })) {
      ++counts.spurious;
    }
  }
  std::vector<SpeedPair> pairs;
  for (const auto& m : matches) {
    if (m.window_first >= first && m.window_first <= last) pairs.push_back(m.pair);
  }
  ErrorAccumulator acc;
  acc.add_events(counts);
  acc.add_pairs(pairs);
  if (pool) {
    pool->add_events(counts);
    pool->add_pairs(pairs);
  }
  return acc.report();
}

ErrorReport evaluate(const DetectionSeries& series, const GroundTruth& truth, double max_distance) {
  const auto matches = match_reports(series.reports, truth, max_distance);
  return evaluate_window(series.congestion_flags(), matches, truth, 0, truth.frame_count() - 1);
}

std::vector<std::uint8_t> bad_frames(const LinkTrace& trace, int frame_count, double fps, double reference_rate) {
  std::vector<std::uint8_t> out(frame_count);
  for (int i = 0; i < frame_count; ++i) out[i] = trace.rate_at(i / fps) < reference_rate ? 1 : 0;
  return out;
}

std::vector<WindowChoice> choose_windows(const std::vector<std::uint8_t>& bad, int length,
                                         const std::vector<double>& phis, double tolerance) {
  const int n = static_cast<int>(bad.size());
  if (length < 1 || length > n) throw std::invalid_argument("window length must lie in [1, run length]");
  std::vector<int> prefix(n + 1, 0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + bad[i];
  std::vector<WindowChoice> out;
  for (double phi : phis) {
    // Compared in bad-frame counts so that ties are exact.
    const double target = phi * length;
    double best_gap = std::numeric_limits<double>::infinity();
    for (int s = 0; s + length <= n; ++s) best_gap = std::min(best_gap, std::abs((prefix[s + length] - prefix[s]) - target));
    WindowChoice c;
    c.phi = phi;
    c.length = length;
    double bad_sum = 0.0;
    for (int s = 0; s + length <= n; ++s) {
      const int count = prefix[s + length] - prefix[s];
      if (std::abs(count - target) == best_gap) {
        c.firsts.push_back(s);
        bad_sum += static_cast<double>(count) / length;
      }
    }
    c.bad_fraction = bad_sum / c.firsts.size();
    c.reachable = best_gap / length <= tolerance + 1e-12;
    out.push_back(c);
  }
  return out;
}

ErrorReport evaluate_windows(const std::vector<std::uint8_t>& detected, const std::vector<MatchedVehicle>& matches,
                             const GroundTruth& truth, const WindowChoice& choice, ErrorAccumulator* pool) {
  ErrorAccumulator acc;
  for (int first : choice.firsts) evaluate_window(detected, matches, truth, first, first + choice.length - 1, &acc);
  if (pool) {
    for (int first : choice.firsts) evaluate_window(detected, matches, truth, first, first + choice.length - 1, pool);
  }
  return acc.report();
}

AnovaResult one_way_anova(const std::vector<int>& factor, const std::vector<double>& values) {
  if (factor.size() != values.size()) throw std::invalid_argument("factor and values differ in length");
  AnovaResult r;
  double sum[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < factor.size(); ++i) {
    if (factor[i] != 0 && factor[i] != 1) throw std::domain_error("factor levels must be 0 or 1");
    (factor[i] ? r.n1 : r.n0)++;
    sum[factor[i]] += values[i];
  }
  if (r.n0 < 2 || r.n1 < 2) throw std::domain_error("each factor level needs at least two samples");
  r.mean0 = sum[0] / r.n0;
  r.mean1 = sum[1] / r.n1;
  r.coefficient = r.mean1 - r.mean0;
  const double n = r.n0 + r.n1;
  const double grand = (sum[0] + sum[1]) / n;
  double within = 0.0;
  for (std::size_t i = 0; i < factor.size(); ++i) {
    const double d = values[i] - (factor[i] ? r.mean1 : r.mean0);
    within += d * d;
  }
  const double between = r.n0 * (r.mean0 - grand) * (r.mean0 - grand) + r.n1 * (r.mean1 - grand) * (r.mean1 - grand);
  r.df_between = 1.0;
  r.df_within = n - 2.0;
  if (within == 0.0) {
    r.degenerate = true;
    if (between == 0.0) {
      r.f = 0.0;
      r.p_value = kNaN;
    } else {
      r.f = std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
    return r;
  }
  r.f = (between / r.df_between) / (within / r.df_within);
  r.p_value = f_survival(r.f, r.df_between, r.df_within);
  return r;
}

double incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("beta parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double norm = std::exp(log_beta(a, b));
  if (x > 0.5) return 1.0 - beta_integral(1.0 - x, b, a) / norm;
  return beta_integral(x, a, b) / norm;
}

double f_survival(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::domain_error("degrees of freedom must be positive");
  if (std::isnan(f)) return kNaN;
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  // P(F > f) = I_{d2 / (d2 + d1 f)}(d2 / 2, d1 / 2)
  return incomplete_beta(d2 / (d2 + d1 * f), d2 / 2.0, d1 / 2.0);
}

}  // namespace tiertraffic
