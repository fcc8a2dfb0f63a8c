#include "tiertraffic/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>

#include "tiertraffic/frame_source.hpp"

namespace tiertraffic {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key \"" + key + "\"");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

Point2 read_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(where + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::array<Point2, 4> read_quad(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw ConfigError(where + ": expected four points");
  std::array<Point2, 4> out;
  for (int k = 0; k < 4; ++k) out[k] = read_point(j[k], where);
  return out;
}

DeskScenarioParams parse_scenario(const json& j, DeskScenarioParams p) {
  const std::string w = "scenario";
  check_keys(j, w,
             {"width", "height", "fps", "duration", "meters_per_pixel", "lanes", "lane_spacing", "first_lane_x",
              "first_free_lane", "min_speed", "max_speed", "min_headway", "max_extra_headway", "stop_row", "line_a",
              "line_b", "roi_top", "roi_bottom", "noise_sigma", "vehicle_length", "vehicle_width", "events"});
  read(j, "width", p.width, w);
  read(j, "height", p.height, w);
  read(j, "fps", p.fps, w);
  read(j, "duration", p.duration, w);
  read(j, "meters_per_pixel", p.meters_per_pixel, w);
  read(j, "lanes", p.lanes, w);
  read(j, "lane_spacing", p.lane_spacing, w);
  read(j, "first_lane_x", p.first_lane_x, w);
  read(j, "first_free_lane", p.first_free_lane, w);
  read(j, "min_speed", p.min_speed, w);
  read(j, "max_speed", p.max_speed, w);
  read(j, "min_headway", p.min_headway, w);
  read(j, "max_extra_headway", p.max_extra_headway, w);
  read(j, "stop_row", p.stop_row, w);
  read(j, "line_a", p.line_a, w);
  read(j, "line_b", p.line_b, w);
  read(j, "roi_top", p.roi_top, w);
  read(j, "roi_bottom", p.roi_bottom, w);
  read(j, "noise_sigma", p.noise_sigma, w);
  read(j, "vehicle_length", p.vehicle_length, w);
  read(j, "vehicle_width", p.vehicle_width, w);
  if (j.contains("events")) {
    if (!j["events"].is_array()) throw ConfigError("scenario.events: expected an array");
    p.events.clear();
    for (const auto& e : j["events"]) {
      check_keys(e, "scenario.events[]", {"stop_time", "stop_seconds", "first_lane", "vehicles"});
      StopEvent ev;
      read(e, "stop_time", ev.stop_time, "scenario.events[]");
      read(e, "stop_seconds", ev.stop_seconds, "scenario.events[]");
      read(e, "first_lane", ev.first_lane, "scenario.events[]");
      read(e, "vehicles", ev.vehicles, "scenario.events[]");
      p.events.push_back(ev);
    }
  }
  return p;
}

PipelineConfig parse_pipeline(const json& j, const std::string& where, PipelineConfig fallback) {
  check_keys(j, where, {"preset", "width", "height", "dims", "morphology", "link_distance"});
  PipelineConfig c = fallback;
  if (j.contains("preset")) {
    const auto name = j["preset"].get<std::string>();
    if (name == "configuration-1") {
      c = PipelineConfig::configuration_1();
    } else if (name == "configuration-2") {
      c = PipelineConfig::configuration_2();
    } else {
      throw ConfigError(where + ".preset: expected configuration-1 or configuration-2");
    }
  }
  int width = c.width;
  int height = c.height;
  read(j, "width", width, where);
  read(j, "height", height, where);
  if (width <= 0 || height <= 0) throw ConfigError(where + ": resolution must be positive");
  if (width != c.width || height != c.height) c = c.at_resolution(width, height);
  read(j, "dims", c.dims, where);
  read(j, "morphology", c.morphology, where);
  read(j, "link_distance", c.speed.tracker.max_link_distance, where);
  return c;
}

template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, int jobs, Fn fn) {
  std::vector<T> out;
  out.reserve(n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
    return out;
  }
  for (std::size_t start = 0; start < n; start += jobs) {
    std::vector<std::future<T>> batch;
    for (std::size_t i = start; i < std::min(n, start + jobs); ++i) batch.push_back(std::async(std::launch::async, fn, i));
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

struct Cell {
  WeatherKind weather;
  std::uint64_t seed;
};

std::vector<Cell> cells_of(const ExperimentConfig& c) {
  std::vector<Cell> out;
  for (auto w : c.weathers) {
    for (auto s : c.seeds) out.push_back({w, s});
  }
  return out;
}

bool wants(const ExperimentConfig& c, Strategy s) {
  return std::find(c.strategies.begin(), c.strategies.end(), s) != c.strategies.end();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream o;
  o << std::setprecision(10) << v;
  return o.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "na"; }

class Progress {
 public:
  explicit Progress(const ProgressFn& fn) : fn_(fn) {}
  void operator()(const std::string& msg) {
    if (!fn_) return;
    std::lock_guard<std::mutex> lock(mutex_);
    fn_(msg);
  }

 private:
  const ProgressFn& fn_;
  std::mutex mutex_;
};

std::string cell_name(const Cell& c) { return to_string(c.weather) + " seed " + std::to_string(c.seed); }

struct CellOutput {
  std::vector<RunRecord> runs;
  CellLog log;
};

CellOutput run_cell(const ExperimentConfig& config, const Cell& cell) {
  const Scenario sc = build_cell_scenario(config, cell.seed);
  SceneSource source(sc.script, sc.spec, WeatherModel::preset(cell.weather, cell.seed));
  const GroundTruth truth = source.renderer().ground_truth();
  const int n = source.frame_count();
  const double duration = source.duration();
  const auto channel = ChannelParams::uncompressed(sc.spec.width, sc.spec.height, 3, sc.spec.fps);
  const LinkTrace trace = config.trace.build(duration, channel.reference_rate);

  const bool need_edge = wants(config, Strategy::kEdge) || wants(config, Strategy::kHybrid);
  std::vector<LinkTrace> traces;
  std::vector<Strategy> trace_owner;
  if (wants(config, Strategy::kCloud) || wants(config, Strategy::kHybrid)) {
    traces.push_back(trace);
    trace_owner.push_back(Strategy::kCloud);
  }
  if (wants(config, Strategy::kCloudPlus)) {
    traces.push_back(LinkTrace::constant(kUnlimitedRate, duration));
    trace_owner.push_back(Strategy::kCloudPlus);
  }
  if (wants(config, Strategy::kCloudMinus)) {
    traces.push_back(LinkTrace::constant(config.bad_network_fraction * channel.reference_rate, duration));
    trace_owner.push_back(Strategy::kCloudMinus);
  }
  TierRun run = run_tiers(source, sc.geometry, need_edge ? std::optional<PipelineConfig>(config.edge) : std::nullopt,
                          config.cloud, traces, channel);

  CellOutput out;
  out.log.weather = cell.weather;
  out.log.seed = cell.seed;
  out.log.decisions = plan_tiers(trace, duration, channel.reference_rate, config.policy);

  const auto bad = bad_frames(trace, n, source.fps(), channel.reference_rate);
  const int length = std::clamp(static_cast<int>(std::lround(config.window_fraction * n)), 1, n);
  const auto choices = choose_windows(bad, length, config.phis, config.window_tolerance);

  auto series_for = [&](Strategy s) -> const DetectionSeries* {
    if (s == Strategy::kEdge) return &*run.edge;
    for (std::size_t k = 0; k < trace_owner.size(); ++k) {
      if (trace_owner[k] == s) return &run.cloud[k];
    }
    return nullptr;
  };
  std::optional<DetectionSeries> hybrid;
  if (wants(config, Strategy::kHybrid)) {
    hybrid = stitch_hybrid(*run.edge, *series_for(Strategy::kCloud), out.log.decisions, source.fps());
  }
  for (std::size_t k = 0; k < trace_owner.size(); ++k) {
    if (trace_owner[k] == Strategy::kCloud) out.log.delivered_fraction = run.schedules[k].delivered_fraction();
  }

  for (Strategy s : config.strategies) {
    const DetectionSeries& series = s == Strategy::kHybrid ? *hybrid : *series_for(s);
    RunRecord r;
    r.strategy = s;
    r.weather = cell.weather;
    r.seed = cell.seed;
    r.work = series.work;
    r.processed_frames = series.processed_frames;
    const auto flags = series.congestion_flags();
    const auto matches = match_reports(series.reports, truth, config.match_distance);
    evaluate_window(flags, matches, truth, 0, n - 1, &r.errors);
    for (const auto& choice : choices) {
      WindowErrors we;
      we.choice = choice;
      evaluate_windows(flags, matches, truth, choice, &we.errors);
      r.windows.push_back(std::move(we));
    }
    out.runs.push_back(std::move(r));
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

double nan_if_empty(const std::optional<double>& v) { return v.value_or(std::numeric_limits<double>::quiet_NaN()); }

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kEdge: return "edge";
    case Strategy::kCloud: return "cloud";
    case Strategy::kCloudPlus: return "cloud+";
    case Strategy::kCloudMinus: return "cloud-";
    case Strategy::kHybrid: return "hybrid";
  }
  return "edge";
}

Strategy parse_strategy(const std::string& name) {
  for (Strategy s : {Strategy::kEdge, Strategy::kCloud, Strategy::kCloudPlus, Strategy::kCloudMinus, Strategy::kHybrid}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown strategy: " + name);
}

LinkTrace TraceConfig::build(double duration, double reference_rate) const {
  if (!file.empty()) return load_trace_csv(file, duration);
  const double start = limit_start.value_or(duration / 3.0);
  const double end = limit_end.value_or(2.0 * duration / 3.0);
  return LinkTrace::limited_window(kUnlimitedRate, limit_fraction * reference_rate, start, end, duration);
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (weathers.empty()) throw ConfigError("at least one weather is required");
  if (strategies.empty()) throw ConfigError("at least one strategy is required");
  try {
    scenario.validate();
    policy.validate();
    edge.validate();
    cloud.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(trace.limit_fraction >= 0.0)) throw ConfigError("trace.limit_fraction must be nonnegative");
  if (!trace.file.empty() && !std::filesystem::exists(trace.file)) {
    throw ConfigError("trace file not found: " + trace.file.string());
  }
  if (!(bad_network_fraction >= 0.0)) throw ConfigError("bad_network_fraction must be nonnegative");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) throw ConfigError("windows.fraction must lie in (0, 1]");
  for (double phi : phis) {
    if (!(phi >= 0.0 && phi <= 1.0)) throw ConfigError("windows.phis must lie in [0, 1]");
  }
  if (!(window_tolerance >= 0.0)) throw ConfigError("windows.tolerance must be nonnegative");
  if (!(match_distance > 0.0)) throw ConfigError("match_distance must be positive");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
}

ExperimentConfig parse_experiment_config(const json& j, const std::filesystem::path& base_dir) {
  check_keys(j, "config",
             {"seed", "seeds", "weathers", "strategies", "scenario", "geometry", "trace", "bad_network_fraction",
              "policy", "edge", "cloud", "windows", "match_distance", "jobs"});
  ExperimentConfig c;
  try {
    if (j.contains("seed") && j.contains("seeds")) throw ConfigError("config: give either seed or seeds");
    if (j.contains("seed")) c.seeds = {j["seed"].get<std::uint64_t>()};
    read(j, "seeds", c.seeds, "config");
    if (j.contains("weathers")) {
      c.weathers.clear();
      for (const auto& w : j["weathers"]) c.weathers.push_back(parse_weather_kind(w.get<std::string>()));
    }
    if (j.contains("strategies")) {
      c.strategies.clear();
      for (const auto& s : j["strategies"]) c.strategies.push_back(parse_strategy(s.get<std::string>()));
    }
    if (j.contains("scenario")) c.scenario = parse_scenario(j["scenario"], c.scenario);
    if (j.contains("geometry")) {
      const auto& g = j["geometry"];
      check_keys(g, "geometry", {"homography", "corners"});
      if (g.contains("homography") == g.contains("corners")) {
        throw ConfigError("geometry: give exactly one of homography or corners");
      }
      if (g.contains("homography")) {
        const auto& m = g["homography"];
        if (!m.is_array() || m.size() != 3) throw ConfigError("geometry.homography: expected a 3x3 array");
        Eigen::Matrix3d h;
        for (int r = 0; r < 3; ++r) {
          if (!m[r].is_array() || m[r].size() != 3) throw ConfigError("geometry.homography: expected a 3x3 array");
          for (int k = 0; k < 3; ++k) h(r, k) = m[r][k].get<double>();
        }
        c.homography = Homography(h);
      } else {
        const auto& q = g["corners"];
        check_keys(q, "geometry.corners", {"source", "target"});
        if (!q.contains("source") || !q.contains("target")) {
          throw ConfigError("geometry.corners: source and target are required");
        }
        c.homography = Homography::from_correspondences(read_quad(q["source"], "geometry.corners.source"),
                                                        read_quad(q["target"], "geometry.corners.target"));
      }
    }
    if (j.contains("trace")) {
      const auto& t = j["trace"];
      check_keys(t, "trace", {"limit_fraction", "limit_start", "limit_end", "file"});
      read(t, "limit_fraction", c.trace.limit_fraction, "trace");
      if (t.contains("limit_start")) c.trace.limit_start = t["limit_start"].get<double>();
      if (t.contains("limit_end")) c.trace.limit_end = t["limit_end"].get<double>();
      if (t.contains("file")) {
        std::filesystem::path p = t["file"].get<std::string>();
        c.trace.file = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
      }
    }
    read(j, "bad_network_fraction", c.bad_network_fraction, "config");
    if (j.contains("policy")) {
      const auto& p = j["policy"];
      check_keys(p, "policy", {"threshold", "poll_period"});
      read(p, "threshold", c.policy.threshold, "policy");
      read(p, "poll_period", c.policy.poll_period, "policy");
    }
    if (j.contains("edge")) c.edge = parse_pipeline(j["edge"], "edge", c.edge);
    if (j.contains("cloud")) c.cloud = parse_pipeline(j["cloud"], "cloud", c.cloud);
    if (j.contains("windows")) {
      const auto& w = j["windows"];
      check_keys(w, "windows", {"fraction", "phis", "tolerance"});
      read(w, "fraction", c.window_fraction, "windows");
      read(w, "phis", c.phis, "windows");
      read(w, "tolerance", c.window_tolerance, "windows");
    }
    read(j, "match_distance", c.match_distance, "config");
    read(j, "jobs", c.jobs, "config");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_experiment_config(j, path.parent_path());
}

Scenario build_cell_scenario(const ExperimentConfig& config, std::uint64_t seed) {
  DeskScenarioParams p = config.scenario;
  p.seed = seed;
  Scenario sc = build_desk_scenario(p);
  if (config.homography) sc.geometry.homography = *config.homography;
  return sc;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  const auto cells = cells_of(config);
  Progress log(progress);
  auto outputs = parallel_map<CellOutput>(cells.size(), config.jobs, [&](std::size_t i) {
    log("running " + cell_name(cells[i]));
    auto out = run_cell(config, cells[i]);
    log("finished " + cell_name(cells[i]));
    return out;
  });

  ExperimentResult result;
  result.reference_rate =
      ChannelParams::uncompressed(config.scenario.width, config.scenario.height, 3, config.scenario.fps).reference_rate;
  for (auto& o : outputs) {
    result.cells.push_back(std::move(o.log));
    for (auto& r : o.runs) result.runs.push_back(std::move(r));
  }

  for (Strategy s : config.strategies) {
    for (WeatherKind w : config.weathers) {
      ErrorAccumulator all;
      std::vector<ErrorAccumulator> per_phi(config.phis.size());
      std::vector<const RunRecord*> members;
      for (const auto& r : result.runs) {
        if (r.strategy != s || r.weather != w) continue;
        members.push_back(&r);
        all.merge(r.errors);
        for (std::size_t k = 0; k < per_phi.size(); ++k) per_phi[k].merge(r.windows[k].errors);
      }
      result.rows.push_back({s, w, static_cast<int>(members.size()), all.report()});
      for (std::size_t k = 0; k < per_phi.size(); ++k) {
        CurvePoint p;
        p.strategy = s;
        p.weather = w;
        p.phi = config.phis[k];
        p.reachable = true;
        double bad_sum = 0.0;
        for (const auto* r : members) {
          p.reachable = p.reachable && r->windows[k].choice.reachable;
          bad_sum += r->windows[k].choice.bad_fraction;
          p.windows += static_cast<int>(r->windows[k].choice.firsts.size());
        }
        p.bad_fraction = members.empty() ? 0.0 : bad_sum / members.size();
        p.report = per_phi[k].report();
        result.curves.push_back(p);
      }
    }
  }
  result.anova = anova_tables(result.runs);
  return result;
}

std::vector<AnovaTable> anova_tables(const std::vector<RunRecord>& runs) {
  std::vector<AnovaTable> out;
  struct Design {
    std::string factor;
    std::string response;
    std::function<std::optional<int>(const RunRecord&)> level;
  };
  const std::vector<Design> designs = {
      {"bad_network", "cloud",
       [](const RunRecord& r) -> std::optional<int> {
         if (r.strategy == Strategy::kCloudPlus) return 0;
         if (r.strategy == Strategy::kCloudMinus) return 1;
         return std::nullopt;
       }},
      {"snowy", "edge",
       [](const RunRecord& r) -> std::optional<int> {
         if (r.strategy != Strategy::kEdge) return std::nullopt;
         return r.weather == WeatherKind::kSnowy ? 1 : 0;
       }},
  };
  for (const auto& d : designs) {
    for (const std::string metric : {"eps_s", "eps_c"}) {
      AnovaTable t;
      t.factor = d.factor;
      t.response = d.response;
      t.metric = metric;
      std::vector<int> factor;
      std::vector<double> values;
      for (const auto& r : runs) {
        const auto level = d.level(r);
        if (!level) continue;
        const ErrorReport rep = r.report();
        if (metric == "eps_s") {
          values.push_back(rep.speed_error);
        } else if (rep.congestion_error) {
          values.push_back(*rep.congestion_error);
        } else {
          continue;
        }
        factor.push_back(*level);
      }
      try {
        t.result = one_way_anova(factor, values);
      } catch (const std::domain_error& e) {
        t.note = e.what();
      }
      out.push_back(t);
    }
  }
  return out;
}

void write_summary(std::ostream& out, const ExperimentResult& result, const ExperimentConfig& config) {
  out << "tiertraffic experiment\n";
  out << "seeds:";
  for (auto s : config.seeds) out << ' ' << s;
  out << "\nweathers:";
  for (auto w : config.weathers) out << ' ' << to_string(w);
  out << "\nreference rate: " << fmt(result.reference_rate) << " bytes/s, threshold " << fmt(config.policy.threshold)
      << ", poll period " << fmt(config.policy.poll_period) << " s\n\n";

  out << "errors pooled over seeds (eps_c / eps_s / eps_rms mph)\n";
  out << std::left << std::setw(10) << "strategy";
  for (auto w : config.weathers) out << std::setw(30) << to_string(w);
  out << '\n';
  for (Strategy s : config.strategies) {
    out << std::setw(10) << to_string(s);
    for (auto w : config.weathers) {
      for (const auto& r : result.rows) {
        if (r.strategy != s || r.weather != w) continue;
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(3) << nan_if_empty(r.report.congestion_error) << " / "
             << r.report.speed_error << " / " << r.report.rms_error;
        out << std::setw(30) << cell.str();
      }
    }
    out << '\n';
  }

  out << "\nsliding windows, all weathers pooled (phi: eps_c / eps_s)\n";
  for (Strategy s : config.strategies) {
    out << std::setw(10) << to_string(s);
    for (std::size_t k = 0; k < config.phis.size(); ++k) {
      ErrorAccumulator acc;
      for (const auto& r : result.runs) {
        if (r.strategy == s) acc.merge(r.windows[k].errors);
      }
      const auto rep = acc.report();
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(2) << config.phis[k] << ": " << std::setprecision(3)
           << nan_if_empty(rep.congestion_error) << " / " << rep.speed_error;
      out << std::setw(26) << cell.str();
    }
    out << '\n';
  }

  out << "\none-way ANOVA\n";
  for (const auto& t : result.anova) {
    out << t.factor << " on " << t.response << ' ' << t.metric << ": ";
    if (!t.result) {
      out << "not applicable (" << t.note << ")\n";
      continue;
    }
    const auto& a = *t.result;
    out << "coefficient " << fmt(a.coefficient) << ", F " << fmt(a.f) << ", p " << fmt(a.p_value) << " (n " << a.n0
        << " vs " << a.n1 << (a.degenerate ? ", degenerate" : "") << ")\n";
  }

  if (!result.cells.empty()) {
    out << "\nhybrid switches (first cell):";
    const auto& d = result.cells.front().decisions;
    for (std::size_t k = 1; k < d.size(); ++k) {
      if (d[k].beta_e != d[k - 1].beta_e) out << ' ' << fmt(d[k].t) << "s->" << (d[k].beta_e ? "edge" : "cloud");
    }
    out << '\n';
  }
}

void write_experiment_outputs(const ExperimentResult& result, const ExperimentConfig& config,
                              const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto report_cols = [](std::ostream& o, const ErrorReport& r) {
    o << fmt(r.congestion_error) << ',' << fmt(r.speed_error) << ',' << fmt(r.rms_error) << ',' << fmt(r.mean_speed)
      << ',' << r.events.truth << ',' << r.events.missed << ',' << r.events.spurious << ',' << r.vehicles << ','
      << r.matched;
  };
  const std::string report_header = "eps_c,eps_s,eps_rms,mean_speed_mph,truth_events,missed,spurious,vehicles,matched";

  std::ostringstream results;
  results << "strategy,weather,runs," << report_header << '\n';
  for (const auto& r : result.rows) {
    results << to_string(r.strategy) << ',' << to_string(r.weather) << ',' << r.runs << ',';
    report_cols(results, r.report);
    results << '\n';
  }
  write_file(dir / "results.csv", results.str());

  std::ostringstream runs;
  runs << "strategy,weather,seed," << report_header << ",processed_frames,pixels,feature_scalars\n";
  for (const auto& r : result.runs) {
    runs << to_string(r.strategy) << ',' << to_string(r.weather) << ',' << r.seed << ',';
    report_cols(runs, r.report());
    runs << ',' << r.processed_frames << ',' << r.work.pixels << ',' << r.work.feature_scalars << '\n';
  }
  write_file(dir / "runs.csv", runs.str());

  std::ostringstream curves;
  curves << "strategy,weather,phi,reachable,bad_fraction,windows," << report_header << '\n';
  for (const auto& p : result.curves) {
    curves << to_string(p.strategy) << ',' << to_string(p.weather) << ',' << fmt(p.phi) << ',' << (p.reachable ? 1 : 0)
           << ',' << fmt(p.bad_fraction) << ',' << p.windows << ',';
    report_cols(curves, p.report);
    curves << '\n';
  }
  write_file(dir / "curves.csv", curves.str());

  std::ostringstream anova;
  anova << "factor,response,metric,coefficient,mean0,mean1,n0,n1,f,df_between,df_within,p_value,degenerate,note\n";
  for (const auto& t : result.anova) {
    anova << t.factor << ',' << t.response << ',' << t.metric << ',';
    if (t.result) {
      const auto& a = *t.result;
      anova << fmt(a.coefficient) << ',' << fmt(a.mean0) << ',' << fmt(a.mean1) << ',' << a.n0 << ',' << a.n1 << ','
            << fmt(a.f) << ',' << fmt(a.df_between) << ',' << fmt(a.df_within) << ',' << fmt(a.p_value) << ','
            << (a.degenerate ? 1 : 0) << ",\n";
    } else {
      anova << "na,na,na,0,0,na,na,na,na,0," << t.note << '\n';
    }
  }
  write_file(dir / "anova.csv", anova.str());

  std::ostringstream sw;
  sw << "weather,seed,t,c,beta_e\n";
  for (const auto& c : result.cells) {
    for (const auto& d : c.decisions) {
      sw << to_string(c.weather) << ',' << c.seed << ',' << fmt(d.t) << ',' << fmt(d.c) << ',' << d.beta_e << '\n';
    }
  }
  write_file(dir / "switch_log.csv", sw.str());

  std::ostringstream summary;
  write_summary(summary, result, config);
  write_file(dir / "summary.txt", summary.str());
}

SweepResult sweep_threshold(const ExperimentConfig& config, const std::vector<double>& fractions,
                            const ProgressFn& progress) {
  config.validate();
  if (fractions.empty()) throw std::invalid_argument("no rates to sweep");
  for (double f : fractions) {
    if (!(f > 0.0)) throw std::invalid_argument("sweep rates must be positive");
  }
  const auto cells = cells_of(config);
  Progress log(progress);
  struct CellSweep {
    ErrorAccumulator edge;
    std::vector<ErrorAccumulator> cloud;
  };
  auto outputs = parallel_map<CellSweep>(cells.size(), config.jobs, [&](std::size_t i) {
    log("sweeping " + cell_name(cells[i]));
    const Scenario sc = build_cell_scenario(config, cells[i].seed);
    SceneSource source(sc.script, sc.spec, WeatherModel::preset(cells[i].weather, cells[i].seed));
    const GroundTruth truth = source.renderer().ground_truth();
    const auto channel = ChannelParams::uncompressed(sc.spec.width, sc.spec.height, 3, sc.spec.fps);
    std::vector<LinkTrace> traces;
    for (double f : fractions) {
      traces.push_back(LinkTrace::constant(std::isinf(f) ? kUnlimitedRate : f * channel.reference_rate,
                                           source.duration()));
    }
    const TierRun run = run_tiers(source, sc.geometry, config.edge, config.cloud, traces, channel);
    const int n = source.frame_count();
    auto accumulate = [&](const DetectionSeries& s, ErrorAccumulator& acc) {
      evaluate_window(s.congestion_flags(), match_reports(s.reports, truth, config.match_distance), truth, 0, n - 1,
                      &acc);
    };
    CellSweep out;
    out.cloud.resize(fractions.size());
    accumulate(*run.edge, out.edge);
    for (std::size_t k = 0; k < fractions.size(); ++k) accumulate(run.cloud[k], out.cloud[k]);
    return out;
  });

  ErrorAccumulator edge;
  std::vector<ErrorAccumulator> cloud(fractions.size());
  for (const auto& o : outputs) {
    edge.merge(o.edge);
    for (std::size_t k = 0; k < fractions.size(); ++k) cloud[k].merge(o.cloud[k]);
  }
  SweepResult r;
  r.fractions = fractions;
  r.edge = edge.report();
  std::vector<SweepPoint> points;
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    r.cloud.push_back(cloud[k].report());
    points.push_back({std::min(1.0, fractions[k]), nan_if_empty(r.cloud.back().congestion_error),
                      r.cloud.back().speed_error});
  }
  r.threshold = calibrate_threshold(points, nan_if_empty(r.edge.congestion_error), r.edge.speed_error);
  return r;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << "strategy,rate_fraction,condition,eps_c,eps_s,eps_rms,truth_events,missed,spurious,vehicles,matched\n";
  auto row = [&](const std::string& name, double f, const ErrorReport& r) {
    out << name << ',' << fmt(f) << ',' << fmt(std::min(1.0, f)) << ',' << fmt(r.congestion_error) << ','
        << fmt(r.speed_error) << ',' << fmt(r.rms_error) << ',' << r.events.truth << ',' << r.events.missed << ','
        << r.events.spurious << ',' << r.vehicles << ',' << r.matched << '\n';
  };
  row("edge", std::numeric_limits<double>::infinity(), sweep.edge);
  for (std::size_t k = 0; k < sweep.fractions.size(); ++k) row("cloud", sweep.fractions[k], sweep.cloud[k]);
}

std::vector<AreaCalibration> calibrate_area_threshold(const ExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  const auto cells = cells_of(config);
  Progress log(progress);
  struct Areas {
    std::vector<double> congested[2];
    std::vector<double> free[2];
  };
  auto outputs = parallel_map<Areas>(cells.size(), config.jobs, [&](std::size_t i) {
    log("measuring " + cell_name(cells[i]));
    const Scenario sc = build_cell_scenario(config, cells[i].seed);
    SceneSource source(sc.script, sc.spec, WeatherModel::preset(cells[i].weather, cells[i].seed));
    const GroundTruth truth = source.renderer().ground_truth();
    const auto channel = ChannelParams::uncompressed(sc.spec.width, sc.spec.height, 3, sc.spec.fps);
    const TierRun run = run_tiers(source, sc.geometry, config.edge, config.cloud,
                                  {LinkTrace::constant(kUnlimitedRate, source.duration())}, channel);
    Areas a;
    const DetectionSeries* series[2] = {&*run.edge, &run.cloud.front()};
    for (int t = 0; t < 2; ++t) {
      for (int f = 0; f < truth.frame_count(); ++f) {
        const double area = static_cast<double>(series[t]->verdicts[f].area);
        (truth.congestion[f] ? a.congested[t] : a.free[t]).push_back(area);
      }
    }
    return a;
  });

  const auto probe = build_cell_scenario(config, config.seeds.front());
  std::vector<AreaCalibration> out;
  const PipelineConfig* configs[2] = {&config.edge, &config.cloud};
  for (int t = 0; t < 2; ++t) {
    AreaCalibration c;
    c.tier = t == 0 ? Tier::kEdge : Tier::kCloud;
    c.width = configs[t]->width;
    c.height = configs[t]->height;
    const double scale = static_cast<double>(c.width) / probe.geometry.width;
    c.tau_a = vehicle_area_threshold(probe.geometry.vehicle_length, probe.geometry.vehicle_width,
                                     probe.geometry.calibration.meters_per_pixel / scale,
                                     probe.geometry.congestion_vehicles);
    std::vector<double> congested;
    std::vector<double> free;
    for (const auto& a : outputs) {
      congested.insert(congested.end(), a.congested[t].begin(), a.congested[t].end());
      free.insert(free.end(), a.free[t].begin(), a.free[t].end());
    }
    c.congested_frames = static_cast<int>(congested.size());
    c.free_frames = static_cast<int>(free.size());
    double sum = 0.0;
    for (double v : congested) sum += v;
    c.congested_mean = congested.empty() ? 0.0 : sum / congested.size();
    if (!free.empty()) {
      std::sort(free.begin(), free.end());
      c.free_p99 = free[std::min(free.size() - 1, static_cast<std::size_t>(std::ceil(0.99 * free.size())) - 1)];
    }
    out.push_back(c);
  }
  return out;
}

void write_truth_csv(std::ostream& congestion, std::ostream& vehicles, const GroundTruth& truth) {
  congestion << "frame,congested\n";
  for (int i = 0; i < truth.frame_count(); ++i) congestion << i << ',' << static_cast<int>(truth.congestion[i]) << '\n';
  vehicles << "vehicle_id,speed_mph,window_first,window_last\n";
  for (const auto& v : truth.vehicles) {
    vehicles << v.vehicle_id << ',' << fmt(v.speed_mph) << ',' << v.window_first << ',' << v.window_last << '\n';
  }
}

}  // namespace tiertraffic
