#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "tiertraffic/eval.hpp"
#include "tiertraffic/scenario.hpp"
#include "tiertraffic/tier.hpp"
#include "tiertraffic/weather.hpp"

namespace tiertraffic {

/// Edge; Cloud over the experiment trace; Cloud over an unlimited link
/// (Cloud+) and over a constantly limited one (Cloud-); Hybrid stitched from
/// Edge and Cloud.
enum class Strategy { kEdge, kCloud, kCloudPlus, kCloudMinus, kHybrid };

std::string to_string(Strategy s);
/// Accepts "edge", "cloud", "cloud+", "cloud-", "hybrid".
Strategy parse_strategy(const std::string& name);

/// Invalid or incomplete experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TraceConfig {
  double limit_fraction = 0.3;  // of the reference rate
  std::optional<double> limit_start;  // s, default a third of the run
  std::optional<double> limit_end;    // s, default two thirds
  std::filesystem::path file;         // CSV; overrides the limited window when set

  LinkTrace build(double duration, double reference_rate) const;
};

struct ExperimentConfig {
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<WeatherKind> weathers = {WeatherKind::kSunny, WeatherKind::kRainy, WeatherKind::kSnowy};
  std::vector<Strategy> strategies = {Strategy::kEdge, Strategy::kCloud, Strategy::kCloudPlus, Strategy::kCloudMinus,
                                      Strategy::kHybrid};
  DeskScenarioParams scenario;
  std::optional<Homography> homography;  // replaces the scenario's source -> top-down map
  TraceConfig trace;
  double bad_network_fraction = 0.3;  // Cloud- link, of the reference rate
  HybridPolicy policy;
  PipelineConfig edge = PipelineConfig::configuration_2().at_resolution(160, 90);
  PipelineConfig cloud = PipelineConfig::configuration_1().at_resolution(320, 180);
  double window_fraction = 0.2;
  std::vector<double> phis = {0.0, 0.25, 0.5, 0.75, 1.0};
  double window_tolerance = 0.05;
  double match_distance = 12.0;
  int jobs = 1;

  void validate() const;
};

/// Relative paths (trace files) resolve against `base_dir`. Unknown keys are
/// rejected. Throws ConfigError.
ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct WindowErrors {
  WindowChoice choice;
  ErrorAccumulator errors;
};

struct RunRecord {
  Strategy strategy = Strategy::kEdge;
  WeatherKind weather = WeatherKind::kSunny;
  std::uint64_t seed = 0;
  ErrorAccumulator errors;
  std::vector<WindowErrors> windows;  // one per phi
  WorkCounters work;
  int processed_frames = 0;

  ErrorReport report() const { return errors.report(); }
};

struct CellLog {
  WeatherKind weather = WeatherKind::kSunny;
  std::uint64_t seed = 0;
  std::vector<TierDecision> decisions;
  double delivered_fraction = 1.0;  // Cloud over the experiment trace
};

/// Pooled over seeds.
struct ResultRow {
  Strategy strategy = Strategy::kEdge;
  WeatherKind weather = WeatherKind::kSunny;
  int runs = 0;
  ErrorReport report;
};

struct CurvePoint {
  Strategy strategy = Strategy::kEdge;
  WeatherKind weather = WeatherKind::kSunny;
  double phi = 0.0;
  bool reachable = false;
  double bad_fraction = 0.0;
  int windows = 0;
  ErrorReport report;
};

struct AnovaTable {
  std::string factor;    // "bad_network" or "snowy"
  std::string response;  // strategy whose runs enter the test
  std::string metric;    // "eps_s" or "eps_c"
  std::optional<AnovaResult> result;
  std::string note;  // why the result is absent
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<CellLog> cells;
  std::vector<ResultRow> rows;
  std::vector<CurvePoint> curves;
  std::vector<AnovaTable> anova;
  double reference_rate = 0.0;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Every weather x seed cell renders its scene once and feeds the pipelines
/// the chosen strategies need. Cells run on up to `jobs` threads and are
/// reduced in configuration order, so results do not depend on `jobs`.
ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Bad network: Cloud+ runs (0) against Cloud- runs (1). Snowy: Edge runs in
/// other weather (0) against snowy Edge runs (1). Each on eps_s and eps_c.
std::vector<AnovaTable> anova_tables(const std::vector<RunRecord>& runs);

/// results.csv, runs.csv, curves.csv, anova.csv, switch_log.csv, summary.txt.
void write_experiment_outputs(const ExperimentResult& result, const ExperimentConfig& config,
                              const std::filesystem::path& dir);
void write_summary(std::ostream& out, const ExperimentResult& result, const ExperimentConfig& config);

/// Cloud over constant links at each fraction of the reference rate (inf for
/// unlimited) against Edge, pooled over the configured weathers and seeds.
struct SweepResult {
  std::vector<double> fractions;
  std::vector<ErrorReport> cloud;
  ErrorReport edge;
  std::optional<double> threshold;  // calibrate_threshold on the pooled errors
};

SweepResult sweep_threshold(const ExperimentConfig& config, const std::vector<double>& fractions,
                            const ProgressFn& progress = {});
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);

/// Area threshold per tier and the stopped area each tier actually measures
/// on the configured scenes, split by ground-truth congestion.
struct AreaCalibration {
  Tier tier = Tier::kEdge;
  int width = 0;
  int height = 0;
  double tau_a = 0.0;
  double congested_mean = 0.0;  // mean stopped area over truth-congested frames
  double free_p99 = 0.0;        // 99th percentile over the other frames
  int congested_frames = 0;
  int free_frames = 0;
};

std::vector<AreaCalibration> calibrate_area_threshold(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Header frame,congested then vehicle_id,speed_mph,window_first,window_last.
void write_truth_csv(std::ostream& congestion, std::ostream& vehicles, const GroundTruth& truth);

/// The scene source of one cell.
Scenario build_cell_scenario(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace tiertraffic
