#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"

#include "tiertraffic/experiment.hpp"
#include "tiertraffic/raw_io.hpp"

namespace tt = tiertraffic;

namespace {

tt::ExperimentConfig load_or_default(const std::string& path) {
  return path.empty() ? tt::parse_experiment_config(nlohmann::json::object()) : tt::load_experiment_config(path);
}

std::filesystem::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("TIERTRAFFIC_OUT"); env && *env) return env;
  return "results";
}

void log_line(const std::string& msg) { std::cerr << msg << '\n'; }

double parse_rate(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad rate: " + s);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge/cloud traffic video analytics simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_flag;
  std::vector<std::string> strategies;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;

  auto* run = app.add_subcommand("run", "Run every weather x seed cell of an experiment");
  run->add_option("--config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--strategy", strategies, "edge, cloud, cloud+, cloud- or hybrid (repeatable)");
  run->add_option("--seed", seed, "Run a single seed");
  run->add_option("--out", out_flag, "Output directory (else $TIERTRAFFIC_OUT, else ./results)");
  run->add_option("--jobs", jobs, "Cells run in parallel")->check(CLI::PositiveNumber);

  std::vector<std::string> rates = {"inf", "0.75", "0.5", "0.3"};
  auto* sweep = app.add_subcommand("sweep-threshold", "Cloud error against constant link rates, and the threshold");
  sweep->add_option("--config", config_path, "Experiment JSON (defaults when absent)")->check(CLI::ExistingFile);
  sweep->add_option("--rates", rates, "Fractions of the required rate, inf for unlimited")->delimiter(',');
  sweep->add_option("--seed", seed, "Sweep a single seed");
  sweep->add_option("--out", out_flag, "Output directory (else $TIERTRAFFIC_OUT, else ./results)");
  sweep->add_option("--jobs", jobs, "Cells run in parallel")->check(CLI::PositiveNumber);

  auto* tau = app.add_subcommand("calibrate-tau-a", "Area threshold per tier against measured stopped areas");
  tau->add_option("--config", config_path, "Experiment JSON (defaults when absent)")->check(CLI::ExistingFile);
  tau->add_option("--seed", seed, "Measure a single seed");

  std::string weather = "sunny";
  auto* gen = app.add_subcommand("generate", "Render a scenario to a raw sequence with its ground truth");
  gen->add_option("--config", config_path, "Experiment JSON (defaults when absent)")->check(CLI::ExistingFile);
  gen->add_option("--seed", seed, "Scenario seed (default: first configured seed)");
  gen->add_option("--weather", weather, "sunny, rainy or snowy");
  gen->add_option("--out", out_flag, "Output directory (else $TIERTRAFFIC_OUT, else ./results)");

  double duration = 120.0;
  double good_rate = std::numeric_limits<double>::infinity();
  double limit_rate = 0.0;
  std::vector<double> window;
  std::string trace_out;
  auto* mk = app.add_subcommand("make-trace", "Write a link trace CSV with one limited window");
  mk->add_option("--duration", duration, "Trace length, s")->check(CLI::PositiveNumber);
  mk->add_option("--good-rate", good_rate, "Rate outside the window, bytes/s (default unlimited)");
  mk->add_option("--limit-rate", limit_rate, "Rate inside the window, bytes/s")->required();
  mk->add_option("--limit-window", window, "start,end in s")->delimiter(',')->expected(2)->required();
  mk->add_option("--out", trace_out, "CSV path (stdout when absent)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto config = tt::load_experiment_config(config_path);
      if (!strategies.empty()) {
        config.strategies.clear();
        for (const auto& s : strategies) config.strategies.push_back(tt::parse_strategy(s));
      }
      if (seed) config.seeds = {*seed};
      if (jobs) config.jobs = *jobs;
      const auto dir = output_dir(out_flag);
      const auto result = tt::run_experiment(config, log_line);
      tt::write_experiment_outputs(result, config, dir);
      tt::write_summary(std::cout, result, config);
      std::cout << "\noutputs in " << dir.string() << '\n';
    } else if (sweep->parsed()) {
      auto config = load_or_default(config_path);
      if (seed) config.seeds = {*seed};
      if (jobs) config.jobs = *jobs;
      std::vector<double> fractions;
      for (const auto& r : rates) fractions.push_back(parse_rate(r));
      const auto result = tt::sweep_threshold(config, fractions, log_line);
      const auto dir = output_dir(out_flag);
      std::filesystem::create_directories(dir);
      std::ofstream csv(dir / "sweep.csv");
      tt::write_sweep_csv(csv, result);
      tt::write_sweep_csv(std::cout, result);
      std::cout << "threshold: ";
      if (result.threshold) {
        std::cout << *result.threshold << " (" << *result.threshold * tt::ChannelParams::uncompressed(
                                                                           config.scenario.width, config.scenario.height,
                                                                           3, config.scenario.fps)
                                                                           .reference_rate
                  << " bytes/s)\n";
      } else {
        std::cout << "none (the cloud never falls behind the edge, or is behind at every rate)\n";
      }
    } else if (tau->parsed()) {
      auto config = load_or_default(config_path);
      if (seed) config.seeds = {*seed};
      const auto rows = tt::calibrate_area_threshold(config, log_line);
      std::cout << "tier,width,height,tau_a_px,congested_mean_px,free_p99_px,congested_frames,free_frames\n";
      for (const auto& r : rows) {
        std::cout << tt::to_string(r.tier) << ',' << r.width << ',' << r.height << ',' << r.tau_a << ','
                  << r.congested_mean << ',' << r.free_p99 << ',' << r.congested_frames << ',' << r.free_frames << '\n';
      }
    } else if (gen->parsed()) {
      auto config = load_or_default(config_path);
      const std::uint64_t s = seed.value_or(config.seeds.front());
      const auto kind = tt::parse_weather_kind(weather);
      const auto sc = tt::build_cell_scenario(config, s);
      tt::SceneSource source(sc.script, sc.spec, tt::WeatherModel::preset(kind, s));
      const auto dir = output_dir(out_flag);
      std::filesystem::create_directories(dir);
      const auto fps = static_cast<std::uint32_t>(std::lround(sc.spec.fps));
      if (std::abs(fps - sc.spec.fps) > 1e-9) throw std::invalid_argument("generate needs an integer frame rate");
      tt::RawSequenceWriter writer(dir / "frames.raw", sc.spec.width, sc.spec.height, 3, fps);
      for (int i = 0; i < source.frame_count(); ++i) writer.write(source.frame(i));
      writer.close();
      std::ofstream congestion(dir / "congestion_truth.csv");
      std::ofstream vehicles(dir / "vehicles_truth.csv");
      tt::write_truth_csv(congestion, vehicles, source.renderer().ground_truth());
      const auto channel = tt::ChannelParams::uncompressed(sc.spec.width, sc.spec.height, 3, sc.spec.fps);
      std::ofstream trace(dir / "trace.csv");
      tt::write_trace_csv(trace, config.trace.build(source.duration(), channel.reference_rate));
      std::cout << "wrote " << source.frame_count() << " frames to " << (dir / "frames.raw").string() << '\n';
    } else if (mk->parsed()) {
      const auto trace = tt::LinkTrace::limited_window(good_rate, limit_rate, window[0], window[1], duration);
      if (trace_out.empty()) {
        tt::write_trace_csv(std::cout, trace);
      } else {
        std::ofstream out(trace_out);
        if (!out) throw std::runtime_error("cannot write " + trace_out);
        tt::write_trace_csv(out, trace);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
