#include <gtest/gtest.h>

#include <unistd.h>

#include <fstream>
#include <sstream>

#include "tiertraffic/experiment.hpp"

namespace tt = tiertraffic;
using nlohmann::json;

namespace {

json tiny_config() {
  return json::parse(R"({
    "seeds": [1, 2],
    "weathers": ["sunny", "snowy"],
    "scenario": {"duration": 6, "events": []},
    "edge": {"preset": "configuration-2", "width": 80, "height": 45},
    "cloud": {"preset": "configuration-1", "width": 160, "height": 90},
    "trace": {"limit_fraction": 0.3, "limit_start": 2, "limit_end": 4}
  })");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("tiertraffic_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(StrategyTest, RoundTrip) {
  for (auto s : {tt::Strategy::kEdge, tt::Strategy::kCloud, tt::Strategy::kCloudPlus, tt::Strategy::kCloudMinus,
                 tt::Strategy::kHybrid}) {
    EXPECT_EQ(tt::parse_strategy(tt::to_string(s)), s);
  }
  EXPECT_THROW(tt::parse_strategy("fog"), std::invalid_argument);
}

TEST(ExperimentConfigTest, DefaultsAndOverrides) {
  const auto c = tt::parse_experiment_config(json::object());
  EXPECT_EQ(c.seeds.size(), 5u);
  EXPECT_EQ(c.weathers.size(), 3u);
  EXPECT_EQ(c.strategies.size(), 5u);
  EXPECT_EQ(c.edge.width, 160);
  EXPECT_EQ(c.cloud.width, 320);
  EXPECT_EQ(c.edge.dims, 1);
  EXPECT_EQ(c.cloud.dims, 3);

  const auto t = tt::parse_experiment_config(tiny_config());
  EXPECT_EQ(t.seeds, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_EQ(t.scenario.duration, 6.0);
  EXPECT_TRUE(t.scenario.events.empty());
  EXPECT_EQ(t.edge.width, 80);
  EXPECT_EQ(t.edge.speed.tracker.max_link_distance, 5.0);
  const auto trace = t.trace.build(6.0, 100.0);
  EXPECT_EQ(trace.rate_at(1.0), tt::kUnlimitedRate);
  EXPECT_DOUBLE_EQ(trace.rate_at(3.0), 30.0);

  const auto one = tt::parse_experiment_config(json::parse(R"({"seed": 9, "strategies": ["hybrid"]})"));
  EXPECT_EQ(one.seeds, (std::vector<std::uint64_t>{9}));
  EXPECT_EQ(one.strategies, (std::vector<tt::Strategy>{tt::Strategy::kHybrid}));
}

TEST(ExperimentConfigTest, Errors) {
  EXPECT_THROW(tt::parse_experiment_config(json::parse(R"({"seedz": [1]})")), tt::ConfigError);
  EXPECT_THROW(tt::parse_experiment_config(json::parse(R"({"seed": 1, "seeds": [2]})")), tt::ConfigError);
  EXPECT_THROW(tt::parse_experiment_config(json::parse(R"({"weathers": ["foggy"]})")), tt::ConfigError);
  EXPECT_THROW(tt::parse_experiment_config(json::parse(R"({"policy": {"threshold": 1.5}})")), tt::ConfigError);
  EXPECT_THROW(tt::parse_experiment_config(json::parse(R"({"scenario": {"fps": "fast"}})")), tt::ConfigError);
  EXPECT_THROW(tt::parse_experiment_config(json::parse(R"({"windows": {"fraction": 0}})")), tt::ConfigError);
  EXPECT_THROW(tt::parse_experiment_config(json::parse(R"({"jobs": 0})")), tt::ConfigError);
  try {
    tt::parse_experiment_config(json::parse(R"({"trace": {"file": "nowhere.csv"}})"), "/tmp/cfgdir");
    FAIL() << "missing trace file accepted";
  } catch (const tt::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/tmp/cfgdir/nowhere.csv"), std::string::npos) << e.what();
  }
  try {
    tt::load_experiment_config("/nonexistent/config.json");
    FAIL() << "missing config accepted";
  } catch (const tt::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/config.json"), std::string::npos);
  }
}

TEST(ExperimentConfigTest, GeometryFromCorners) {
  const auto c = tt::parse_experiment_config(json::parse(R"({"geometry": {"corners": {
      "source": [[0, 0], [10, 0], [10, 10], [0, 10]],
      "target": [[0, 0], [20, 0], [20, 20], [0, 20]]}}})"));
  ASSERT_TRUE(c.homography.has_value());
  const auto p = c.homography->apply({5.0, 3.0});
  EXPECT_NEAR(p.x, 10.0, 1e-9);
  EXPECT_NEAR(p.y, 6.0, 1e-9);
  const auto m = tt::parse_experiment_config(
      json::parse(R"({"geometry": {"homography": [[1, 0, 2], [0, 1, 3], [0, 0, 1]]}})"));
  EXPECT_NEAR(m.homography->apply({0.0, 0.0}).x, 2.0, 1e-12);
  EXPECT_THROW(tt::parse_experiment_config(json::parse(R"({"geometry": {}})")), tt::ConfigError);
}

TEST(ExperimentConfigTest, TraceFileRelativeToConfig) {
  const auto dir = temp_dir("cfg");
  std::filesystem::create_directories(dir);
  {
    std::ofstream t(dir / "link.csv");
    t << "t_start_s,rate_bytes_per_s\n0,inf\n3,1000\n";
    std::ofstream c(dir / "exp.json");
    c << R"({"trace": {"file": "link.csv"}, "scenario": {"duration": 6, "events": []}})";
  }
  const auto c = tt::load_experiment_config(dir / "exp.json");
  EXPECT_EQ(c.trace.file, dir / "link.csv");
  const auto trace = c.trace.build(6.0, 1.0);
  EXPECT_EQ(trace.rate_at(4.0), 1000.0);
  std::filesystem::remove_all(dir);
}

TEST(ExperimentTest, CellsTablesAndDeterminism) {
  auto config = tt::parse_experiment_config(tiny_config());
  const auto a = tt::run_experiment(config);
  EXPECT_EQ(a.runs.size(), 2u * 2u * 5u);
  EXPECT_EQ(a.rows.size(), 2u * 5u);
  EXPECT_EQ(a.curves.size(), 2u * 5u * 5u);
  EXPECT_EQ(a.anova.size(), 4u);
  EXPECT_EQ(a.cells.size(), 4u);
  for (const auto& t : a.anova) {
    EXPECT_TRUE(t.metric == "eps_s" || t.metric == "eps_c");
    if (t.metric == "eps_s") {
      EXPECT_TRUE(t.result.has_value()) << t.factor << ' ' << t.note;
    }
  }
  for (const auto& r : a.runs) {
    EXPECT_EQ(r.windows.size(), 5u);
    if (r.strategy == tt::Strategy::kCloudPlus || r.strategy == tt::Strategy::kEdge) {
      EXPECT_EQ(r.processed_frames, 90);
    }
  }
  for (const auto& c : a.cells) {
    int switches = 0;
    for (std::size_t k = 1; k < c.decisions.size(); ++k) switches += c.decisions[k].beta_e != c.decisions[k - 1].beta_e;
    EXPECT_EQ(switches, 2);
  }

  const auto d1 = temp_dir("run1");
  const auto d2 = temp_dir("run2");
  tt::write_experiment_outputs(a, config, d1);
  config.jobs = 2;
  const auto b = tt::run_experiment(config);
  tt::write_experiment_outputs(b, config, d2);
  for (const char* f : {"results.csv", "runs.csv", "curves.csv", "anova.csv", "switch_log.csv", "summary.txt"}) {
    ASSERT_TRUE(std::filesystem::exists(d1 / f)) << f;
    EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
  }
  EXPECT_EQ(slurp(d1 / "results.csv").substr(0, 25), "strategy,weather,runs,eps");
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST(ExperimentTest, AnovaTablesNeedTwoRunsPerLevel) {
  std::vector<tt::RunRecord> runs(3);
  runs[0].strategy = tt::Strategy::kCloudPlus;
  runs[1].strategy = tt::Strategy::kCloudMinus;
  runs[2].strategy = tt::Strategy::kCloudMinus;
  const auto t = tt::anova_tables(runs);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_FALSE(t[0].result.has_value());
  EXPECT_FALSE(t[0].note.empty());
}

TEST(ExperimentTest, TruthCsv) {
  tt::GroundTruth g;
  g.frames.resize(2);
  g.congestion = {0, 1};
  g.vehicles = {{4, 12.5, 3, 9}, {5, std::nullopt, -1, -1}};
  std::ostringstream c;
  std::ostringstream v;
  tt::write_truth_csv(c, v, g);
  EXPECT_EQ(c.str(), "frame,congested\n0,0\n1,1\n");
  EXPECT_EQ(v.str(), "vehicle_id,speed_mph,window_first,window_last\n4,12.5,3,9\n5,na,-1,-1\n");
}
