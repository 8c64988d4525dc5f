#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "overtake/harness/cli.hpp"

using namespace overtake;
using namespace overtake::harness;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("overtake_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "overtake");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(detail::split(line, ','));
  }
  return rows;
}

EpisodeTrace synthetic_trace(std::vector<double> rewards, double speed, double dt) {
  EpisodeTrace t;
  t.scenario = "synthetic";
  t.start_x = 10.0;
  t.road_length = 1000.0;
  double x = t.start_x;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    x += speed * dt;
    TraceRow r;
    r.step = static_cast<int>(i) + 1;
    r.x = x;
    r.speed = speed;
    r.accel = i % 2 ? -1.5 : 0.5;
    r.reward = rewards[i];
    r.compute_ms = 0.25;
    t.rows.push_back(r);
  }
  t.rows.back().reason = Termination::Timeout;
  return t;
}

}  // namespace

TEST(Config, RoundTripsEveryField) {
  ScenarioConfig c = presets::reduced();
  c.reward.normalized_commands = false;
  c.spawn_noise = 3.25;
  c.road.lane_directions = {1, 1};
  const ScenarioConfig back = scenario_from_json(to_json(c));
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
}

TEST(Config, MissingKeysKeepBaseValues) {
  const ScenarioConfig c = scenario_from_json(Json::parse(R"({"dt": 0.02, "road": {"road_length": 321}})"),
                                              presets::reduced());
  EXPECT_EQ(c.dt, 0.02);
  EXPECT_EQ(c.road.road_length, 321.0);
  EXPECT_EQ(c.max_steps, presets::reduced().max_steps);
  EXPECT_EQ(c.name, presets::reduced().name);
}

TEST(Config, RejectsUnknownAndMistypedKeys) {
  EXPECT_THROW(scenario_from_json(Json::parse(R"({"dtt": 0.02})")), ConfigError);
  EXPECT_THROW(scenario_from_json(Json::parse(R"({"reward": {"colision": 1}})")), ConfigError);
  EXPECT_THROW(scenario_from_json(Json::parse(R"({"dt": "fast"})")), ConfigError);
  EXPECT_THROW(scenario_from_json(Json::parse(R"([1, 2])")), ConfigError);
}

TEST(Config, ValidationCatchesBadValues) {
  ScenarioConfig c;
  c.dt = 0.0;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.mixture = {0, 0, 0, 0};
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.road.lane_count = 3;
  EXPECT_THROW(validate(c), ConfigError);
  for (const auto& name : preset_names()) EXPECT_NO_THROW(validate(preset(name))) << name;
}

TEST(Config, PresetNamesMatchScenarioNames) {
  for (const auto& name : preset_names()) EXPECT_EQ(preset(name).name, name);
  EXPECT_THROW(preset("nope"), ConfigError);
}

TEST(Config, FileWithBaseOverridesPreset) {
  const fs::path dir = fresh_dir("config_file");
  {
    std::ofstream(dir / "s.json") << R"({"base": "reduced", "max_steps": 77})";
  }
  const ScenarioConfig c = load_scenario((dir / "s.json").string());
  EXPECT_EQ(c.max_steps, 77);
  EXPECT_EQ(c.road.road_length, presets::reduced().road.road_length);
  EXPECT_THROW(load_scenario((dir / "missing.json").string()), ConfigError);
}

TEST(Trace, RoundTripsExactly) {
  ScenarioConfig sc = presets::overtake_abort();
  sc.max_steps = 300;
  ExpertDriver ex;
  const EpisodeTrace t = run_episode(ex, sc, 5);
  std::stringstream buf;
  write_trace(buf, t);
  const EpisodeTrace back = read_trace(buf);
  EXPECT_EQ(back.scenario, t.scenario);
  EXPECT_EQ(back.seed, t.seed);
  EXPECT_EQ(back.start_x, t.start_x);
  EXPECT_EQ(back.start_speed, t.start_speed);
  ASSERT_EQ(back.rows.size(), t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto &a = t.rows[i], &b = back.rows[i];
    ASSERT_EQ(a.step, b.step);
    ASSERT_EQ(a.x, b.x);
    ASSERT_EQ(a.y, b.y);
    ASSERT_EQ(a.speed, b.speed);
    ASSERT_EQ(a.heading, b.heading);
    ASSERT_EQ(a.accel, b.accel);
    ASSERT_EQ(a.steer, b.steer);
    ASSERT_EQ(a.reward, b.reward);
    ASSERT_EQ(a.fsm_state, b.fsm_state);
    ASSERT_EQ(a.reason, b.reason);
  }
}

TEST(Trace, HeaderAndReasonOnlyOnFinalRow) {
  std::stringstream buf;
  write_trace(buf, synthetic_trace({1, 2, 3}, 45.0, 0.01));
  std::string meta, header, row;
  std::getline(buf, meta);
  std::getline(buf, header);
  EXPECT_EQ(meta.rfind("# scenario=synthetic", 0), 0u);
  EXPECT_EQ(header, kTraceHeader);
  std::vector<std::string> reasons;
  while (std::getline(buf, row)) reasons.push_back(detail::split(row, ',').back());
  EXPECT_EQ(reasons, (std::vector<std::string>{"", "", "Timeout"}));
}

TEST(Trace, MalformedInputIsRejected) {
  std::stringstream bad_header("step,x\n1,2\n");
  EXPECT_THROW(read_trace(bad_header), ConfigError);
  std::stringstream bad_number(std::string("# scenario=s seed=1 start_x=0 start_speed=0 road_length=1\n") +
                               kTraceHeader + "\n1,abc,0,0,0,0,0,0,,Timeout\n");
  EXPECT_THROW(read_trace(bad_number), ConfigError);
  EXPECT_THROW(read_trace(fs::path("/nonexistent/trace.csv")), ConfigError);
}

TEST(Metrics, SyntheticRewardsSum) {
  const EpisodeMetrics m = compute_metrics(synthetic_trace({1, 2, 3}, 45.0, 0.01));
  EXPECT_EQ(m.episode_reward, 6.0);
  EXPECT_EQ(m.vehicle_collision, 0.0);
  EXPECT_EQ(m.boundary_collision, 0.0);
  EXPECT_DOUBLE_EQ(m.mean_computation_time, 0.25);
  EXPECT_DOUBLE_EQ(m.energy, (0.5 + 1.5 + 0.5) / 3.0);
}

TEST(Metrics, ConstantSpeedDisplacement) {
  const EpisodeMetrics m = compute_metrics(synthetic_trace(std::vector<double>(100, 0.0), 45.0, 0.01));
  EXPECT_NEAR(m.displacement, 45.0, 1e-9);
  EXPECT_DOUBLE_EQ(m.mean_speed, 45.0);
}

TEST(Metrics, CollisionFlagsFollowReason) {
  EpisodeTrace t = synthetic_trace({1}, 10.0, 0.01);
  t.rows.back().reason = Termination::VehicleCollision;
  EXPECT_EQ(compute_metrics(t).vehicle_collision, 1.0);
  EXPECT_EQ(compute_metrics(t).boundary_collision, 0.0);
  t.rows.back().reason = Termination::BoundaryCollision;
  EXPECT_EQ(compute_metrics(t).boundary_collision, 1.0);
  EXPECT_EQ(compute_metrics(t).vehicle_collision, 0.0);
}

TEST(Metrics, TruncatedTraceThrows) {
  EpisodeTrace t = synthetic_trace({1, 2}, 10.0, 0.01);
  t.rows.back().reason = Termination::Running;
  EXPECT_THROW(compute_metrics(t), ConfigError);
  EXPECT_THROW(compute_metrics(EpisodeTrace{}), ConfigError);
}

TEST(Metrics, RecomputedFromCsvColumns) {
  const fs::path dir = fresh_dir("metrics_csv");
  ScenarioConfig sc = presets::slow_leader();
  sc.max_steps = 400;
  ExpertDriver ex;
  const EpisodeTrace t = run_episode(ex, sc, 2);
  write_trace(dir / "t.csv", t);
  const auto rows = read_csv(dir / "t.csv");
  ASSERT_EQ(rows.size(), t.rows.size() + 1);
  double reward = 0, speed = 0, energy = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    reward += std::stod(rows[i][7]);
    speed += std::stod(rows[i][3]);
    energy += std::abs(std::stod(rows[i][5]));
  }
  const double n = static_cast<double>(rows.size() - 1);
  const EpisodeMetrics m = compute_metrics(read_trace(dir / "t.csv"));
  EXPECT_NEAR(m.episode_reward, reward, 1e-9 * std::abs(reward));
  EXPECT_NEAR(m.mean_speed, speed / n, 1e-12);
  EXPECT_NEAR(m.energy, energy / n, 1e-12);
  EXPECT_NEAR(m.displacement, std::stod(rows.back()[1]) - t.start_x, 1e-9);
}

TEST(Metrics, AggregateIsMeanAndNamesAreComplete) {
  EpisodeMetrics a, b;
  a.episode_reward = 2;
  b.episode_reward = 4;
  b.vehicle_collision = 1;
  const EpisodeMetrics m = aggregate({a, b});
  EXPECT_EQ(m.episode_reward, 3.0);
  EXPECT_EQ(m.vehicle_collision, 0.5);
  EXPECT_EQ(metric_names().size(), 7u);
  EXPECT_EQ(as_vector(m).size(), 7u);
  EXPECT_THROW(aggregate({}), ConfigError);
}

TEST(Evaluate, ZeroPolicyOnEmptyRoadReachesTheEnd) {
  ScenarioConfig sc = presets::empty_road();
  const Evaluation ev = evaluate(zero_factory(), "zero", sc, {1, 2}, 2);
  ASSERT_EQ(ev.episodes.size(), 4u);
  EXPECT_EQ(ev.mean.vehicle_collision, 0.0);
  EXPECT_EQ(ev.mean.boundary_collision, 0.0);
  EXPECT_GE(ev.mean.displacement, sc.road.road_length);
  EXPECT_EQ(ev.mean.energy, 0.0);
}

TEST(Evaluate, SummaryIsDeterministicApartFromTiming) {
  ScenarioConfig sc = presets::overtake_abort();
  sc.max_steps = 200;
  const Json a = summary_json(evaluate(expert_factory(), "expert", sc, {3}, 2));
  const Json b = summary_json(evaluate(expert_factory(), "expert", sc, {3}, 2));
  EXPECT_EQ(strip_timing(a).dump(), strip_timing(b).dump());
  EXPECT_FALSE(strip_timing(a).at("metrics").contains("computation_time_ms"));
  EXPECT_EQ(strip_timing(a).at("metrics").size(), 6u);
}

TEST(Checkpoint, RoundTripsParametersExactly) {
  Rng rng(3);
  Checkpoint c;
  c.scenario = presets::reduced();
  c.actor = rl::Mlp(rl::MlpSpec{{12, 8, 2}, rl::Activation::Tanh, true});
  c.actor.init(rng);
  rl::RunningNormalizer n = rl::RunningNormalizer::for_observation(2, 6);
  for (int i = 0; i < 10; ++i) n.update(rl::Vector::Random(12) * 3.7);
  c.normalizer = n;
  c.guided = true;
  c.q1 = 1.2345678901234567;
  c.q2 = 4.0;
  c.steps = 50000;
  c.seed = 42;
  const fs::path dir = fresh_dir("checkpoint");
  save_checkpoint(c, dir / "c.json");
  const Checkpoint back = load_checkpoint(dir / "c.json", presets::reduced());
  EXPECT_TRUE(back.actor == c.actor);
  ASSERT_TRUE(back.normalizer.has_value());
  EXPECT_TRUE(*back.normalizer == *c.normalizer);
  EXPECT_EQ(back.q1, c.q1);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.hash(), c.hash());
}

TEST(Checkpoint, RefusesMismatchedScenarioAndTampering) {
  Checkpoint c;
  c.scenario = presets::reduced();
  c.actor = rl::Mlp(rl::MlpSpec{{12, 4, 2}, rl::Activation::Tanh, true});
  const fs::path dir = fresh_dir("checkpoint_bad");
  save_checkpoint(c, dir / "c.json");
  EXPECT_THROW(load_checkpoint(dir / "c.json", presets::canonical()), ConfigError);
  Json j = read_json_file(dir / "c.json");
  j["scenario"]["dt"] = 0.02;
  write_json(dir / "tampered.json", j);
  EXPECT_THROW(load_checkpoint(dir / "tampered.json", presets::reduced()), ConfigError);
}

TEST(Checkpoint, HashTracksConfiguration) {
  const rl::MlpSpec spec{{12, 4, 2}, rl::Activation::Tanh, true};
  ScenarioConfig a = presets::reduced(), b = presets::reduced();
  EXPECT_EQ(config_hash(a, spec, true), config_hash(b, spec, true));
  b.reward.prize += 1.0;
  EXPECT_NE(config_hash(a, spec, true), config_hash(b, spec, true));
  EXPECT_NE(config_hash(a, spec, true), config_hash(a, spec, false));
  EXPECT_EQ(config_hash(a, spec, true).size(), 16u);
}

TEST(Cli, ParsesSeedLists) {
  EXPECT_EQ(parse_seeds("3"), (std::vector<std::uint64_t>{3}));
  EXPECT_EQ(parse_seeds("1..5"), (std::vector<std::uint64_t>{1, 2, 3, 4, 5}));
  EXPECT_EQ(parse_seeds("1,4,9"), (std::vector<std::uint64_t>{1, 4, 9}));
  EXPECT_EQ(parse_seeds("7,1..2"), (std::vector<std::uint64_t>{7, 1, 2}));
  EXPECT_THROW(parse_seeds("5..1"), ConfigError);
  EXPECT_THROW(parse_seeds("x"), ConfigError);
  EXPECT_THROW(parse_seeds(""), ConfigError);
}

TEST(Cli, MissingConfigFailsWithPath) {
  const auto r = cli({"evaluate", "--config", "/no/such/file.json", "--out", fresh_dir("cli_missing").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("/no/such/file.json"), std::string::npos);
}

TEST(Cli, UnknownFlagsAndCommandsFail) {
  EXPECT_NE(cli({"evaluate", "--bogus"}).code, 0);
  EXPECT_NE(cli({"fly"}).code, 0);
  EXPECT_NE(cli({}).code, 0);
}

TEST(Cli, EvaluateWritesSevenMetrics) {
  const fs::path dir = fresh_dir("cli_eval");
  {
    std::ofstream(dir / "short.json") << R"({"base": "canonical", "max_steps": 120})";
  }
  const auto r = cli({"evaluate", "--config", (dir / "short.json").string(), "--seed", "1..5", "--episodes", "1",
                      "--policy", "zero", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json s = read_json_file(dir / "summary.json");
  for (const auto& name : metric_names()) EXPECT_TRUE(s.at("metrics").contains(name)) << name;
  EXPECT_EQ(s.at("metrics").size(), 7u);
  EXPECT_EQ(s.at("metadata").at("episodes"), 5);
}

TEST(Cli, ExpertRunWritesTracesAndSolverDump) {
  const fs::path dir = fresh_dir("cli_expert");
  {
    std::ofstream(dir / "short.json") << R"({"base": "overtake_abort", "max_steps": 150})";
  }
  const auto r = cli({"expert-run", "--config", (dir / "short.json").string(), "--seed", "2", "--episodes", "1",
                      "--trace", "--solver-dump", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "trace_seed2_ep0.csv"));
  const Json solves = read_json_file(dir / "solves_seed2_ep0.json");
  EXPECT_EQ(solves.size(), 15u);
  EXPECT_TRUE(solves.at(0).contains("cost_history"));
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const fs::path dir = fresh_dir("cli_env");
  ::setenv("OVERTAKE_OUT_DIR", dir.string().c_str(), 1);
  EXPECT_EQ(output_dir(""), dir);
  ::unsetenv("OVERTAKE_OUT_DIR");
  EXPECT_EQ(output_dir((dir / "flag").string()), dir / "flag");
}

TEST(Cli, TrainWithZeroQ1LogsZeroBeta) {
  const fs::path dir = fresh_dir("cli_train");
  {
    std::ofstream(dir / "short.json") << R"({"base": "reduced", "max_steps": 120})";
  }
  const auto r = cli({"train", "--config", (dir / "short.json").string(), "--guided", "--q1", "0", "--steps",
                      "1200", "--seed", "3", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(dir / "training_log_seed3.csv");
  ASSERT_GT(rows.size(), 2u);
  EXPECT_EQ(rows[0][3], "beta");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(std::stod(rows[i][3]), 0.0);
    EXPECT_EQ(std::stod(rows[i][4]), std::stod(rows[i][1]));  // actor loss = policy loss
  }
  // The checkpoint evaluates through the CLI as well.
  const auto e = cli({"evaluate", "--policy", "checkpoint", "--checkpoint", (dir / "checkpoint_seed3.json").string(),
                      "--config", (dir / "short.json").string(), "--episodes", "1", "--out", dir.string()});
  EXPECT_EQ(e.code, 0) << e.err;
  const auto bad = cli({"evaluate", "--policy", "checkpoint", "--checkpoint", (dir / "checkpoint_seed3.json").string(),
                        "--config", "canonical", "--episodes", "1", "--out", dir.string()});
  EXPECT_NE(bad.code, 0);
}

TEST(TraceReplay, ReproducesRecordedTrace) {
  const fs::path dir = fresh_dir("replay");
  const auto r = cli({"expert-run", "--config", "slow_leader", "--seed", "4", "--episodes", "1", "--trace", "--out",
                      dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ok = cli({"replay", "--trace", (dir / "trace_seed4_ep0.csv").string()});
  EXPECT_EQ(ok.code, 0) << ok.err;
  const EpisodeTrace t = read_trace(dir / "trace_seed4_ep0.csv");
  EXPECT_TRUE(replay_trace(t, presets::slow_leader()).match);
}

TEST(TraceReplay, DetectsTamperedActions) {
  ScenarioConfig sc = presets::empty_road();
  ZeroPolicy p;
  EpisodeTrace t = run_episode(p, sc, 1);
  t.rows[10].accel = 1.0;
  const ReplayReport rep = replay_trace(t, sc);
  EXPECT_FALSE(rep.match);
  EXPECT_GE(rep.first_mismatch, 10);
  const fs::path dir = fresh_dir("replay_bad");
  write_trace(dir / "t.csv", t);
  EXPECT_EQ(cli({"replay", "--trace", (dir / "t.csv").string()}).code, 3);
}
