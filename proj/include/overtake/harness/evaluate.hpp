#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "overtake/expert/expert.hpp"
#include "overtake/harness/checkpoint.hpp"
#include "overtake/harness/metrics.hpp"
#include "overtake/harness/trace_io.hpp"

namespace overtake::harness {

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

inline PolicyFactory expert_factory(ExpertConfig cfg = {}) {
  return [cfg] { return std::make_unique<ExpertDriver>(cfg); };
}

inline PolicyFactory zero_factory() {
  return [] { return std::make_unique<ZeroPolicy>(); };
}

// The checkpoint must outlive the factory and every policy it creates.
inline PolicyFactory checkpoint_factory(const Checkpoint& c) {
  return [&c] {
    return std::make_unique<rl::ActorPolicy>(c.actor, c.normalizer ? &*c.normalizer : nullptr);
  };
}

inline std::uint64_t episode_seed(std::uint64_t seed, int episode) {
  return Rng::derive(seed, static_cast<std::uint64_t>(episode));
}

struct EpisodeResult {
  std::uint64_t seed = 0;  // run seed
  int episode = 0;
  EpisodeTrace trace;
  EpisodeMetrics metrics;
};

struct Evaluation {
  std::string scenario;
  std::string policy;
  std::vector<std::uint64_t> seeds;
  int episodes_per_seed = 0;
  std::vector<EpisodeResult> episodes;  // ordered by (seed, episode)
  EpisodeMetrics mean;
};

using EpisodeHook = std::function<void(const EpisodeResult&, Policy&)>;

// Noise-free rollouts over seeds x episodes; rewards are the raw simulator
// rewards. `hook` sees each finished episode while its policy is alive.
inline Evaluation evaluate(const PolicyFactory& make, const std::string& policy_name,
                           const ScenarioConfig& scenario, const std::vector<std::uint64_t>& seeds,
                           int episodes_per_seed, const EpisodeHook& hook = {}) {
  if (seeds.empty()) throw ConfigError("seed list is empty");
  if (episodes_per_seed < 1) throw ConfigError("episodes per seed must be >= 1");
  Evaluation ev;
  ev.scenario = scenario.name;
  ev.policy = policy_name;
  ev.seeds = seeds;
  ev.episodes_per_seed = episodes_per_seed;
  std::vector<EpisodeMetrics> all;
  for (std::uint64_t s : seeds) {
    for (int e = 0; e < episodes_per_seed; ++e) {
      auto policy = make();
      EpisodeResult r;
      r.seed = s;
      r.episode = e;
      r.trace = run_episode(*policy, scenario, episode_seed(s, e));
      r.metrics = compute_metrics(r.trace);
      all.push_back(r.metrics);
      if (hook) hook(r, *policy);
      ev.episodes.push_back(std::move(r));
    }
  }
  ev.mean = aggregate(all);
  return ev;
}

inline Json metrics_json(const EpisodeMetrics& m) {
  Json j;
  const auto v = as_vector(m);
  for (std::size_t i = 0; i < v.size(); ++i) j[metric_names()[i]] = v[i];
  return j;
}

// Wall-clock values are listed under "timing_fields" so comparisons can drop
// them.
inline Json summary_json(const Evaluation& ev, const Json& extra_metadata = Json::object()) {
  Json meta = {{"scenario", ev.scenario},
               {"policy", ev.policy},
               {"seeds", ev.seeds},
               {"episodes_per_seed", ev.episodes_per_seed},
               {"episodes", ev.episodes.size()}};
  for (auto it = extra_metadata.begin(); it != extra_metadata.end(); ++it) meta[it.key()] = it.value();
  return {{"metadata", meta},
          {"metrics", metrics_json(ev.mean)},
          {"timing_fields", {"metrics.computation_time_ms"}}};
}

inline Json strip_timing(Json summary) {
  for (const auto& f : summary.at("timing_fields")) {
    const std::string path = f.get<std::string>();
    const auto dot = path.find('.');
    summary.at(path.substr(0, dot)).erase(path.substr(dot + 1));
  }
  return summary;
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline std::string trace_file_name(const EpisodeResult& r) {
  return "trace_seed" + std::to_string(r.seed) + "_ep" + std::to_string(r.episode) + ".csv";
}

inline void write_training_log(const std::filesystem::path& path, const std::vector<rl::LogRow>& log) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "update,policy_loss,guidance_loss,beta,actor_loss,eval_return\n";
  for (const auto& r : log) {
    out << r.update << ',' << format_double(r.policy_loss) << ',' << format_double(r.guidance_loss) << ','
        << format_double(r.beta) << ',' << format_double(r.actor_loss) << ',';
    if (!std::isnan(r.eval_return)) out << format_double(r.eval_return);
    out << '\n';
  }
}

inline void write_curve(const std::filesystem::path& path, const std::vector<rl::CurvePoint>& curve) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "step,eval_return\n";
  for (const auto& c : curve) out << c.step << ',' << format_double(c.eval_return) << '\n';
}

struct ReplayReport {
  bool match = true;
  int first_mismatch = -1;  // row index
  std::string detail;
};

// Re-simulates the trace's world from its seed, applying the logged actions,
// and compares rewards and the termination reason exactly.
inline ReplayReport replay_trace(const EpisodeTrace& t, const ScenarioConfig& scenario) {
  ReplayReport rep;
  if (!t.complete()) throw ConfigError("trace is truncated: no termination reason on the final row");
  HighwayEnv env(scenario);
  env.reset(t.seed);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const TraceRow& r = t.rows[i];
    if (env.done()) {
      rep = {false, static_cast<int>(i), "episode ended before the trace"};
      return rep;
    }
    const StepOutcome out = env.step({r.accel, r.steer});
    if (out.reward != r.reward || out.reason != r.reason) {
      rep.match = false;
      rep.first_mismatch = static_cast<int>(i);
      rep.detail = "step " + std::to_string(r.step) + ": reward " + format_double(out.reward) + " vs logged " +
                   format_double(r.reward) + ", reason " + std::string(to_string(out.reason)) + " vs logged " +
                   std::string(to_string(r.reason));
      return rep;
    }
  }
  if (!env.done()) rep = {false, static_cast<int>(t.rows.size()), "episode continues past the trace"};
  return rep;
}

}  // namespace overtake::harness
