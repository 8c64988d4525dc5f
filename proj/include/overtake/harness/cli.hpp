#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "overtake/harness/evaluate.hpp"

namespace overtake::harness {

// "3", "1..5" or "1,4,9" (ranges may appear inside comma lists).
inline std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> out;
  auto number = [&](const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("invalid seed '" + s + "' in '" + spec + "'");
    }
    return static_cast<std::uint64_t>(std::stoull(s));
  };
  for (const auto& part : detail::split(spec, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(number(part));
      continue;
    }
    const std::uint64_t lo = number(part.substr(0, dots));
    const std::uint64_t hi = number(part.substr(dots + 2));
    if (hi < lo) throw ConfigError("empty seed range '" + part + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw ConfigError("seed list is empty");
  return out;
}

inline std::filesystem::path output_dir(const std::string& flag) {
  std::filesystem::path p;
  if (!flag.empty()) {
    p = flag;
  } else if (const char* env = std::getenv("OVERTAKE_OUT_DIR"); env && *env) {
    p = env;
  } else {
    p = "out";
  }
  std::filesystem::create_directories(p);
  return p;
}

namespace detail {

inline Json solves_json(const ExpertDriver& d) {
  Json arr = Json::array();
  for (const auto& s : d.solve_records()) {
    arr.push_back({{"step", s.step},
                   {"target_y", s.target_y},
                   {"feasible", s.feasible},
                   {"verdict", s.verdict},
                   {"iterations", s.diagnostics.iterations},
                   {"converged", s.diagnostics.converged},
                   {"stop_reason", s.diagnostics.stop_reason},
                   {"max_constraint", s.diagnostics.max_constraint},
                   {"exponent_capped", s.diagnostics.exponent_capped},
                   {"cost_history", s.diagnostics.cost_history},
                   {"solve_ms", s.solve_ms}});
  }
  return arr;
}

inline void print_metrics(std::ostream& out, const EpisodeMetrics& m) {
  const auto v = as_vector(m);
  for (std::size_t i = 0; i < v.size(); ++i) out << "  " << metric_names()[i] << " = " << v[i] << '\n';
}

}  // namespace detail

// Returns the process exit status; diagnostics go to `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Guided overtaking: simulator, expert driver and fading-guidance training"};
  app.require_subcommand(1);

  std::string config, seeds = "1", out_flag, policy = "expert", checkpoint, trace_path;
  int episodes = 10;
  long steps = 50000;
  bool write_traces = false, solver_dump = false;
  std::optional<double> q1;
  double q2 = 4.0;
  int eval_interval = 2500;

  auto* expert_run = app.add_subcommand("expert-run", "Run the expert driver and write metrics");
  expert_run->add_option("--config", config, "Preset name or scenario JSON")->default_str("canonical");
  expert_run->add_option("--seed", seeds, "Seed, range a..b or comma list");
  expert_run->add_option("--episodes", episodes, "Episodes per seed")->check(CLI::PositiveNumber);
  expert_run->add_option("--out", out_flag, "Output directory (else $OVERTAKE_OUT_DIR, else ./out)");
  expert_run->add_flag("--trace", write_traces, "Write one CSV trace per episode");
  expert_run->add_flag("--solver-dump", solver_dump, "Write CiLQR solve diagnostics per episode");

  bool guided = true;
  auto* train = app.add_subcommand("train", "Train a TD3 actor with or without fading guidance");
  train->add_option("--config", config, "Preset name or scenario JSON")->default_str("reduced");
  train->add_option("--seed", seeds, "Seed, range a..b or comma list");
  train->add_option("--steps", steps, "Environment steps")->check(CLI::PositiveNumber);
  train->add_flag("--guided,!--unguided", guided, "Enable expert guidance (default) or disable it");
  train->add_option("--q1", q1, "Initial guidance weight; calibrated at the first update if omitted");
  train->add_option("--q2", q2, "Fading rate");
  train->add_option("--eval-interval", eval_interval, "Steps between evaluations")->check(CLI::PositiveNumber);
  train->add_option("--out", out_flag, "Output directory (else $OVERTAKE_OUT_DIR, else ./out)");
  train->add_option("--checkpoint", checkpoint, "Checkpoint path (single seed only)");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a policy and write the metric summary");
  evaluate_cmd->add_option("--config", config, "Preset name or scenario JSON");
  evaluate_cmd->add_option("--seed", seeds, "Seed, range a..b or comma list");
  evaluate_cmd->add_option("--episodes", episodes, "Episodes per seed")->check(CLI::PositiveNumber);
  evaluate_cmd->add_option("--policy", policy, "expert, zero or checkpoint")
      ->check(CLI::IsMember({"expert", "zero", "checkpoint"}));
  evaluate_cmd->add_option("--checkpoint", checkpoint, "Checkpoint for --policy checkpoint");
  evaluate_cmd->add_option("--out", out_flag, "Output directory (else $OVERTAKE_OUT_DIR, else ./out)");
  evaluate_cmd->add_flag("--trace", write_traces, "Write one CSV trace per episode");

  auto* replay = app.add_subcommand("replay", "Re-simulate a trace from its logged actions");
  replay->add_option("--trace", trace_path, "Trace CSV")->required();
  replay->add_option("--config", config, "Preset name or scenario JSON (default: the trace's scenario)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*expert_run) {
      const ScenarioConfig sc = load_scenario(config.empty() ? "canonical" : config);
      const auto seed_list = parse_seeds(seeds);
      const auto dir = output_dir(out_flag);
      ExpertConfig ecfg;
      ecfg.record_solves = solver_dump;
      const Evaluation ev = evaluate(expert_factory(ecfg), "expert", sc, seed_list, episodes,
                                     [&](const EpisodeResult& r, Policy& p) {
                                       if (write_traces) write_trace(dir / trace_file_name(r), r.trace);
                                       if (solver_dump) {
                                         const auto name = "solves_seed" + std::to_string(r.seed) + "_ep" +
                                                           std::to_string(r.episode) + ".json";
                                         write_json(dir / name, detail::solves_json(static_cast<ExpertDriver&>(p)));
                                       }
                                     });
      write_json(dir / "summary.json", summary_json(ev));
      out << "expert-run " << sc.name << ": " << ev.episodes.size() << " episodes -> " << (dir / "summary.json").string()
          << '\n';
      detail::print_metrics(out, ev.mean);
      return 0;
    }

    if (*train) {
      const ScenarioConfig sc = load_scenario(config.empty() ? "reduced" : config);
      const auto seed_list = parse_seeds(seeds);
      if (!checkpoint.empty() && seed_list.size() != 1) {
        throw ConfigError("--checkpoint needs a single seed; use --out for several");
      }
      const auto dir = output_dir(out_flag);
      rl::TrainerConfig tcfg;
      tcfg.eval_interval = eval_interval;
      rl::GuidanceConfig gcfg{guided, q1, q2};
      for (std::uint64_t s : seed_list) {
        const rl::TrainResult r = rl::train(sc, ExpertConfig{}, tcfg, gcfg, steps, s);
        const std::string tag = "_seed" + std::to_string(s);
        const std::filesystem::path ck = checkpoint.empty() ? dir / ("checkpoint" + tag + ".json")
                                                            : std::filesystem::path(checkpoint);
        save_checkpoint(make_checkpoint(r, sc, tcfg.normalize_observations, steps, s), ck);
        write_training_log(dir / ("training_log" + tag + ".csv"), r.log);
        write_curve(dir / ("curve" + tag + ".csv"), r.curve);
        out << "train seed " << s << (guided ? " guided" : " unguided") << " q1=" << r.q1 << " q2=" << r.q2
            << " updates=" << r.updates << " episodes=" << r.episodes
            << " final_eval=" << (r.curve.empty() ? 0.0 : r.curve.back().eval_return) << " -> " << ck.string()
            << '\n';
      }
      return 0;
    }

    if (*evaluate_cmd) {
      const auto seed_list = parse_seeds(seeds);
      const auto dir = output_dir(out_flag);
      std::optional<Checkpoint> ck;
      ScenarioConfig sc;
      PolicyFactory make;
      if (policy == "checkpoint") {
        if (checkpoint.empty()) throw ConfigError("--policy checkpoint needs --checkpoint");
        if (config.empty()) {
          ck = checkpoint_from_json(read_json_file(checkpoint));
          sc = ck->scenario;
        } else {
          sc = load_scenario(config);
          ck = load_checkpoint(checkpoint, sc);
        }
        make = checkpoint_factory(*ck);
      } else {
        sc = load_scenario(config.empty() ? "canonical" : config);
        make = policy == "expert" ? expert_factory() : zero_factory();
      }
      const Evaluation ev = evaluate(make, policy, sc, seed_list, episodes, [&](const EpisodeResult& r, Policy&) {
        if (write_traces) write_trace(dir / trace_file_name(r), r.trace);
      });
      Json extra = Json::object();
      if (ck) {
        extra["config_hash"] = ck->hash();
        extra["guided"] = ck->guided;
      }
      write_json(dir / "summary.json", summary_json(ev, extra));
      out << "evaluate " << policy << " on " << sc.name << ": " << ev.episodes.size() << " episodes -> "
          << (dir / "summary.json").string() << '\n';
      detail::print_metrics(out, ev.mean);
      return 0;
    }

    if (*replay) {
      const EpisodeTrace t = read_trace(std::filesystem::path(trace_path));
      std::string spec = config;
      if (spec.empty()) {
        spec = t.scenario;
        if (!is_preset(spec)) throw ConfigError("trace scenario '" + t.scenario + "' is not a preset; pass --config");
      }
      const ReplayReport rep = replay_trace(t, load_scenario(spec));
      if (!rep.match) {
        err << "replay mismatch at row " << rep.first_mismatch << ": " << rep.detail << '\n';
        return 3;
      }
      double total = 0.0;
      for (const auto& r : t.rows) total += r.reward;
      out << "replay ok: " << t.rows.size() << " steps, reward " << format_double(total) << ", reason "
          << to_string(t.reason()) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    if (const auto* te = dynamic_cast<const rl::TrainingError*>(&e)) err << te->dump() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace overtake::harness
