#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "overtake/expert/expert.hpp"
#include "overtake/rl/td3.hpp"
#include "overtake/sim/episode.hpp"

namespace overtake::rl {

struct TrainerConfig {
  Td3Config td3;
  int batch_size = 256;
  std::size_t buffer_capacity = 100000;
  int start_steps = 1000;      // uniform random actions before learning starts
  int updates_per_step = 1;
  double exploration_noise = 0.1;  // std in normalised action units
  bool normalize_observations = true;
  bool normalize_rewards = false;
  double observation_clip = 5.0;
  int eval_interval = 2500;  // environment steps between evaluations
  int eval_episodes = 10;
  std::uint64_t eval_seed = 7919;  // evaluation scenarios are shared across runs
  int log_interval = 50;           // actor updates between log rows

  void validate() const {
    td3.validate();
    if (batch_size <= 0 || buffer_capacity == 0) throw ValidationError("batch and buffer sizes must be > 0");
    if (start_steps < 0 || updates_per_step < 1) throw ValidationError("invalid update cadence");
    if (exploration_noise < 0.0) throw ValidationError("exploration noise must be >= 0");
    if (eval_interval <= 0 || eval_episodes <= 0 || log_interval <= 0) {
      throw ValidationError("evaluation and log intervals must be > 0");
    }
  }
};

// q1 empty means calibrate at the first actor update so that q1 * L_guidance
// matches |L_policy|.
struct GuidanceConfig {
  bool guided = true;
  std::optional<double> q1;
  double q2 = 4.0;
};

struct CurvePoint {
  long step = 0;
  double eval_return = 0.0;
};

struct LogRow {
  long update = 0;
  double policy_loss = 0.0;
  double guidance_loss = 0.0;
  double beta = 0.0;
  double actor_loss = 0.0;
  double eval_return = std::numeric_limits<double>::quiet_NaN();
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::string dump)
      : std::runtime_error(what), dump_(std::move(dump)) {}
  const std::string& dump() const { return dump_; }

 private:
  std::string dump_;
};

inline Vector to_normalized(const Action& a, const ActuatorLimits& lim) {
  Vector v(2);
  v << a.accel / lim.max_accel, a.steer / lim.max_steer;
  return v;
}

inline Action from_normalized(const Vector& v, const ActuatorLimits& lim) {
  return {std::clamp(v[0], -1.0, 1.0) * lim.max_accel, std::clamp(v[1], -1.0, 1.0) * lim.max_steer};
}

// Noise-free actor as a simulator policy.
class ActorPolicy final : public Policy {
 public:
  ActorPolicy(const Mlp& actor, const RunningNormalizer* norm) : actor_(&actor), norm_(norm) {}

  Action act(const World& w, const Observation& obs) override {
    const Vector x = Eigen::Map<const Vector>(obs.flat().data(), static_cast<Eigen::Index>(obs.flat().size()));
    const Vector a = actor_->forward(norm_ ? norm_->normalize(x) : x);
    return from_normalized(a, w.config.limits);
  }

 private:
  const Mlp* actor_;
  const RunningNormalizer* norm_;
};

inline double evaluate_return(const Mlp& actor, const RunningNormalizer* norm,
                              const ScenarioConfig& scenario, std::uint64_t seed) {
  ActorPolicy p(actor, norm);
  double total = 0.0;
  for (const auto& r : run_episode(p, scenario, seed).rows) total += r.reward;
  return total;
}

struct TrainResult {
  Td3Agent agent;
  RunningNormalizer normalizer;
  std::vector<CurvePoint> curve;
  std::vector<LogRow> log;
  double q1 = 0.0;
  double q2 = 0.0;
  long updates = 0;
  long planned_updates = 0;
  long episodes = 0;
  bool guided = false;
};

inline std::uint64_t eval_episode_seed(const TrainerConfig& cfg, int k) {
  return Rng::derive(cfg.eval_seed, static_cast<std::uint64_t>(k));
}

inline TrainResult train(const ScenarioConfig& scenario, const ExpertConfig& expert_cfg,
                         const TrainerConfig& cfg, const GuidanceConfig& gcfg, long total_steps,
                         std::uint64_t seed) {
  if (total_steps <= 0) throw ValidationError("total_steps must be > 0");
  cfg.validate();
  if (gcfg.q1 && !(std::isfinite(*gcfg.q1) && *gcfg.q1 >= 0.0)) throw ValidationError("q1 must be >= 0");

  const ActuatorLimits& lim = scenario.limits;
  const int rows = scenario.observation_rows;
  const int obs_dim = rows * kObservationColumns;
  constexpr int act_dim = 2;

  Rng init_rng(Rng::derive(seed, 1));
  Rng explore_rng(Rng::derive(seed, 2));
  Rng sample_rng(Rng::derive(seed, 3));
  Rng target_rng(Rng::derive(seed, 4));

  TrainResult res;
  res.guided = gcfg.guided;
  res.q2 = gcfg.q2;
  res.agent = Td3Agent(obs_dim, act_dim, cfg.td3, init_rng);
  res.normalizer = RunningNormalizer::for_observation(rows, kObservationColumns, cfg.observation_clip);
  RunningNormalizer reward_stats(1, std::numeric_limits<double>::infinity());
  ReplayBuffer buffer(cfg.buffer_capacity);
  Td3Agent& agent = res.agent;

  const long learn_steps = std::max<long>(0, total_steps - cfg.start_steps);
  res.planned_updates = std::max<long>(1, learn_steps * cfg.updates_per_step);
  FadingSchedule schedule{gcfg.q1.value_or(0.0), gcfg.q2, static_cast<double>(res.planned_updates)};
  bool q1_ready = !gcfg.guided || gcfg.q1.has_value();
  if (!gcfg.guided) schedule.q1 = 0.0;
  schedule.validate();

  HighwayEnv env(scenario);
  ExpertDriver expert(expert_cfg);
  auto start_episode = [&]() {
    env.reset(Rng::derive(seed, 1000 + static_cast<std::uint64_t>(res.episodes)));
    if (gcfg.guided) expert.reset(env.world());
  };
  start_episode();
  auto flat = [](const Observation& o) {
    return Vector(Eigen::Map<const Vector>(o.flat().data(), static_cast<Eigen::Index>(o.flat().size())));
  };
  Vector obs = flat(env.observation());
  if (cfg.normalize_observations) res.normalizer.update(obs);
  const RunningNormalizer* norm = cfg.normalize_observations ? &res.normalizer : nullptr;

  LogRow last_actor;
  long actor_updates = 0;
  auto dump_state = [&](long step) {
    std::ostringstream s;
    s.precision(17);
    s << "step=" << step << " updates=" << res.updates << " episodes=" << res.episodes
      << " buffer=" << buffer.size() << " q1=" << schedule.q1 << " q2=" << schedule.q2
      << " last_policy_loss=" << last_actor.policy_loss << " last_guidance_loss=" << last_actor.guidance_loss
      << " last_beta=" << last_actor.beta << " ego_x=" << env.world().ego.x << " ego_y=" << env.world().ego.y
      << " ego_speed=" << env.world().ego.speed;
    return s.str();
  };

  for (long step = 0; step < total_steps; ++step) {
    Vector a(act_dim);
    if (step < cfg.start_steps) {
      for (int i = 0; i < act_dim; ++i) a[i] = explore_rng.uniform(-1.0, 1.0);
    } else {
      a = agent.actor.forward(norm ? norm->normalize(obs) : obs);
      for (int i = 0; i < act_dim; ++i) {
        a[i] = std::clamp(a[i] + explore_rng.normal(0.0, cfg.exploration_noise), -1.0, 1.0);
      }
    }
    Vector ref = Vector::Zero(act_dim);
    if (gcfg.guided) {
      ref = to_normalized(clamp_action(expert.act(env.world(), env.observation()), lim), lim);
    }

    const StepOutcome out = env.step(from_normalized(a, lim));
    Vector next = flat(out.observation);
    double r = out.reward;
    if (cfg.normalize_rewards) {
      reward_stats.update(Vector::Constant(1, r));
      r /= std::sqrt(reward_stats.variance()[0] + 1e-8);
    }
    buffer.add({obs, a, r, next, out.done && out.reason != Termination::Timeout, ref});
    if (cfg.normalize_observations) res.normalizer.update(next);
    obs = std::move(next);
    if (out.done) {
      ++res.episodes;
      start_episode();
      obs = flat(env.observation());
      if (cfg.normalize_observations) res.normalizer.update(obs);
    }

    if (step >= cfg.start_steps) {
      for (int u = 0; u < cfg.updates_per_step; ++u) {
        const Batch b = buffer.gather(buffer.sample_indices(static_cast<std::size_t>(cfg.batch_size), sample_rng), norm);
        const CriticLosses cl = critic_update(agent, b, target_rng);
        if (!std::isfinite(cl.q1) || !std::isfinite(cl.q2)) {
          throw TrainingError("non-finite critic loss at step " + std::to_string(step), dump_state(step));
        }
        ++res.updates;
        if (res.updates % cfg.td3.policy_delay != 0) continue;
        const double t = static_cast<double>(std::min(res.updates, res.planned_updates));
        const ActorLosses al = actor_update(agent, b, [&](double lp, double lg) {
          if (!q1_ready) {
            schedule.q1 = lg > 0.0 ? std::abs(lp) / lg : 1.0;
            q1_ready = true;
          }
          return gcfg.guided ? fading_beta(schedule, t) : 0.0;
        });
        if (!std::isfinite(al.actor)) {
          throw TrainingError("non-finite actor loss at step " + std::to_string(step), dump_state(step));
        }
        soft_update_targets(agent);
        last_actor = {res.updates, al.policy, al.guidance, al.beta, al.actor};
        if (actor_updates++ % cfg.log_interval == 0) res.log.push_back(last_actor);
      }
    }

    if ((step + 1) % cfg.eval_interval == 0 || step + 1 == total_steps) {
      double ret = 0.0;
      for (int k = 0; k < cfg.eval_episodes; ++k) {
        ret += evaluate_return(agent.actor, norm, scenario, eval_episode_seed(cfg, k));
      }
      ret /= cfg.eval_episodes;
      res.curve.push_back({step + 1, ret});
      LogRow row = last_actor;
      row.update = res.updates;
      row.eval_return = ret;
      res.log.push_back(row);
    }
  }
  res.q1 = schedule.q1;
  return res;
}

}  // namespace overtake::rl
