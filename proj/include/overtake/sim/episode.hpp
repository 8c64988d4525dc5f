#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "overtake/sim/observation.hpp"
#include "overtake/sim/reward.hpp"
#include "overtake/sim/world.hpp"

namespace overtake {

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  Termination reason = Termination::Running;
  Action applied;
};

// Owns one world and advances it under ego actions at the configured dt.
class HighwayEnv {
 public:
  explicit HighwayEnv(ScenarioConfig cfg) : cfg_(std::move(cfg)) { reset(0); }

  const Observation& reset(std::uint64_t seed) {
    return reset(spawn_traffic(seed, cfg_));
  }

  const Observation& reset(World initial) {
    world_ = std::move(initial);
    cfg_ = world_.config;
    done_ = false;
    obs_ = build_observation(world_, cfg_.observation_rows);
    return obs_;
  }

  StepOutcome step(const Action& action) {
    if (done_) throw ValidationError("step() called on a finished episode");
    if (!is_finite(action)) {
      throw ValidationError("policy produced a non-finite action at step " +
                            std::to_string(world_.step) + " (accel=" +
                            std::to_string(action.accel) + ", steer=" +
                            std::to_string(action.steer) + ")");
    }
    StepOutcome out;
    out.applied = clamp_action(action, cfg_.limits);

    // NPCs react to the pre-step ego so all vehicles update simultaneously.
    advance_npcs(world_, cfg_.dt);
    world_.ego = step_ego_kinematics(world_.ego, out.applied, cfg_.dt, cfg_.limits);
    world_.ego.lane_id = world_.road().lane_of(world_.ego.y);
    ++world_.step;

    bool vehicle = false;
    bool boundary = false;
    for (const auto& e : detect_collisions(world_)) {
      (e.kind == CollisionKind::Vehicle ? vehicle : boundary) = true;
    }
    const bool destination = world_.ego.x >= world_.road().road_length;

    if (vehicle) {
      out.reason = Termination::VehicleCollision;
    } else if (boundary) {
      out.reason = Termination::BoundaryCollision;
    } else if (destination) {
      out.reason = Termination::Destination;
    } else if (world_.step >= cfg_.max_steps) {
      out.reason = Termination::Timeout;
    }
    out.done = out.reason != Termination::Running;
    done_ = out.done;

    RewardFlags flags{vehicle || boundary, destination && !(vehicle || boundary)};
    out.reward = compute_reward(world_.ego, out.applied, flags, cfg_.reward, cfg_.limits);
    obs_ = build_observation(world_, cfg_.observation_rows);
    out.observation = obs_;
    return out;
  }

  const World& world() const { return world_; }
  const Observation& observation() const { return obs_; }
  const ScenarioConfig& config() const { return cfg_; }
  bool done() const { return done_; }

 private:
  ScenarioConfig cfg_;
  World world_;
  Observation obs_;
  bool done_ = false;
};

// Anything that drives the ego from the current world/observation.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void reset(const World&) {}
  virtual Action act(const World& world, const Observation& obs) = 0;
  // Mode tag recorded in traces (the expert's FSM state); empty otherwise.
  virtual std::string mode_label() const { return {}; }
};

class ZeroPolicy final : public Policy {
 public:
  Action act(const World&, const Observation&) override { return {}; }
};

struct TraceRow {
  int step = 0;
  double x = 0.0;
  double y = 0.0;
  double speed = 0.0;
  double heading = 0.0;
  double accel = 0.0;
  double steer = 0.0;
  double reward = 0.0;
  std::string fsm_state;
  Termination reason = Termination::Running;
  double compute_ms = 0.0;  // wall clock; excluded from determinism checks
};

struct EpisodeTrace {
  std::string scenario;
  std::uint64_t seed = 0;
  double start_x = 0.0;
  double start_speed = 0.0;
  double road_length = 0.0;
  std::vector<TraceRow> rows;

  Termination reason() const { return rows.empty() ? Termination::Running : rows.back().reason; }
  bool complete() const { return !rows.empty() && rows.back().reason != Termination::Running; }
};

// Runs one episode from `initial` until termination. max_steps and dt
// override the world's configuration.
inline EpisodeTrace run_episode(Policy& policy, World initial, int max_steps, double dt,
                                std::uint64_t seed = 0) {
  initial.config.max_steps = max_steps;
  initial.config.dt = dt;
  HighwayEnv env(initial.config);
  env.reset(std::move(initial));

  EpisodeTrace trace;
  trace.scenario = env.config().name;
  trace.seed = seed;
  trace.start_x = env.world().ego.x;
  trace.start_speed = env.world().ego.speed;
  trace.road_length = env.world().road().road_length;
  policy.reset(env.world());

  using Clock = std::chrono::steady_clock;
  while (!env.done()) {
    const auto t0 = Clock::now();
    const Action a = policy.act(env.world(), env.observation());
    const auto t1 = Clock::now();
    const StepOutcome out = env.step(a);
    const VehicleState& ego = env.world().ego;
    TraceRow row;
    row.step = env.world().step;
    row.x = ego.x;
    row.y = ego.y;
    row.speed = ego.speed;
    row.heading = ego.heading;
    row.accel = out.applied.accel;
    row.steer = out.applied.steer;
    row.reward = out.reward;
    row.fsm_state = policy.mode_label();
    row.reason = out.reason;
    row.compute_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

inline EpisodeTrace run_episode(Policy& policy, const ScenarioConfig& cfg, std::uint64_t seed) {
  return run_episode(policy, spawn_traffic(seed, cfg), cfg.max_steps, cfg.dt, seed);
}

}  // namespace overtake
