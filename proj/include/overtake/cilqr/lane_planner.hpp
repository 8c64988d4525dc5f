#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "overtake/cilqr/cost.hpp"
#include "overtake/cilqr/dynamics.hpp"
#include "overtake/cilqr/solver.hpp"
#include "overtake/sim/collision.hpp"
#include "overtake/sim/world.hpp"

namespace overtake::cilqr {

using PlanTrajectory = Trajectory<4, 2>;

struct PlannerConfig {
  int horizon = 50;
  double plan_dt = 0.05;
  double desired_speed = 45.0;
  Vec<4> state_weights = (Vec<4>() << 0.0, 1.0, 0.5, 2.0).finished();
  Vec<2> control_weights = (Vec<2>() << 0.1, 1.0).finished();
  BarrierParams barrier;
  double obstacle_margin = 1.0;  // added to the combined half-extents
  double verdict_inflation = 0.2;
  double relevance_range = 300.0;
  double max_heading = 0.3;  // rad, keeps lane changes within what the PID modes can recover
  double heading_scale = 20.0;  // barrier units per rad past the bound
  SolverConfig solver{50, 1e-4};
};

struct LanePlan {
  PlanTrajectory trajectory;
  SolveDiagnostics diagnostics;
  bool feasible = false;
  std::string verdict;
  double target_y = 0.0;
  double solve_ms = 0.0;
};

// Constant-velocity prediction of an NPC centre at plan step k.
inline std::pair<double, double> predict_center(const VehicleState& v, double t) {
  return {v.x + v.vx() * t, v.y + v.vy() * t};
}

struct LaneProblem {
  BicycleDynamics dynamics;
  QuadraticCost<4, 2> cost;
  ConstraintSpec<4, 2> constraints;
  Vec<4> s_init;
  std::vector<const Npc*> obstacles;
};

inline LaneProblem build_lane_problem(const World& w, double target_y, const PlannerConfig& cfg) {
  LaneProblem p;
  p.dynamics.dt = cfg.plan_dt;
  const VehicleState& ego = w.ego;
  p.s_init << ego.x, ego.y, ego.speed, ego.heading;

  const Mat<4, 4> Q = cfg.state_weights.asDiagonal();
  p.cost.Q = Q;
  p.cost.Qf = Q;
  p.cost.R = cfg.control_weights.asDiagonal();
  p.cost.reference.assign(static_cast<std::size_t>(cfg.horizon) + 1,
                          (Vec<4>() << 0.0, target_y, cfg.desired_speed, 0.0).finished());

  auto& cs = p.constraints;
  cs.barrier = cfg.barrier;
  const ActuatorLimits& lim = w.config.limits;
  cs.constraints.push_back(control_bound<4, 2>(0, lim.max_accel, 1.0));
  cs.constraints.push_back(control_bound<4, 2>(0, -lim.max_accel, -1.0));
  cs.constraints.push_back(control_bound<4, 2>(1, lim.max_steer, 1.0));
  cs.constraints.push_back(control_bound<4, 2>(1, -lim.max_steer, -1.0));
  cs.constraints.push_back(state_bound<4, 2>(2, lim.max_speed, 1.0));
  cs.constraints.push_back(
      state_bound<4, 2>(3, cfg.max_heading, 1.0, ConstraintKind::State, cfg.heading_scale));
  cs.constraints.push_back(
      state_bound<4, 2>(3, -cfg.max_heading, -1.0, ConstraintKind::State, cfg.heading_scale));
  const double half_w = ego.width / 2.0;
  cs.constraints.push_back(state_bound<4, 2>(1, half_w, -1.0, ConstraintKind::Boundary));
  cs.constraints.push_back(
      state_bound<4, 2>(1, w.road().width() - half_w, 1.0, ConstraintKind::Boundary));

  const double horizon_t = cfg.horizon * cfg.plan_dt;
  for (const auto& npc : w.npcs) {
    const VehicleState& o = npc.state;
    // Skip vehicles that cannot come near the ego within the horizon.
    const double reach = (ego.speed + o.speed) * horizon_t + cfg.obstacle_margin + 20.0;
    if (std::abs(o.x - ego.x) > std::min(reach, cfg.relevance_range)) continue;
    std::vector<std::pair<double, double>> centers;
    centers.reserve(static_cast<std::size_t>(cfg.horizon) + 1);
    for (int k = 0; k <= cfg.horizon; ++k) centers.push_back(predict_center(o, k * cfg.plan_dt));
    const double a = 0.5 * (ego.length + o.length) + cfg.obstacle_margin;
    const double b = 0.5 * (ego.width + o.width) + cfg.obstacle_margin;
    cs.constraints.push_back(ellipse_obstacle<4, 2>(std::move(centers), a, b, npc.id));
    p.obstacles.push_back(&npc);
  }
  return p;
}

// Checks a planned trajectory against predicted NPC footprints, road edges and
// the obstacle/boundary constraint values.
inline std::string plan_verdict(const World& w, const LaneProblem& p, const PlanTrajectory& t,
                                const SolveDiagnostics& diag, const PlannerConfig& cfg) {
  if (!diag.converged) return "solver did not converge (" + diag.stop_reason + ")";
  const int n = t.horizon();
  for (int k = 0; k <= n; ++k) {
    const auto& s = t.states[static_cast<std::size_t>(k)];
    const Vec<2> u = k < n ? t.controls[static_cast<std::size_t>(k)] : Vec<2>::Zero();
    for (const auto& c : p.constraints.constraints) {
      if (c.kind != ConstraintKind::Obstacle && c.kind != ConstraintKind::Boundary) continue;
      if (c.eval(k, s, u).g >= 0.0) {
        return std::string(c.kind == ConstraintKind::Obstacle ? "obstacle" : "boundary") +
               " constraint active at step " + std::to_string(k);
      }
    }
    VehicleState pose = w.ego;
    pose.x = s[0];
    pose.y = s[1];
    pose.heading = s[3];
    if (leaves_road(pose, w.road())) return "footprint leaves road at step " + std::to_string(k);
    const auto ego_fp = footprint(pose, cfg.verdict_inflation);
    for (const Npc* npc : p.obstacles) {
      VehicleState o = npc->state;
      std::tie(o.x, o.y) = predict_center(npc->state, k * cfg.plan_dt);
      if (rectangles_overlap(ego_fp, footprint(o, cfg.verdict_inflation))) {
        return "footprint overlaps vehicle " + std::to_string(npc->id) + " at step " +
               std::to_string(k);
      }
    }
  }
  return {};
}

// Plans toward the lane centre `target_y` at the desired speed and reports
// whether the result is collision free. `warm_start` (controls only) is used
// when it yields a lower initial cost than the zero-control rollout.
inline LanePlan plan_lane_follow(const World& w, double target_y, const PlannerConfig& cfg,
                                 const std::vector<Vec<2>>* warm_start = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  const LaneProblem p = build_lane_problem(w, target_y, cfg);

  PlanTrajectory nominal(cfg.horizon);
  PlanTrajectory seeded = rollout(p.dynamics, p.s_init, nominal.controls);
  double best = augmented_cost(seeded, p.cost, p.constraints);
  if (warm_start && static_cast<int>(warm_start->size()) == cfg.horizon) {
    auto alt = rollout(p.dynamics, p.s_init, *warm_start);
    const double c = augmented_cost(alt, p.cost, p.constraints);
    if (alt.finite() && c < best) {
      seeded = std::move(alt);
      best = c;
    }
  }

  LanePlan plan;
  plan.target_y = target_y;
  try {
    auto res = solve(p.dynamics, p.cost, p.constraints, p.s_init, seeded, cfg.solver);
    plan.trajectory = std::move(res.trajectory);
    plan.diagnostics = std::move(res.diagnostics);
    plan.verdict = plan_verdict(w, p, plan.trajectory, plan.diagnostics, cfg);
    plan.feasible = plan.verdict.empty();
  } catch (const SolverError& e) {
    plan.trajectory = seeded;
    plan.verdict = e.what();
    plan.feasible = false;
  }
  plan.solve_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return plan;
}

}  // namespace overtake::cilqr
