#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "overtake/cilqr/lane_planner.hpp"
#include "overtake/expert/fsm.hpp"
#include "overtake/expert/pid.hpp"
#include "overtake/sim/episode.hpp"

namespace overtake {

struct ExpertConfig {
  cilqr::PlannerConfig planner;
  int replan_every = 10;  // simulator steps between CiLQR solves
  // Start an overtake when a slower own-lane leader is this close (bumper gap).
  double overtake_trigger_gap = 90.0;
  double overtake_speed_margin = 1.0;
  // Lateral steering gains at `steer_reference_speed`; scaled by (v_ref / v)^2
  // since the lateral response to steering grows with v^2.
  PidGains steer{0.01, 0.001, 0.012, 2.0};
  double steer_reference_speed = 45.0;
  PidGains gap_accel{0.5, 0.0, 0.3, 10.0};
  double cruise_gain = 0.5;  // P gain toward desired speed when no gap control
  double dmb_accel = -3.0;
  double amb_accel = 3.0;
  double lane_free_factor = 2.0;  // lane free: no NPC within +-factor * ego length
  DriverProfile follow_profile = profiles::normal();
  bool record_solves = false;
};

struct SolveRecord {
  int step = 0;
  double target_y = 0.0;
  bool feasible = false;
  std::string verdict;
  cilqr::SolveDiagnostics diagnostics;
  double solve_ms = 0.0;
};

// Guidance system: FSM over RLF (CiLQR plan) and the PID auxiliaries.
class ExpertDriver final : public Policy {
 public:
  explicit ExpertDriver(ExpertConfig cfg = {}) : cfg_(std::move(cfg)) {}

  void reset(const World&) override {
    mode_ = GuidanceMode::RLF;
    overtaking_ = false;
    leader_id_.reset();
    plan_.reset();
    plan_step_ = 0;
    steer_pid_ = cfg_.steer;
    accel_pid_ = cfg_.gap_accel;
    steer_pid_.reset();
    accel_pid_.reset();
    steer_target_.reset();
    solves_.clear();
  }

  Action act(const World& w, const Observation&) override { return expert_policy(w); }

  std::string mode_label() const override { return std::string(to_string(mode_)); }

  Action expert_policy(const World& w) {
    if (!plan_ || w.step - plan_step_ >= cfg_.replan_every) replan(w);
    const ExpertContext ctx = context(w);
    const GuidanceMode next = evaluate_transition(ctx);
    if (next != mode_) {
      steer_pid_.reset();
      accel_pid_.reset();
      steer_target_.reset();
      mode_ = next;
    }
    return clamp_action(reference_action(w, ctx, mode_), w.config.limits);
  }

  GuidanceMode mode() const { return mode_; }
  bool overtaking() const { return overtaking_; }
  const std::optional<cilqr::LanePlan>& plan() const { return plan_; }
  const std::vector<SolveRecord>& solve_records() const { return solves_; }
  const ExpertConfig& config() const { return cfg_; }

  ExpertContext context(const World& w) const {
    ExpertContext c;
    c.plan_feasible = plan_ && plan_->feasible;
    c.on_opposite_lane = w.road().lane_of(w.ego.y) != own_lane(w);
    c.leader = leader(w);
    c.crossed = centre_crossed(w.ego, c.leader);
    return c;
  }

  // Unclamped command of `mode`. PID state is shared across calls, so callers
  // outside expert_policy should stay in one mode per instance.
  Action reference_action(const World& w, const ExpertContext& ctx, GuidanceMode mode) {
    const VehicleState& ego = w.ego;
    const double dt = w.config.dt;
    const double own_y = w.road().lane_center(own_lane(w));
    const double opp_y = w.road().lane_center(opposite_lane(w));
    Action a;
    switch (mode) {
      case GuidanceMode::RLF: {
        if (!plan_) replan(w);
        const auto& u = plan_->trajectory.controls;
        const double elapsed = (w.step - plan_step_) * dt;
        const auto idx = std::min<std::size_t>(
            static_cast<std::size_t>(std::floor(elapsed / cfg_.planner.plan_dt + 1e-9)),
            u.size() - 1);
        a = {u[idx][0], u[idx][1]};
        break;
      }
      case GuidanceMode::FLV:
        a.accel = follow_accel(ego, ctx.leader, dt);
        a.steer = steer_to(own_y, ego, dt);
        break;
      case GuidanceMode::DMB: {
        if (can_merge_behind(w, ctx.leader)) {
          a.accel = follow_accel(ego, ctx.leader, dt);
          a.steer = steer_to(own_y, ego, dt);
        } else {
          a.accel = cfg_.dmb_accel;
          a.steer = steer_to(opp_y, ego, dt);
        }
        break;
      }
      case GuidanceMode::AMB: {
        if (overtaken(ego, ctx.leader) && lane_free(w, own_lane(w))) {
          a.accel = cruise_accel(ego);
          a.steer = steer_to(own_y, ego, dt);
        } else {
          a.accel = cfg_.amb_accel;
          a.steer = steer_to(opp_y, ego, dt);
        }
        break;
      }
    }
    return a;
  }

 private:
  int own_lane(const World& w) const { return std::max(0, w.road().lane_for_direction(w.ego.direction)); }
  int opposite_lane(const World& w) const {
    return w.road().lane_count > 1 ? 1 - own_lane(w) : own_lane(w);
  }

  // The vehicle being overtaken, or the nearest own-lane vehicle ahead.
  std::optional<LeaderRef> leader(const World& w) const {
    if (leader_id_) {
      if (const Npc* n = w.find(*leader_id_)) return LeaderRef{n->id, n->state};
    }
    const int lane = own_lane(w);
    std::optional<LeaderRef> best;
    for (const auto& n : w.npcs) {
      if (n.state.lane_id != lane || n.state.direction != w.ego.direction) continue;
      const double ahead = (n.state.x - w.ego.x) * w.ego.direction;
      if (ahead > 0.0 && (!best || ahead < (best->state.x - w.ego.x) * w.ego.direction)) {
        best = LeaderRef{n.id, n.state};
      }
    }
    return best;
  }

  static bool overtaken(const VehicleState& ego, const std::optional<LeaderRef>& lead) {
    return !lead || ego.x - ego.length / 2 > lead->state.x + lead->state.length / 2;
  }

  bool lane_free(const World& w, int lane) const {
    const double reach = cfg_.lane_free_factor * w.ego.length;
    for (const auto& n : w.npcs) {
      if (n.state.lane_id == lane && std::abs(n.state.x - w.ego.x) < reach) return false;
    }
    return true;
  }

  // Leader fully ahead, nothing else alongside in the own lane, and enough room
  // behind the leader to shed the closing speed at full braking.
  bool can_merge_behind(const World& w, const std::optional<LeaderRef>& lead) const {
    const VehicleState& ego = w.ego;
    const int lane = own_lane(w);
    const double reach = cfg_.lane_free_factor * ego.length;
    for (const auto& n : w.npcs) {
      if (lead && n.id == lead->id) continue;
      if (n.state.lane_id == lane && std::abs(n.state.x - ego.x) < reach) return false;
    }
    if (!lead) return true;
    const double gap = (lead->state.x - ego.x) * ego.direction -
                       0.5 * (lead->state.length + ego.length);
    if (gap <= 0.0) return false;
    const double closing = std::max(0.0, ego.speed - lead->state.speed);
    return gap >= cfg_.follow_profile.jam_distance +
                      closing * closing / (2.0 * w.config.limits.max_accel);
  }

  void update_overtake(const World& w) {
    const VehicleState& ego = w.ego;
    if (leader_id_ && !w.find(*leader_id_)) {
      overtaking_ = false;
      leader_id_.reset();
    }
    const double own_y = w.road().lane_center(own_lane(w));
    if (overtaking_) {
      const auto lead = leader(w);
      if (overtaken(ego, lead) && std::abs(ego.y - own_y) < 0.5) {
        overtaking_ = false;
        leader_id_.reset();
      }
      return;
    }
    const auto lead = leader(w);
    if (!lead) return;
    const double gap = (lead->state.x - ego.x) * ego.direction -
                       0.5 * (lead->state.length + ego.length);
    if (gap < cfg_.overtake_trigger_gap &&
        lead->state.speed < cfg_.planner.desired_speed - cfg_.overtake_speed_margin) {
      overtaking_ = true;
      leader_id_ = lead->id;
    }
  }

  void replan(const World& w) {
    update_overtake(w);
    const int own = own_lane(w);
    double target = w.road().lane_center(own);
    if (overtaking_) {
      const auto lead = leader(w);
      if (!(overtaken(w.ego, lead) && lane_free(w, own))) {
        target = w.road().lane_center(opposite_lane(w));
      }
    }

    std::vector<cilqr::Vec<2>> warm;
    const std::vector<cilqr::Vec<2>>* warm_ptr = nullptr;
    if (plan_ && plan_->target_y == target) {
      const auto& prev = plan_->trajectory.controls;
      const int shift = static_cast<int>(
          std::lround((w.step - plan_step_) * w.config.dt / cfg_.planner.plan_dt));
      for (std::size_t k = 0; k < prev.size(); ++k) {
        warm.push_back(prev[std::min(prev.size() - 1, k + static_cast<std::size_t>(shift))]);
      }
      warm_ptr = &warm;
    }
    plan_ = cilqr::plan_lane_follow(w, target, cfg_.planner, warm_ptr);
    const double own_y = w.road().lane_center(own);
    if (!plan_->feasible && target != own_y) {
      // Overtake blocked: a feasible plan back into the own lane takes over.
      auto back = cilqr::plan_lane_follow(w, own_y, cfg_.planner, nullptr);
      if (back.feasible) plan_ = std::move(back);
    }
    plan_step_ = w.step;
    if (cfg_.record_solves) {
      solves_.push_back(SolveRecord{w.step, plan_->target_y, plan_->feasible, plan_->verdict,
                                    plan_->diagnostics, plan_->solve_ms});
    }
  }

  double steer_to(double target_y, const VehicleState& ego, double dt) {
    if (!steer_target_ || *steer_target_ != target_y) {
      steer_pid_.reset();
      steer_target_ = target_y;
    }
    const double r = cfg_.steer_reference_speed / std::max(ego.speed, 5.0);
    return r * r * pid_step(steer_pid_, target_y - ego.y, dt);
  }

  double cruise_accel(const VehicleState& ego) const {
    return cfg_.cruise_gain * (cfg_.planner.desired_speed - ego.speed);
  }

  // Gap PID toward jam + headway * speed, never faster than cruise.
  double follow_accel(const VehicleState& ego, const std::optional<LeaderRef>& lead, double dt) {
    if (!lead) return cruise_accel(ego);
    const double gap = (lead->state.x - ego.x) * ego.direction -
                       0.5 * (lead->state.length + ego.length);
    const double desired =
        cfg_.follow_profile.jam_distance + cfg_.follow_profile.desired_time_headway * ego.speed;
    return std::min(pid_step(accel_pid_, gap - desired, dt), cruise_accel(ego));
  }

  ExpertConfig cfg_;
  GuidanceMode mode_ = GuidanceMode::RLF;
  bool overtaking_ = false;
  std::optional<int> leader_id_;
  std::optional<cilqr::LanePlan> plan_;
  int plan_step_ = 0;
  PidGains steer_pid_;
  PidGains accel_pid_;
  std::optional<double> steer_target_;
  std::vector<SolveRecord> solves_;
};

}  // namespace overtake
