#pragma once

#include <algorithm>

#include "overtake/sim/vehicle.hpp"

namespace overtake {

struct RewardFlags {
  bool collision = false;  // vehicle or boundary
  bool destination = false;
};

// Per-step reward: collision indicator, speed term linear-clipped on
// [v_min, v_max], quadratic command penalties and the destination prize.
inline double compute_reward(const VehicleState& state, const Action& action,
                             const RewardFlags& flags, const RewardWeights& w,
                             const ActuatorLimits& lim = {}) {
  const double span = w.v_max - w.v_min;
  const double r_vel = span > 0.0 ? std::clamp((state.speed - w.v_min) / span, 0.0, 1.0) : 0.0;
  const double steer = w.normalized_commands ? action.steer / lim.max_steer : action.steer;
  const double accel = w.normalized_commands ? action.accel / lim.max_accel : action.accel;
  return w.collision * (flags.collision ? 1.0 : 0.0) + w.velocity * r_vel +
         w.steering * -(steer * steer) + w.acceleration * -(accel * accel) +
         w.prize * (flags.destination ? 1.0 : 0.0);
}

}  // namespace overtake
