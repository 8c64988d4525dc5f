#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "overtake/sim/vehicle.hpp"

namespace overtake {

inline constexpr double kFreeRoad = std::numeric_limits<double>::infinity();

struct IdmLimits {
  double hard_decel = -9.0;  // braking floor, m/s^2
  double exponent = 4.0;
};

// Desired dynamic gap s* of the IDM. The dynamic part is floored at zero so a
// faster leader never produces a negative desired gap.
inline double idm_desired_gap(double speed, double closing_speed, const DriverProfile& p) {
  const double interaction =
      speed * closing_speed / (2.0 * std::sqrt(p.max_accel * std::abs(p.desired_decel)));
  return p.jam_distance + std::max(0.0, speed * p.desired_time_headway + interaction);
}

// Intelligent Driver Model acceleration. `gap` is bumper-to-bumper distance to
// the leader (kFreeRoad when none), `closing_speed` is own speed minus leader
// speed.
inline double idm_acceleration(double speed, double gap, double closing_speed,
                               const DriverProfile& p, const IdmLimits& lim = {}) {
  double free_term = 0.0;
  if (p.desired_speed > 0.0) {
    free_term = std::pow(std::max(speed, 0.0) / p.desired_speed, lim.exponent);
  } else if (speed > 0.0) {
    return lim.hard_decel;
  }
  double interaction = 0.0;
  if (std::isfinite(gap)) {
    if (gap <= 0.0) return lim.hard_decel;
    const double ratio = idm_desired_gap(speed, closing_speed, p) / gap;
    interaction = ratio * ratio;
  }
  const double a = p.max_accel * (1.0 - free_term - interaction);
  return std::clamp(a, lim.hard_decel, p.max_accel);
}

}  // namespace overtake
