#pragma once

#include <optional>

#include "overtake/sim/idm.hpp"

namespace overtake {

// A neighbouring vehicle seen from the deciding vehicle's position.
struct Neighbor {
  double gap = kFreeRoad;  // bumper-to-bumper distance to the deciding vehicle
  double speed = 0.0;
  const DriverProfile* profile = nullptr;  // required for followers
};

// Leader and follower of one lane, plus what the follower's own leader is
// when the deciding vehicle is not between them.
struct LaneContext {
  std::optional<Neighbor> leader;
  std::optional<Neighbor> follower;
};

struct MobilResult {
  bool change = false;
  bool safe = false;
  double incentive = 0.0;
};

// Lane-change decision of a vehicle with the given speed and profile.
inline MobilResult mobil_evaluate(double speed, const LaneContext& current,
                                  const LaneContext& target, const DriverProfile& p,
                                  double own_length, const IdmLimits& lim = {}) {
  auto accel_behind = [&](double v, const std::optional<Neighbor>& lead,
                          const DriverProfile& prof) {
    if (!lead) return idm_acceleration(v, kFreeRoad, 0.0, prof, lim);
    return idm_acceleration(v, lead->gap, v - lead->speed, prof, lim);
  };

  const double own_now = accel_behind(speed, current.leader, p);
  const double own_after = accel_behind(speed, target.leader, p);

  // New follower: before the change it follows the target lane leader; after,
  // it follows us.
  double new_follower_gain = 0.0;
  double new_follower_after = 0.0;
  bool safe = true;
  if (target.follower) {
    const Neighbor& f = *target.follower;
    std::optional<Neighbor> f_lead_before;
    if (target.leader) {
      f_lead_before = Neighbor{f.gap + own_length + target.leader->gap, target.leader->speed};
    }
    const double before = accel_behind(f.speed, f_lead_before, *f.profile);
    new_follower_after = accel_behind(f.speed, Neighbor{f.gap, speed}, *f.profile);
    new_follower_gain = new_follower_after - before;
    safe = new_follower_after >= -p.safe_braking;
  }

  // Old follower: before it follows us; after, it follows our current leader.
  double old_follower_gain = 0.0;
  if (current.follower) {
    const Neighbor& f = *current.follower;
    const double before = accel_behind(f.speed, Neighbor{f.gap, speed}, *f.profile);
    std::optional<Neighbor> f_lead_after;
    if (current.leader) {
      f_lead_after = Neighbor{f.gap + own_length + current.leader->gap, current.leader->speed};
    }
    old_follower_gain = accel_behind(f.speed, f_lead_after, *f.profile) - before;
  }

  MobilResult r;
  r.safe = safe;
  r.incentive = own_after - own_now + p.politeness * (new_follower_gain + old_follower_gain);
  r.change = safe && r.incentive > p.accel_threshold;
  return r;
}

inline bool mobil_decision(double speed, const LaneContext& current, const LaneContext& target,
                           const DriverProfile& p, double own_length,
                           const IdmLimits& lim = {}) {
  return mobil_evaluate(speed, current, target, p, own_length, lim).change;
}

}  // namespace overtake
