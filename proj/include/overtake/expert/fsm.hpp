#pragma once

#include <optional>
#include <string_view>

#include "overtake/sim/vehicle.hpp"

namespace overtake {

// RLF: responsive lane follow (CiLQR), FLV: follow leading vehicle,
// DMB: decelerate and merge back, AMB: accelerate and merge back.
enum class GuidanceMode { RLF, FLV, DMB, AMB };

inline std::string_view to_string(GuidanceMode m) {
  switch (m) {
    case GuidanceMode::RLF: return "RLF";
    case GuidanceMode::FLV: return "FLV";
    case GuidanceMode::DMB: return "DMB";
    case GuidanceMode::AMB: return "AMB";
  }
  return "RLF";
}

struct LeaderRef {
  int id = 0;
  VehicleState state;
};

struct ExpertContext {
  bool plan_feasible = false;
  bool on_opposite_lane = false;
  std::optional<LeaderRef> leader;
  // Ego centre longitudinally beyond the leader centre. With no leader the ego
  // counts as having crossed.
  bool crossed = false;
};

inline bool centre_crossed(const VehicleState& ego, const std::optional<LeaderRef>& leader) {
  return !leader || (ego.x - leader->state.x) * ego.direction > 0.0;
}

inline GuidanceMode evaluate_transition(const ExpertContext& c) {
  if (c.plan_feasible) return GuidanceMode::RLF;
  if (!c.on_opposite_lane) return GuidanceMode::FLV;
  if (!c.crossed) return GuidanceMode::DMB;
  return GuidanceMode::AMB;
}

}  // namespace overtake
