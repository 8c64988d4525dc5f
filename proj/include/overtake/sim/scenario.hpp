#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "overtake/sim/idm.hpp"
#include "overtake/sim/vehicle.hpp"

namespace overtake {

enum class ScenarioKind { Traffic, Empty, SlowLeader, OvertakeAbort, Platoon };

inline std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Traffic: return "traffic";
    case ScenarioKind::Empty: return "empty";
    case ScenarioKind::SlowLeader: return "slow_leader";
    case ScenarioKind::OvertakeAbort: return "overtake_abort";
    case ScenarioKind::Platoon: return "platoon";
  }
  return "traffic";
}

inline ScenarioKind scenario_kind_from_string(std::string_view s) {
  for (auto k : {ScenarioKind::Traffic, ScenarioKind::Empty, ScenarioKind::SlowLeader,
                 ScenarioKind::OvertakeAbort, ScenarioKind::Platoon}) {
    if (to_string(k) == s) return k;
  }
  throw ValidationError("unknown scenario kind: " + std::string(s));
}

// Fractions of timid / normal / aggressive / truck drivers.
struct TrafficMixture {
  double timid = 0.2;
  double normal = 0.6;
  double aggressive = 0.1;
  double truck = 0.1;
};

struct EgoSpec {
  double initial_speed = 45.0;
  double start_x = 0.0;
  double length = 5.0;
  double width = 2.0;
};

// Everything that determines a world up to the seed.
struct ScenarioConfig {
  std::string name = "canonical";
  ScenarioKind kind = ScenarioKind::Traffic;
  RoadSpec road;
  TrafficMixture mixture;
  double same_direction_spacing = 80.0;
  double opposing_spacing = 180.0;
  double spawn_noise = 10.0;  // uniform +- amplitude on nominal positions (m)
  // Spawn extents as multiples of road length. Oncoming traffic is spawned
  // beyond the road end so the opposite lane stays populated during an episode.
  double same_direction_extent = 1.0;
  double opposing_extent = 2.0;
  EgoSpec ego;
  ActuatorLimits limits;
  IdmLimits idm;
  RewardWeights reward;
  int observation_rows = 7;
  double dt = 0.01;
  int max_steps = 5000;
  // Seconds between MOBIL evaluations for NPCs that have a same-direction
  // neighbour lane.
  double mobil_interval = 1.0;
  double npc_lateral_speed = 2.0;
  // Scripted scenarios: initial distance to the slow leader and to the
  // oncoming vehicle (both jittered by spawn_noise / 2).
  double leader_gap = 80.0;
  double oncoming_gap = 420.0;
};

namespace presets {

inline ScenarioConfig canonical() { return ScenarioConfig{}; }

// Desk-scale training scenario: short road, half the traffic density,
// 2000-step cap.
inline ScenarioConfig reduced() {
  ScenarioConfig c;
  c.name = "reduced";
  c.road.road_length = 400.0;
  c.same_direction_spacing = 160.0;
  c.opposing_spacing = 360.0;
  c.max_steps = 2000;
  return c;
}

inline ScenarioConfig empty_road() {
  ScenarioConfig c;
  c.name = "empty_road";
  c.kind = ScenarioKind::Empty;
  return c;
}

inline ScenarioConfig slow_leader() {
  ScenarioConfig c;
  c.name = "slow_leader";
  c.kind = ScenarioKind::SlowLeader;
  return c;
}

inline ScenarioConfig overtake_abort() {
  ScenarioConfig c;
  c.name = "overtake_abort";
  c.kind = ScenarioKind::OvertakeAbort;
  return c;
}

}  // namespace presets

}  // namespace overtake
