#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "overtake/rng.hpp"
#include "overtake/sim/collision.hpp"
#include "overtake/sim/idm.hpp"
#include "overtake/sim/kinematics.hpp"
#include "overtake/sim/mobil.hpp"
#include "overtake/sim/scenario.hpp"
#include "overtake/sim/vehicle.hpp"

namespace overtake {

struct Npc {
  int id = 0;
  VehicleState state;
  DriverProfile profile;
  double target_y = 0.0;  // lateral target while changing lanes
};

struct World {
  ScenarioConfig config;
  VehicleState ego;
  std::vector<Npc> npcs;
  int step = 0;
  double ego_start_x = 0.0;

  const RoadSpec& road() const { return config.road; }
  int ego_lane() const { return road().lane_of(ego.y); }

  const Npc* find(int id) const {
    for (const auto& n : npcs) {
      if (n.id == id) return &n;
    }
    return nullptr;
  }

  bool operator==(const World& o) const {
    if (!(ego == o.ego) || step != o.step || npcs.size() != o.npcs.size()) return false;
    for (std::size_t i = 0; i < npcs.size(); ++i) {
      if (npcs[i].id != o.npcs[i].id || !(npcs[i].state == o.npcs[i].state) ||
          npcs[i].profile.name != o.npcs[i].profile.name) {
        return false;
      }
    }
    return true;
  }
};

inline VehicleState make_ego(const ScenarioConfig& cfg) {
  VehicleState ego;
  ego.x = cfg.ego.start_x;
  ego.direction = 1;
  ego.lane_id = std::max(0, cfg.road.lane_for_direction(1));
  ego.y = cfg.road.lane_center(ego.lane_id);
  ego.speed = cfg.ego.initial_speed;
  ego.length = cfg.ego.length;
  ego.width = cfg.ego.width;
  return ego;
}

inline Npc make_npc(int id, const DriverProfile& p, int lane, double x, const RoadSpec& road) {
  Npc n;
  n.id = id;
  n.profile = p;
  n.state.x = x;
  n.state.lane_id = lane;
  n.state.y = road.lane_center(lane);
  n.state.direction = road.lane_directions[static_cast<std::size_t>(lane)];
  n.state.heading = n.state.direction > 0 ? 0.0 : std::numbers::pi;
  n.state.speed = p.desired_speed;
  n.state.length = p.length;
  n.state.width = p.width;
  n.target_y = n.state.y;
  return n;
}

inline const DriverProfile& draw_profile(Rng& rng, const TrafficMixture& m) {
  const double total = m.timid + m.normal + m.aggressive + m.truck;
  const double u = rng.uniform() * total;
  if (u < m.normal) return profiles::normal();
  if (u < m.normal + m.timid) return profiles::timid();
  if (u < m.normal + m.timid + m.aggressive) return profiles::aggressive();
  return profiles::truck();
}

// Builds the initial world for a seed. Traffic scenarios place same-direction
// vehicles every `same_direction_spacing` metres ahead of the ego and
// oncoming vehicles every `opposing_spacing` metres, each jittered uniformly.
inline World spawn_traffic(std::uint64_t seed, const ScenarioConfig& cfg) {
  Rng rng(Rng::derive(seed, 0x5EED));
  World w;
  w.config = cfg;
  w.ego = make_ego(cfg);
  w.ego_start_x = w.ego.x;
  const RoadSpec& road = cfg.road;
  const int own_lane = w.ego.lane_id;
  const int opp_lane = road.lane_count > 1 ? 1 - own_lane : own_lane;
  int next_id = 1;
  auto jitter = [&](double amp) { return amp > 0.0 ? rng.uniform(-amp, amp) : 0.0; };

  switch (cfg.kind) {
    case ScenarioKind::Empty:
      break;
    case ScenarioKind::Traffic: {
      for (int lane = 0; lane < road.lane_count; ++lane) {
        const int dir = road.lane_directions[static_cast<std::size_t>(lane)];
        const bool same = dir == w.ego.direction;
        const double spacing = same ? cfg.same_direction_spacing : cfg.opposing_spacing;
        const double extent =
            road.road_length * (same ? cfg.same_direction_extent : cfg.opposing_extent);
        if (spacing <= 0.0) continue;
        for (double nominal = w.ego.x + spacing; nominal <= w.ego.x + extent;
             nominal += spacing) {
          const DriverProfile& p = draw_profile(rng, cfg.mixture);
          w.npcs.push_back(make_npc(next_id++, p, lane, nominal + jitter(cfg.spawn_noise), road));
        }
      }
      break;
    }
    case ScenarioKind::SlowLeader:
    case ScenarioKind::OvertakeAbort: {
      const double lead_x = w.ego.x + cfg.leader_gap + jitter(cfg.spawn_noise / 2);
      w.npcs.push_back(make_npc(next_id++, profiles::truck(), own_lane, lead_x, road));
      if (cfg.kind == ScenarioKind::OvertakeAbort) {
        const double onc_x = w.ego.x + cfg.oncoming_gap + jitter(cfg.spawn_noise / 2);
        w.npcs.push_back(make_npc(next_id++, profiles::normal(), opp_lane, onc_x, road));
      }
      break;
    }
    case ScenarioKind::Platoon:
      throw ValidationError("platoon worlds are built with make_platoon");
  }
  return w;
}

// Ten (or `count`) vehicles of one profile in a single lane, at rest, with
// bumper gaps of jam_distance + extra_gap. The ego is parked far behind the
// platoon so no NPC ever sees it as a leader.
inline World make_platoon(const DriverProfile& p, int count, double extra_gap,
                          const ScenarioConfig& base) {
  World w;
  w.config = base;
  w.config.kind = ScenarioKind::Platoon;
  w.ego = make_ego(base);
  w.ego.x = -1e6;
  w.ego.speed = 0.0;
  w.ego_start_x = w.ego.x;
  const int lane = w.ego.lane_id;
  double x = 0.0;
  for (int i = 0; i < count; ++i) {
    Npc n = make_npc(i + 1, p, lane, x, base.road);
    n.state.speed = 0.0;
    w.npcs.push_back(n);
    x -= p.length + p.jam_distance + extra_gap;
  }
  return w;
}

// Bumper gap along the travel direction from `follower` to `leader`, or
// nullopt when `leader` is not ahead.
inline std::optional<double> gap_ahead(const VehicleState& follower, const VehicleState& leader) {
  const double ahead = (leader.x - follower.x) * follower.direction;
  if (ahead <= 0.0) return std::nullopt;
  return ahead - 0.5 * (leader.length + follower.length);
}

struct LeaderInfo {
  double gap = kFreeRoad;
  double speed = 0.0;
};

// Nearest same-direction vehicle ahead of NPC `self` in `lane`; the ego counts
// when it travels the same way and occupies that lane.
inline LeaderInfo lane_leader(const World& w, std::size_t self, int lane) {
  const VehicleState& me = w.npcs[self].state;
  LeaderInfo best;
  auto consider = [&](const VehicleState& other) {
    if (other.direction != me.direction) return;
    if (auto g = gap_ahead(me, other); g && *g < best.gap) {
      best.gap = *g;
      best.speed = other.speed;
    }
  };
  for (std::size_t j = 0; j < w.npcs.size(); ++j) {
    if (j != self && w.npcs[j].state.lane_id == lane) consider(w.npcs[j].state);
  }
  if (w.ego_lane() == lane) consider(w.ego);
  return best;
}

inline double npc_acceleration(const World& w, std::size_t i) {
  const Npc& n = w.npcs[i];
  const LeaderInfo lead = lane_leader(w, i, n.state.lane_id);
  return idm_acceleration(n.state.speed, lead.gap, n.state.speed - lead.speed, n.profile,
                          w.config.idm);
}

// MOBIL context for NPC i moving into `target` lane.
inline std::pair<LaneContext, LaneContext> mobil_contexts(const World& w, std::size_t i,
                                                          int target) {
  const VehicleState& me = w.npcs[i].state;
  auto build = [&](int lane) {
    LaneContext ctx;
    for (std::size_t j = 0; j < w.npcs.size(); ++j) {
      if (j == i || w.npcs[j].state.lane_id != lane) continue;
      const VehicleState& o = w.npcs[j].state;
      if (o.direction != me.direction) continue;
      if (auto g = gap_ahead(me, o)) {
        if (!ctx.leader || *g < ctx.leader->gap) ctx.leader = Neighbor{*g, o.speed, nullptr};
      } else if (auto gb = gap_ahead(o, me)) {
        if (!ctx.follower || *gb < ctx.follower->gap) {
          ctx.follower = Neighbor{*gb, o.speed, &w.npcs[j].profile};
        }
      }
    }
    return ctx;
  };
  return {build(me.lane_id), build(target)};
}

inline void advance_npcs(World& w, double dt) {
  std::vector<double> accel(w.npcs.size());
  for (std::size_t i = 0; i < w.npcs.size(); ++i) accel[i] = npc_acceleration(w, i);

  const RoadSpec& road = w.road();
  const int mobil_every =
      std::max(1, static_cast<int>(std::lround(w.config.mobil_interval / dt)));
  std::vector<int> new_lane(w.npcs.size(), -1);
  if (w.step % mobil_every == 0 && road.lane_count == 2 &&
      road.lane_directions[0] == road.lane_directions[1]) {
    for (std::size_t i = 0; i < w.npcs.size(); ++i) {
      const Npc& n = w.npcs[i];
      if (std::abs(n.state.y - n.target_y) > 1e-9) continue;
      const int target = 1 - n.state.lane_id;
      const auto [cur, tgt] = mobil_contexts(w, i, target);
      if (mobil_decision(n.state.speed, cur, tgt, n.profile, n.state.length, w.config.idm)) {
        new_lane[i] = target;
      }
    }
  }

  for (std::size_t i = 0; i < w.npcs.size(); ++i) {
    Npc& n = w.npcs[i];
    VehicleState& s = n.state;
    s.speed = std::max(0.0, s.speed + accel[i] * dt);
    s.x += s.direction * s.speed * dt;
    if (new_lane[i] >= 0) {
      s.lane_id = new_lane[i];
      n.target_y = road.lane_center(s.lane_id);
    }
    const double dy = n.target_y - s.y;
    const double max_dy = w.config.npc_lateral_speed * dt;
    s.y += std::clamp(dy, -max_dy, max_dy);
  }
}

enum class CollisionKind { Vehicle, Boundary };

struct CollisionEvent {
  CollisionKind kind;
  int npc_id = 0;  // 0 for boundary events
};

inline std::vector<CollisionEvent> detect_collisions(const World& w) {
  std::vector<CollisionEvent> events;
  const auto ego_fp = footprint(w.ego);
  for (const auto& n : w.npcs) {
    if (std::abs(n.state.x - w.ego.x) > 0.5 * (n.state.length + w.ego.length) + 2.0 * w.ego.width)
      continue;
    if (rectangles_overlap(ego_fp, footprint(n.state))) {
      events.push_back({CollisionKind::Vehicle, n.id});
    }
  }
  if (leaves_road(w.ego, w.road())) events.push_back({CollisionKind::Boundary, 0});
  return events;
}

// Rear-end contacts between consecutive same-lane NPCs (platoon checks).
inline int count_npc_overlaps(const World& w) {
  int hits = 0;
  for (std::size_t i = 0; i < w.npcs.size(); ++i) {
    for (std::size_t j = i + 1; j < w.npcs.size(); ++j) {
      if (vehicles_collide(w.npcs[i].state, w.npcs[j].state)) ++hits;
    }
  }
  return hits;
}

}  // namespace overtake
