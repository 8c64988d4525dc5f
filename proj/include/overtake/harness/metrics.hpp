#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "overtake/harness/config_io.hpp"
#include "overtake/sim/episode.hpp"

namespace overtake::harness {

struct EpisodeMetrics {
  double episode_reward = 0.0;
  double mean_speed = 0.0;             // m/s
  double displacement = 0.0;           // m
  double mean_computation_time = 0.0;  // ms per action query
  double energy = 0.0;                 // mean |accel|
  double vehicle_collision = 0.0;      // 0 or 1
  double boundary_collision = 0.0;
};

// Names in summary output, in order.
inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> n{"episode_reward",         "speed",
                                          "displacement",           "computation_time_ms",
                                          "energy_consumption",     "vehicles_collision_rate",
                                          "boundaries_collision_rate"};
  return n;
}

// Displacement is capped at the road length: the step reaching the
// destination may overshoot it.
inline EpisodeMetrics compute_metrics(const EpisodeTrace& t) {
  if (!t.complete()) throw ConfigError("trace is truncated: no termination reason on the final row");
  EpisodeMetrics m;
  const double n = static_cast<double>(t.rows.size());
  for (const auto& r : t.rows) {
    m.episode_reward += r.reward;
    m.mean_speed += r.speed;
    m.energy += std::abs(r.accel);
    m.mean_computation_time += r.compute_ms;
  }
  m.mean_speed /= n;
  m.energy /= n;
  m.mean_computation_time /= n;
  m.displacement = std::min(t.rows.back().x - t.start_x, t.road_length);
  m.vehicle_collision = t.reason() == Termination::VehicleCollision ? 1.0 : 0.0;
  m.boundary_collision = t.reason() == Termination::BoundaryCollision ? 1.0 : 0.0;
  return m;
}

inline std::vector<double> as_vector(const EpisodeMetrics& m) {
  return {m.episode_reward, m.mean_speed,         m.displacement,
          m.mean_computation_time, m.energy, m.vehicle_collision, m.boundary_collision};
}

// Per-metric mean over episodes; collision means are rates.
inline EpisodeMetrics aggregate(const std::vector<EpisodeMetrics>& all) {
  if (all.empty()) throw ConfigError("no episodes to aggregate");
  EpisodeMetrics a;
  for (const auto& m : all) {
    a.episode_reward += m.episode_reward;
    a.mean_speed += m.mean_speed;
    a.displacement += m.displacement;
    a.mean_computation_time += m.mean_computation_time;
    a.energy += m.energy;
    a.vehicle_collision += m.vehicle_collision;
    a.boundary_collision += m.boundary_collision;
  }
  const double n = static_cast<double>(all.size());
  a.episode_reward /= n;
  a.mean_speed /= n;
  a.displacement /= n;
  a.mean_computation_time /= n;
  a.energy /= n;
  a.vehicle_collision /= n;
  a.boundary_collision /= n;
  return a;
}

}  // namespace overtake::harness
