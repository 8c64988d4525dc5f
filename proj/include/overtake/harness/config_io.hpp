#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "overtake/sim/scenario.hpp"

namespace overtake::harness {

using Json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Json to_json(const ScenarioConfig& c) {
  Json j;
  j["name"] = c.name;
  j["kind"] = std::string(to_string(c.kind));
  j["road"] = {{"road_length", c.road.road_length},
               {"lane_width", c.road.lane_width},
               {"lane_count", c.road.lane_count},
               {"lane_directions", {c.road.lane_directions[0], c.road.lane_directions[1]}}};
  j["mixture"] = {{"timid", c.mixture.timid},
                  {"normal", c.mixture.normal},
                  {"aggressive", c.mixture.aggressive},
                  {"truck", c.mixture.truck}};
  j["same_direction_spacing"] = c.same_direction_spacing;
  j["opposing_spacing"] = c.opposing_spacing;
  j["spawn_noise"] = c.spawn_noise;
  j["same_direction_extent"] = c.same_direction_extent;
  j["opposing_extent"] = c.opposing_extent;
  j["ego"] = {{"initial_speed", c.ego.initial_speed},
              {"start_x", c.ego.start_x},
              {"length", c.ego.length},
              {"width", c.ego.width}};
  j["limits"] = {{"max_accel", c.limits.max_accel},
                 {"max_steer", c.limits.max_steer},
                 {"max_speed", c.limits.max_speed}};
  j["idm"] = {{"hard_decel", c.idm.hard_decel}, {"exponent", c.idm.exponent}};
  j["reward"] = {{"collision", c.reward.collision}, {"velocity", c.reward.velocity},
                 {"steering", c.reward.steering},   {"acceleration", c.reward.acceleration},
                 {"prize", c.reward.prize},         {"v_min", c.reward.v_min},
                 {"v_max", c.reward.v_max},         {"normalized_commands", c.reward.normalized_commands}};
  j["observation_rows"] = c.observation_rows;
  j["dt"] = c.dt;
  j["max_steps"] = c.max_steps;
  j["mobil_interval"] = c.mobil_interval;
  j["npc_lateral_speed"] = c.npc_lateral_speed;
  j["leader_gap"] = c.leader_gap;
  j["oncoming_gap"] = c.oncoming_gap;
  return j;
}

namespace detail {

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

inline void reject_unknown(const Json& j, const std::vector<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : known) ok = ok || k == it.key();
    if (!ok) throw ConfigError("unknown config key '" + where + it.key() + "'");
  }
}

}  // namespace detail

// Missing keys keep the value of `base`; unknown keys are rejected.
inline ScenarioConfig scenario_from_json(const Json& j, ScenarioConfig c = {}) {
  using detail::read;
  if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
  detail::reject_unknown(j,
                         {"name", "kind", "road", "mixture", "same_direction_spacing", "opposing_spacing",
                          "spawn_noise", "same_direction_extent", "opposing_extent", "ego", "limits", "idm",
                          "reward", "observation_rows", "dt", "max_steps", "mobil_interval",
                          "npc_lateral_speed", "leader_gap", "oncoming_gap"},
                         "");
  read(j, "name", c.name);
  if (j.contains("kind")) {
    try {
      c.kind = scenario_kind_from_string(j.at("kind").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("road")) {
    const Json& r = j.at("road");
    detail::reject_unknown(r, {"road_length", "lane_width", "lane_count", "lane_directions"}, "road.");
    read(r, "road_length", c.road.road_length);
    read(r, "lane_width", c.road.lane_width);
    read(r, "lane_count", c.road.lane_count);
    if (r.contains("lane_directions")) {
      const auto d = r.at("lane_directions").get<std::vector<int>>();
      if (d.size() != 2) throw ConfigError("road.lane_directions needs two entries");
      c.road.lane_directions = {d[0], d[1]};
    }
  }
  if (j.contains("mixture")) {
    const Json& m = j.at("mixture");
    detail::reject_unknown(m, {"timid", "normal", "aggressive", "truck"}, "mixture.");
    read(m, "timid", c.mixture.timid);
    read(m, "normal", c.mixture.normal);
    read(m, "aggressive", c.mixture.aggressive);
    read(m, "truck", c.mixture.truck);
  }
  read(j, "same_direction_spacing", c.same_direction_spacing);
  read(j, "opposing_spacing", c.opposing_spacing);
  read(j, "spawn_noise", c.spawn_noise);
  read(j, "same_direction_extent", c.same_direction_extent);
  read(j, "opposing_extent", c.opposing_extent);
  if (j.contains("ego")) {
    const Json& e = j.at("ego");
    detail::reject_unknown(e, {"initial_speed", "start_x", "length", "width"}, "ego.");
    read(e, "initial_speed", c.ego.initial_speed);
    read(e, "start_x", c.ego.start_x);
    read(e, "length", c.ego.length);
    read(e, "width", c.ego.width);
  }
  if (j.contains("limits")) {
    const Json& l = j.at("limits");
    detail::reject_unknown(l, {"max_accel", "max_steer", "max_speed"}, "limits.");
    read(l, "max_accel", c.limits.max_accel);
    read(l, "max_steer", c.limits.max_steer);
    read(l, "max_speed", c.limits.max_speed);
  }
  if (j.contains("idm")) {
    const Json& i = j.at("idm");
    detail::reject_unknown(i, {"hard_decel", "exponent"}, "idm.");
    read(i, "hard_decel", c.idm.hard_decel);
    read(i, "exponent", c.idm.exponent);
  }
  if (j.contains("reward")) {
    const Json& r = j.at("reward");
    detail::reject_unknown(r, {"collision", "velocity", "steering", "acceleration", "prize", "v_min", "v_max",
                            "normalized_commands"},
                           "reward.");
    read(r, "collision", c.reward.collision);
    read(r, "velocity", c.reward.velocity);
    read(r, "steering", c.reward.steering);
    read(r, "acceleration", c.reward.acceleration);
    read(r, "prize", c.reward.prize);
    read(r, "v_min", c.reward.v_min);
    read(r, "v_max", c.reward.v_max);
    read(r, "normalized_commands", c.reward.normalized_commands);
  }
  read(j, "observation_rows", c.observation_rows);
  read(j, "dt", c.dt);
  read(j, "max_steps", c.max_steps);
  read(j, "mobil_interval", c.mobil_interval);
  read(j, "npc_lateral_speed", c.npc_lateral_speed);
  read(j, "leader_gap", c.leader_gap);
  read(j, "oncoming_gap", c.oncoming_gap);
  return c;
}

inline void validate(const ScenarioConfig& c) {
  if (!(c.road.road_length > 0.0) || !(c.road.lane_width > 0.0)) {
    throw ConfigError("road length and lane width must be > 0");
  }
  if (c.road.lane_count < 1 || c.road.lane_count > 2) throw ConfigError("lane_count must be 1 or 2");
  for (int d : c.road.lane_directions) {
    if (d != 1 && d != -1) throw ConfigError("lane directions must be +1 or -1");
  }
  const auto& m = c.mixture;
  if (m.timid < 0 || m.normal < 0 || m.aggressive < 0 || m.truck < 0 ||
      !(m.timid + m.normal + m.aggressive + m.truck > 0.0)) {
    throw ConfigError("traffic mixture fractions must be >= 0 with a positive sum");
  }
  if (!(c.same_direction_spacing > 0.0) || !(c.opposing_spacing > 0.0) || c.spawn_noise < 0.0) {
    throw ConfigError("spawn spacings must be > 0 and noise >= 0");
  }
  if (c.observation_rows < 1) throw ConfigError("observation_rows must be >= 1");
  if (!(c.dt > 0.0) || c.max_steps < 1) throw ConfigError("dt must be > 0 and max_steps >= 1");
  if (!(c.limits.max_accel > 0.0) || !(c.limits.max_steer > 0.0)) {
    throw ConfigError("actuator limits must be > 0");
  }
}

inline std::vector<std::string> preset_names() {
  return {"canonical", "reduced", "empty_road", "slow_leader", "overtake_abort"};
}

inline bool is_preset(const std::string& name) {
  for (const auto& n : preset_names()) {
    if (n == name) return true;
  }
  return false;
}

inline ScenarioConfig preset(const std::string& name) {
  if (name == "canonical") return presets::canonical();
  if (name == "reduced") return presets::reduced();
  if (name == "empty_road") return presets::empty_road();
  if (name == "slow_leader") return presets::slow_leader();
  if (name == "overtake_abort") return presets::overtake_abort();
  throw ConfigError("unknown preset '" + name + "'");
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
}

// A preset name, or a JSON file whose keys override the canonical preset (or
// the preset named by an optional "base" key).
inline ScenarioConfig load_scenario(const std::string& spec) {
  ScenarioConfig c;
  if (is_preset(spec)) {
    c = preset(spec);
  } else {
    Json j = read_json_file(spec);
    ScenarioConfig base = presets::canonical();
    if (j.is_object() && j.contains("base")) {
      base = preset(j.at("base").get<std::string>());
      j.erase("base");
    }
    c = scenario_from_json(j, base);
  }
  validate(c);
  return c;
}

inline void save_scenario(const ScenarioConfig& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << to_json(c).dump(2) << '\n';
}

}  // namespace overtake::harness
