#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "overtake/harness/config_io.hpp"
#include "overtake/rl/trainer.hpp"

namespace overtake::harness {

inline constexpr int kCheckpointVersion = 1;

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline Json to_json(const rl::MlpSpec& s) {
  return {{"sizes", s.sizes}, {"hidden", rl::to_string(s.hidden)}, {"squash", s.squash}};
}

inline rl::MlpSpec mlp_spec_from_json(const Json& j) {
  rl::MlpSpec s;
  s.sizes = j.at("sizes").get<std::vector<int>>();
  s.hidden = rl::activation_from_string(j.at("hidden").get<std::string>());
  s.squash = j.at("squash").get<bool>();
  s.validate();
  return s;
}

// Identifies the scenario and network layout a policy was trained for.
inline std::string config_hash(const ScenarioConfig& scenario, const rl::MlpSpec& actor, bool normalized) {
  Json j{{"scenario", to_json(scenario)}, {"actor", to_json(actor)}, {"normalized", normalized}};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

struct Checkpoint {
  ScenarioConfig scenario;
  rl::Mlp actor;
  std::optional<rl::RunningNormalizer> normalizer;
  bool guided = false;
  double q1 = 0.0;
  double q2 = 0.0;
  long steps = 0;
  std::uint64_t seed = 0;

  std::string hash() const { return config_hash(scenario, actor.spec(), normalizer.has_value()); }
};

inline Json to_json(const Checkpoint& c) {
  const rl::Vector p = c.actor.flatten();
  Json j;
  j["version"] = kCheckpointVersion;
  j["config_hash"] = c.hash();
  j["scenario"] = to_json(c.scenario);
  j["training"] = {{"guided", c.guided}, {"q1", c.q1}, {"q2", c.q2}, {"steps", c.steps}, {"seed", c.seed}};
  j["actor"] = {{"spec", to_json(c.actor.spec())}, {"parameters", std::vector<double>(p.data(), p.data() + p.size())}};
  if (c.normalizer) {
    const auto& n = *c.normalizer;
    j["normalizer"] = {{"count", n.count()},
                       {"mean", std::vector<double>(n.mean().data(), n.mean().data() + n.mean().size())},
                       {"m2", std::vector<double>(n.m2().data(), n.m2().data() + n.m2().size())},
                       {"passthrough", n.passthrough()},
                       {"clip", n.clip()},
                       {"eps", n.eps()}};
  } else {
    j["normalizer"] = nullptr;
  }
  return j;
}

inline Checkpoint checkpoint_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("version")) throw ConfigError("not a checkpoint file");
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw ConfigError("unsupported checkpoint version " + j.at("version").dump());
  }
  Checkpoint c;
  try {
    c.scenario = scenario_from_json(j.at("scenario"));
    const Json& t = j.at("training");
    c.guided = t.at("guided").get<bool>();
    c.q1 = t.at("q1").get<double>();
    c.q2 = t.at("q2").get<double>();
    c.steps = t.at("steps").get<long>();
    c.seed = t.at("seed").get<std::uint64_t>();
    c.actor = rl::Mlp(mlp_spec_from_json(j.at("actor").at("spec")));
    const auto params = j.at("actor").at("parameters").get<std::vector<double>>();
    c.actor.unflatten(Eigen::Map<const rl::Vector>(params.data(), static_cast<Eigen::Index>(params.size())));
    if (!j.at("normalizer").is_null()) {
      const Json& n = j.at("normalizer");
      const auto mean = n.at("mean").get<std::vector<double>>();
      const auto m2 = n.at("m2").get<std::vector<double>>();
      rl::RunningNormalizer norm;
      norm.restore(n.at("count").get<double>(),
                   Eigen::Map<const rl::Vector>(mean.data(), static_cast<Eigen::Index>(mean.size())),
                   Eigen::Map<const rl::Vector>(m2.data(), static_cast<Eigen::Index>(m2.size())),
                   n.at("passthrough").get<std::vector<bool>>(), n.at("clip").get<double>(),
                   n.at("eps").get<double>());
      c.normalizer = std::move(norm);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
  const std::string stored = j.at("config_hash").get<std::string>();
  if (stored != c.hash()) {
    throw ConfigError("checkpoint config hash " + stored + " does not match its contents (" + c.hash() + ")");
  }
  return c;
}

inline void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  out << to_json(c).dump(1) << '\n';
}

// Refuses a checkpoint trained for a different scenario or layout.
inline Checkpoint load_checkpoint(const std::filesystem::path& path, const ScenarioConfig& expected) {
  Checkpoint c = checkpoint_from_json(read_json_file(path));
  const std::string want = config_hash(expected, c.actor.spec(), c.normalizer.has_value());
  if (want != c.hash()) {
    throw ConfigError("checkpoint " + path.string() + " has config hash " + c.hash() +
                      " but the requested scenario hashes to " + want);
  }
  return c;
}

inline Checkpoint make_checkpoint(const rl::TrainResult& r, const ScenarioConfig& scenario, bool normalized,
                                  long steps, std::uint64_t seed) {
  Checkpoint c;
  c.scenario = scenario;
  c.actor = r.agent.actor;
  if (normalized) c.normalizer = r.normalizer;
  c.guided = r.guided;
  c.q1 = r.q1;
  c.q2 = r.q2;
  c.steps = steps;
  c.seed = seed;
  return c;
}

}  // namespace overtake::harness
