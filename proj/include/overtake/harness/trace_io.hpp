#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "overtake/harness/config_io.hpp"
#include "overtake/sim/episode.hpp"

namespace overtake::harness {

inline const char* kTraceHeader = "step,x,y,speed,heading,accel,steer,reward,fsm_state,reason";

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Termination termination_from_string(const std::string& s) {
  for (auto t : {Termination::Running, Termination::VehicleCollision, Termination::BoundaryCollision,
                 Termination::Destination, Termination::Timeout}) {
    if (to_string(t) == s) return t;
  }
  throw ConfigError("unknown termination reason '" + s + "'");
}

// Wall-clock timings are not written, so traces of equal runs are identical.
inline void write_trace(std::ostream& out, const EpisodeTrace& t) {
  out << "# scenario=" << t.scenario << " seed=" << t.seed << " start_x=" << format_double(t.start_x)
      << " start_speed=" << format_double(t.start_speed) << " road_length=" << format_double(t.road_length)
      << '\n'
      << kTraceHeader << '\n';
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const TraceRow& r = t.rows[i];
    out << r.step << ',' << format_double(r.x) << ',' << format_double(r.y) << ','
        << format_double(r.speed) << ',' << format_double(r.heading) << ',' << format_double(r.accel) << ','
        << format_double(r.steer) << ',' << format_double(r.reward) << ',' << r.fsm_state << ',';
    if (i + 1 == t.rows.size()) out << to_string(r.reason);
    out << '\n';
  }
}

inline void write_trace(const std::filesystem::path& path, const EpisodeTrace& t) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trace " + path.string());
  write_trace(out, t);
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad number '" + s + "' in " + what);
  }
}

}  // namespace detail

inline EpisodeTrace read_trace(std::istream& in, const std::string& source = "trace") {
  EpisodeTrace t;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw ConfigError(source + ": missing metadata line");
  }
  for (const auto& field : detail::split(line.substr(2), ' ')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = field.substr(0, eq);
    const std::string val = field.substr(eq + 1);
    if (key == "scenario") t.scenario = val;
    else if (key == "seed") t.seed = std::stoull(val);
    else if (key == "start_x") t.start_x = detail::to_double(val, source);
    else if (key == "start_speed") t.start_speed = detail::to_double(val, source);
    else if (key == "road_length") t.road_length = detail::to_double(val, source);
  }
  if (!std::getline(in, line) || line != kTraceHeader) throw ConfigError(source + ": unexpected header");
  int lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    const std::string where = source + ":" + std::to_string(lineno);
    if (f.size() != 10) throw ConfigError(where + ": expected 10 columns");
    TraceRow r;
    r.step = static_cast<int>(detail::to_double(f[0], where));
    r.x = detail::to_double(f[1], where);
    r.y = detail::to_double(f[2], where);
    r.speed = detail::to_double(f[3], where);
    r.heading = detail::to_double(f[4], where);
    r.accel = detail::to_double(f[5], where);
    r.steer = detail::to_double(f[6], where);
    r.reward = detail::to_double(f[7], where);
    r.fsm_state = f[8];
    r.reason = f[9].empty() ? Termination::Running : termination_from_string(f[9]);
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline EpisodeTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file: " + path.string());
  return read_trace(in, path.string());
}

}  // namespace overtake::harness
