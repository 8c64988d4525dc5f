#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace overtake {

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VehicleState {
  double x = 0.0;        // longitudinal position (m)
  double y = 0.0;        // lateral position (m)
  double speed = 0.0;    // m/s
  double heading = 0.0;  // yaw, global frame (rad)
  double length = 5.0;
  double width = 2.0;
  int lane_id = 0;
  int direction = 1;  // +1 or -1

  double vx() const { return speed * std::cos(heading); }
  double vy() const { return speed * std::sin(heading); }

  bool operator==(const VehicleState&) const = default;
};

inline void validate(const VehicleState& s) {
  if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.speed) ||
      !std::isfinite(s.heading) || !std::isfinite(s.length) ||
      !std::isfinite(s.width)) {
    throw ValidationError("vehicle state has non-finite fields");
  }
  if (s.length <= 0.0 || s.width <= 0.0) {
    throw ValidationError("vehicle dimensions must be positive");
  }
  if (s.direction != 1 && s.direction != -1) {
    throw ValidationError("vehicle direction must be +1 or -1");
  }
  if (s.lane_id != 0 && s.lane_id != 1) {
    throw ValidationError("lane_id must be 0 or 1");
  }
}

struct ActuatorLimits {
  double max_accel = 5.5;  // m/s^2
  double max_steer = 1.0;  // rad
  double max_speed = 60.0;
};

struct Action {
  double accel = 0.0;
  double steer = 0.0;

  bool operator==(const Action&) const = default;
};

inline Action clamp_action(Action a, const ActuatorLimits& lim = {}) {
  a.accel = std::clamp(a.accel, -lim.max_accel, lim.max_accel);
  a.steer = std::clamp(a.steer, -lim.max_steer, lim.max_steer);
  return a;
}

inline bool is_finite(const Action& a) {
  return std::isfinite(a.accel) && std::isfinite(a.steer);
}

// IDM/MOBIL parameters for one class of driver.
struct DriverProfile {
  std::string name;
  double desired_speed;         // m/s
  double desired_time_headway;  // s
  double jam_distance;          // m
  double max_accel;             // m/s^2
  double desired_decel;         // m/s^2, negative
  double politeness;
  double safe_braking;     // m/s^2
  double accel_threshold;  // m/s^2
  double length;
  double width;
};

namespace profiles {

inline const DriverProfile& timid() {
  static const DriverProfile p{"timid", 27.8, 2.0, 4.0, 0.8, -1.0, 1.0, 1.0, 0.2, 5.0, 2.0};
  return p;
}
inline const DriverProfile& normal() {
  static const DriverProfile p{"normal", 33.3, 1.5, 2.0, 1.4, -2.0, 0.5, 2.0, 0.1, 5.0, 2.0};
  return p;
}
inline const DriverProfile& aggressive() {
  static const DriverProfile p{"aggressive", 38.9, 1.0, 0.0, 2.0, -3.0, 0.0, 3.0, 0.0, 5.0, 2.0};
  return p;
}
inline const DriverProfile& truck() {
  static const DriverProfile p{"truck", 23.6, 2.0, 4.0, 0.7, -2.0, 1.0, 1.0, 0.2, 6.0, 2.5};
  return p;
}

inline const std::array<const DriverProfile*, 4>& all() {
  static const std::array<const DriverProfile*, 4> a{&timid(), &normal(), &aggressive(), &truck()};
  return a;
}

inline const DriverProfile& by_name(std::string_view name) {
  for (const auto* p : all()) {
    if (p->name == name) return *p;
  }
  throw ValidationError("unknown driver profile: " + std::string(name));
}

}  // namespace profiles

inline void validate(const DriverProfile& p) {
  if (p.desired_speed < 0.0 || p.desired_time_headway < 0.0 || p.max_accel <= 0.0 ||
      p.desired_decel >= 0.0 || p.politeness < 0.0 || p.politeness > 1.0 ||
      p.length <= 0.0 || p.width <= 0.0) {
    throw ValidationError("driver profile '" + p.name + "' violates parameter bounds");
  }
}

struct RoadSpec {
  double road_length = 1000.0;
  double lane_width = 4.0;
  int lane_count = 2;
  std::array<int, 2> lane_directions{1, -1};

  double width() const { return lane_width * lane_count; }
  double lane_center(int lane) const { return lane_width * (lane + 0.5); }
  int lane_of(double y) const {
    return std::clamp(static_cast<int>(std::floor(y / lane_width)), 0, lane_count - 1);
  }
  // First lane that carries traffic in the given direction.
  int lane_for_direction(int dir) const {
    for (int i = 0; i < lane_count; ++i) {
      if (lane_directions[static_cast<std::size_t>(i)] == dir) return i;
    }
    return -1;
  }
};

struct RewardWeights {
  double collision = -10.0;
  double velocity = 1.0;
  double steering = 1.0;
  double acceleration = 1.0;
  double prize = 100.0;
  double v_min = 20.0;
  double v_max = 60.0;
  // Penalise commands divided by the actuator limits; false uses raw m/s^2 and rad.
  bool normalized_commands = true;
};

enum class Termination { Running, VehicleCollision, BoundaryCollision, Destination, Timeout };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Running: return "Running";
    case Termination::VehicleCollision: return "VehicleCollision";
    case Termination::BoundaryCollision: return "BoundaryCollision";
    case Termination::Destination: return "Destination";
    case Termination::Timeout: return "Timeout";
  }
  return "Running";
}

inline Termination termination_from_string(std::string_view s) {
  for (auto t : {Termination::Running, Termination::VehicleCollision,
                 Termination::BoundaryCollision, Termination::Destination,
                 Termination::Timeout}) {
    if (to_string(t) == s) return t;
  }
  throw ValidationError("unknown termination reason: " + std::string(s));
}

}  // namespace overtake
