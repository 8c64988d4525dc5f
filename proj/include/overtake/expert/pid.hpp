#pragma once

#include <algorithm>
#include <limits>

namespace overtake {

// u = kp e + ki * integral(e) + kd * de/dt with a clamped integrator. The
// derivative term is skipped on the first sample after a reset.
struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double integral_limit = std::numeric_limits<double>::infinity();
  double integrator = 0.0;
  double previous_error = 0.0;
  bool has_previous = false;

  void reset() {
    integrator = 0.0;
    previous_error = 0.0;
    has_previous = false;
  }
};

inline double pid_step(PidGains& g, double error, double dt) {
  g.integrator = std::clamp(g.integrator + error * dt, -g.integral_limit, g.integral_limit);
  const double derivative = g.has_previous ? (error - g.previous_error) / dt : 0.0;
  g.previous_error = error;
  g.has_previous = true;
  return g.kp * error + g.ki * g.integrator + g.kd * derivative;
}

}  // namespace overtake
