#pragma once

#include <array>
#include <cmath>

#include "overtake/sim/vehicle.hpp"

namespace overtake {

// Distances from the centre of gravity to the front and rear axles.
struct BicycleGeometry {
  double lf = 2.5;
  double lr = 2.5;
};

// (x, y, v, psi) rates of the continuous kinematic bicycle model.
inline std::array<double, 4> bicycle_rates(const std::array<double, 4>& s, double accel,
                                           double steer, const BicycleGeometry& g) {
  const double slip = std::atan(g.lr * std::tan(steer) / (g.lf + g.lr));
  const double v = s[2];
  return {v * std::cos(s[3] + slip), v * std::sin(s[3] + slip), accel,
          v / g.lr * std::sin(slip)};
}

// One classical RK4 step of the continuous model with controls held constant.
inline std::array<double, 4> bicycle_rk4(const std::array<double, 4>& s, double accel,
                                         double steer, double dt, const BicycleGeometry& g) {
  auto axpy = [](const std::array<double, 4>& a, const std::array<double, 4>& b, double h) {
    return std::array<double, 4>{a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2],
                                 a[3] + h * b[3]};
  };
  const auto k1 = bicycle_rates(s, accel, steer, g);
  const auto k2 = bicycle_rates(axpy(s, k1, dt / 2), accel, steer, g);
  const auto k3 = bicycle_rates(axpy(s, k2, dt / 2), accel, steer, g);
  const auto k4 = bicycle_rates(axpy(s, k3, dt), accel, steer, g);
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

// Advances the ego one simulator step. The action is clamped to the actuator
// limits and the resulting speed to [0, max_speed].
inline VehicleState step_ego_kinematics(const VehicleState& state, Action action, double dt,
                                        const ActuatorLimits& limits = {},
                                        const BicycleGeometry& geom = {}) {
  validate(state);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
  if (!is_finite(action)) throw ValidationError("non-finite action");
  action = clamp_action(action, limits);

  const auto next = bicycle_rk4({state.x, state.y, state.speed, state.heading}, action.accel,
                                action.steer, dt, geom);
  VehicleState out = state;
  out.x = next[0];
  out.y = next[1];
  out.speed = std::clamp(next[2], 0.0, limits.max_speed);
  out.heading = next[3];
  return out;
}

}  // namespace overtake
