#pragma once

#include <cmath>
#include <string>

#include "overtake/rl/mlp.hpp"

namespace overtake::rl {

// beta(t) = q1 / exp(q2 t / T). q1 = 0 disables guidance and q2 = 0 keeps it
// constant.
struct FadingSchedule {
  double q1 = 1.0;
  double q2 = 4.0;
  double T = 1.0;

  void validate() const {
    if (!(std::isfinite(q1) && q1 >= 0.0)) throw ValidationError("fading q1 must be finite and >= 0");
    if (!(std::isfinite(q2) && q2 >= 0.0)) throw ValidationError("fading q2 must be finite and >= 0");
    if (!(std::isfinite(T) && T > 0.0)) throw ValidationError("fading horizon T must be > 0");
  }
};

inline double fading_beta(const FadingSchedule& s, double t) {
  if (!(t >= 0.0 && t <= s.T)) {
    throw ValidationError("fading timestep " + std::to_string(t) + " outside [0, " +
                          std::to_string(s.T) + "]");
  }
  return s.q1 / std::exp(s.q2 * t / s.T);
}

// Mean over batch and action dimensions of the squared difference.
inline double guidance_loss(const Matrix& actor, const Matrix& reference) {
  if (actor.rows() != reference.rows() || actor.cols() != reference.cols()) {
    throw ValidationError("guidance loss needs batches of equal shape");
  }
  if (actor.size() == 0) return 0.0;
  return (actor - reference).squaredNorm() / static_cast<double>(actor.size());
}

inline Matrix guidance_loss_gradient(const Matrix& actor, const Matrix& reference) {
  return 2.0 * (actor - reference) / static_cast<double>(actor.size());
}

inline double actor_loss(double policy_loss, double guidance, double beta) {
  return policy_loss + beta * guidance;
}

}  // namespace overtake::rl
