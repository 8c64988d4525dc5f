#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace overtake::cilqr {

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;
template <int R, int C>
using Mat = Eigen::Matrix<double, R, C>;

// States s_0..s_N and controls u_0..u_{N-1}.
template <int Nx, int Nu>
struct Trajectory {
  std::vector<Vec<Nx>> states;
  std::vector<Vec<Nu>> controls;

  Trajectory() = default;
  explicit Trajectory(int horizon)
      : states(static_cast<std::size_t>(horizon) + 1, Vec<Nx>::Zero()),
        controls(static_cast<std::size_t>(horizon), Vec<Nu>::Zero()) {}

  int horizon() const { return static_cast<int>(controls.size()); }

  bool finite() const {
    for (const auto& s : states) {
      if (!s.allFinite()) return false;
    }
    for (const auto& u : controls) {
      if (!u.allFinite()) return false;
    }
    return true;
  }
};

// Rolls a control sequence out from s_init.
template <class Dyn>
Trajectory<Dyn::kStateDim, Dyn::kControlDim> rollout(
    const Dyn& dyn, const Vec<Dyn::kStateDim>& s_init,
    const std::vector<Vec<Dyn::kControlDim>>& controls) {
  Trajectory<Dyn::kStateDim, Dyn::kControlDim> t(static_cast<int>(controls.size()));
  t.controls = controls;
  t.states[0] = s_init;
  for (std::size_t k = 0; k < controls.size(); ++k) {
    t.states[k + 1] = dyn.step(t.states[k], controls[k]);
  }
  return t;
}

}  // namespace overtake::cilqr
