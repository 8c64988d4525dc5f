#pragma once

#include <cmath>

#include "overtake/cilqr/trajectory.hpp"

namespace overtake::cilqr {

// s' = A s + B u.
template <int Nx, int Nu>
struct LinearDynamics {
  static constexpr int kStateDim = Nx;
  static constexpr int kControlDim = Nu;

  Mat<Nx, Nx> A = Mat<Nx, Nx>::Identity();
  Mat<Nx, Nu> B = Mat<Nx, Nu>::Zero();

  Vec<Nx> step(const Vec<Nx>& s, const Vec<Nu>& u) const { return A * s + B * u; }

  void jacobians(const Vec<Nx>&, const Vec<Nu>&, Mat<Nx, Nx>& fs, Mat<Nx, Nu>& fu) const {
    fs = A;
    fu = B;
  }
};

// Euler-discretised kinematic bicycle used for planning.
// State (x, y, v, psi), control (accel, steer).
struct BicycleDynamics {
  static constexpr int kStateDim = 4;
  static constexpr int kControlDim = 2;

  double dt = 0.05;
  double lf = 2.5;
  double lr = 2.5;

  double slip(double steer) const { return std::atan(lr * std::tan(steer) / (lf + lr)); }

  Vec<4> step(const Vec<4>& s, const Vec<2>& u) const {
    const double b = slip(u[1]);
    const double v = s[2];
    Vec<4> n;
    n << s[0] + dt * v * std::cos(s[3] + b), s[1] + dt * v * std::sin(s[3] + b), v + dt * u[0],
        s[3] + dt * v / lr * std::sin(b);
    return n;
  }

  void jacobians(const Vec<4>& s, const Vec<2>& u, Mat<4, 4>& fs, Mat<4, 2>& fu) const {
    const double ratio = lr / (lf + lr);
    const double t = std::tan(u[1]);
    const double b = std::atan(ratio * t);
    const double db = ratio * (1.0 + t * t) / (1.0 + ratio * ratio * t * t);
    const double v = s[2];
    const double c = std::cos(s[3] + b);
    const double sn = std::sin(s[3] + b);

    fs.setIdentity();
    fs(0, 2) = dt * c;
    fs(0, 3) = -dt * v * sn;
    fs(1, 2) = dt * sn;
    fs(1, 3) = dt * v * c;
    fs(3, 2) = dt * std::sin(b) / lr;

    fu.setZero();
    fu(2, 0) = dt;
    fu(0, 1) = -dt * v * sn * db;
    fu(1, 1) = dt * v * c * db;
    fu(3, 1) = dt * v / lr * std::cos(b) * db;
  }
};

}  // namespace overtake::cilqr
