#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "overtake/cilqr/dynamics.hpp"
#include "overtake/cilqr/solver.hpp"
#include "overtake/rl/mlp.hpp"

namespace overtake::oracle {

using namespace overtake::cilqr;

template <int R, int C>
Mat<R, C> random_mat(Rng& rng, double scale = 1.0) {
  Mat<R, C> m;
  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < C; ++j) m(i, j) = rng.uniform(-scale, scale);
  }
  return m;
}

template <int N>
Mat<N, N> random_spd(Rng& rng, double floor) {
  const Mat<N, N> a = random_mat<N, N>(rng);
  return a * a.transpose() + floor * Mat<N, N>::Identity();
}

template <int Nx, int Nu>
struct LqInstance {
  LinearDynamics<Nx, Nu> dyn;
  QuadraticCost<Nx, Nu> cost;
  Vec<Nx> s0;
  int horizon = 0;
};

template <int Nx, int Nu>
LqInstance<Nx, Nu> random_lq(Rng& rng) {
  LqInstance<Nx, Nu> p;
  p.dyn.A = Mat<Nx, Nx>::Identity() + random_mat<Nx, Nx>(rng, 0.2);
  p.dyn.B = random_mat<Nx, Nu>(rng);
  p.cost.Q = random_spd<Nx>(rng, 0.1);
  p.cost.R = random_spd<Nu>(rng, 0.5);
  p.cost.Qf = random_spd<Nx>(rng, 0.1);
  p.s0 = random_mat<Nx, 1>(rng, 2.0);
  p.horizon = 5 + static_cast<int>(rng.index(46));
  return p;
}

// Finite-horizon discrete Riccati recursion: returns P_0 and the gains K_k
// with u_k = K_k s_k.
template <int Nx, int Nu>
std::pair<Mat<Nx, Nx>, std::vector<Mat<Nu, Nx>>> riccati(const LqInstance<Nx, Nu>& p) {
  const auto& A = p.dyn.A;
  const auto& B = p.dyn.B;
  Mat<Nx, Nx> P = p.cost.Qf;
  std::vector<Mat<Nu, Nx>> K(static_cast<std::size_t>(p.horizon));
  for (int k = p.horizon - 1; k >= 0; --k) {
    const Mat<Nu, Nu> S = p.cost.R + B.transpose() * P * B;
    const Mat<Nu, Nx> Kk = -S.ldlt().solve(B.transpose() * P * A);
    K[static_cast<std::size_t>(k)] = Kk;
    const Mat<Nx, Nx> Acl = A + B * Kk;
    P = p.cost.Q + Kk.transpose() * p.cost.R * Kk + Acl.transpose() * P * Acl;
    P = 0.5 * (P + P.transpose()).eval();
  }
  return {P, K};
}

template <int Nx, int Nu>
double riccati_relative_error(Rng& rng, int* iterations) {
  const auto p = random_lq<Nx, Nu>(rng);
  const auto [P, K] = riccati(p);
  const double oracle = 0.5 * p.s0.dot(P * p.s0);
  Trajectory<Nx, Nu> nominal(p.horizon);
  const auto res = solve(p.dyn, p.cost, ConstraintSpec<Nx, Nu>{}, p.s0, nominal, SolverConfig{});
  *iterations = res.diagnostics.iterations;
  return std::abs(augmented_cost(res.trajectory, p.cost, ConstraintSpec<Nx, Nu>{}) - oracle) /
         std::abs(oracle);
}

inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& f) {
  const double scale = std::max({a.norm(), f.norm(), 1e-6});
  return (a - f).norm() / scale;
}

// A constraint set exercising every constraint kind on the bicycle state.
inline ConstraintSpec<4, 2> mixed_constraints() {
  ConstraintSpec<4, 2> cs;
  cs.barrier = {1.0, 5.0, 30.0};
  cs.constraints.push_back(ellipse_obstacle<4, 2>({{20.0, 3.0}, {22.0, 3.0}, {24.0, 3.5}}, 4.0, 1.8));
  cs.constraints.push_back(state_bound<4, 2>(1, 7.0, 1.0, ConstraintKind::Boundary));
  cs.constraints.push_back(state_bound<4, 2>(1, 1.0, -1.0, ConstraintKind::Boundary));
  cs.constraints.push_back(state_bound<4, 2>(3, 0.3, 1.0, ConstraintKind::State, 20.0));
  cs.constraints.push_back(control_bound<4, 2>(0, 5.5, 1.0));
  cs.constraints.push_back(control_bound<4, 2>(1, -1.0, -1.0));
  return cs;
}

inline QuadraticCost<4, 2> tracking_cost() {
  QuadraticCost<4, 2> c;
  c.Q.diagonal() << 0.0, 1.0, 0.5, 2.0;
  c.R.diagonal() << 0.1, 1.0;
  c.Qf = c.Q;
  c.reference.assign(1, (Vec<4>() << 0.0, 2.0, 40.0, 0.0).finished());
  return c;
}


// Worst relative error of the bicycle Jacobians against central differences.
inline double bicycle_jacobian_error(Rng& rng, int points) {
  BicycleDynamics dyn;
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < points; ++trial) {
    Vec<4> s;
    s << rng.uniform(-50, 50), rng.uniform(0, 8), rng.uniform(1, 55), rng.uniform(-0.5, 0.5);
    Vec<2> u(rng.uniform(-5.5, 5.5), rng.uniform(-0.9, 0.9));
    Mat<4, 4> fs;
    Mat<4, 2> fu;
    dyn.jacobians(s, u, fs, fu);
    Mat<4, 4> fs_fd;
    Mat<4, 2> fu_fd;
    for (int i = 0; i < 4; ++i) {
      Vec<4> e = Vec<4>::Zero();
      e[i] = h;
      fs_fd.col(i) = (dyn.step(s + e, u) - dyn.step(s - e, u)) / (2 * h);
    }
    for (int i = 0; i < 2; ++i) {
      Vec<2> e = Vec<2>::Zero();
      e[i] = h;
      fu_fd.col(i) = (dyn.step(s, u + e) - dyn.step(s, u - e)) / (2 * h);
    }
    worst = std::max({worst, rel_err(fs, fs_fd), rel_err(fu, fu_fd)});
  }
  return worst;
}

// Gradient and Hessian of the barrier-augmented stage cost; the Hessian is
// checked against differences of the analytic gradient.
inline double stage_expansion_error(Rng& rng, int points) {
  const auto cost = tracking_cost();
  const auto cs = mixed_constraints();
  const double h = 1e-6;
  auto value = [&](int k, const Vec<4>& s, const Vec<2>& u) { return expand_stage(cost, cs, k, s, u, false).l; };
  auto grads = [&](int k, const Vec<4>& s, const Vec<2>& u) {
    const auto e = expand_stage(cost, cs, k, s, u, true);
    Eigen::VectorXd g(6);
    g << e.ls, e.lu;
    return g;
  };
  double worst = 0.0;
  for (int trial = 0; trial < points; ++trial) {
    const int k = static_cast<int>(rng.index(3));
    Vec<4> s;
    s << rng.uniform(14, 30), rng.uniform(1.2, 6.8), rng.uniform(20, 50), rng.uniform(-0.2, 0.28);
    Vec<2> u(rng.uniform(-5, 5), rng.uniform(-0.8, 0.8));
    const auto e = expand_stage(cost, cs, k, s, u, true);
    if (e.capped) return std::numeric_limits<double>::infinity();
    Eigen::VectorXd g(6), g_fd(6);
    g << e.ls, e.lu;
    Eigen::MatrixXd H(6, 6), H_fd(6, 6);
    H.topLeftCorner<4, 4>() = e.lss;
    H.bottomRightCorner<2, 2>() = e.luu;
    H.bottomLeftCorner<2, 4>() = e.lus;
    H.topRightCorner<4, 2>() = e.lus.transpose();
    for (int i = 0; i < 6; ++i) {
      Vec<4> ds = Vec<4>::Zero();
      Vec<2> du = Vec<2>::Zero();
      (i < 4 ? ds[i] : du[i - 4]) = h;
      g_fd[i] = (value(k, s + ds, u + du) - value(k, s - ds, u - du)) / (2 * h);
      H_fd.col(i) = (grads(k, s + ds, u + du) - grads(k, s - ds, u - du)) / (2 * h);
    }
    worst = std::max({worst, rel_err(g, g_fd), rel_err(H, H_fd)});
  }
  return worst;
}

inline double terminal_expansion_error(Rng& rng, int points) {
  const auto cost = tracking_cost();
  const auto cs = mixed_constraints();
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < points; ++trial) {
    Vec<4> s;
    s << rng.uniform(14, 30), rng.uniform(1.2, 6.8), rng.uniform(20, 50), rng.uniform(-0.2, 0.28);
    const auto e = expand_terminal(cost, cs, 3, s, true);
    Vec<4> g_fd;
    Mat<4, 4> H_fd;
    for (int i = 0; i < 4; ++i) {
      Vec<4> d = Vec<4>::Zero();
      d[i] = h;
      const Vec<4> sp = s + d, sm = s - d;
      g_fd[i] = (expand_terminal(cost, cs, 3, sp, false).l - expand_terminal(cost, cs, 3, sm, false).l) / (2 * h);
      H_fd.col(i) = (expand_terminal(cost, cs, 3, sp, true).ls - expand_terminal(cost, cs, 3, sm, true).ls) / (2 * h);
    }
    worst = std::max({worst, rel_err(e.ls, g_fd), rel_err(e.lss, H_fd)});
  }
  return worst;
}

// Per-parameter relative error. The floor keeps near-zero gradients from
// being judged against the difference quotient's own round-off (about 1e-10
// at h = 1e-6).
inline double scalar_rel(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// Worst per-parameter and per-input error of the reverse pass for the loss
// 0.5 ||net(x) - t||^2 at `points` random (x, t) pairs. Uses the five-point
// stencil: O(h^4) truncation and about 1e-12 round-off at h = 1e-4.
inline double network_gradient_error(rl::Mlp& net, Rng& rng, int points, long* checked = nullptr) {
  using rl::Matrix;
  const double h = 1e-4;
  const auto& spec = net.spec();
  auto rand = [&](int r, double s) {
    Matrix m(r, 1);
    for (int i = 0; i < r; ++i) m(i, 0) = rng.uniform(-s, s);
    return m;
  };
  auto loss = [&](const Matrix& x, const Matrix& t) { return 0.5 * (net.forward(x) - t).squaredNorm(); };
  auto stencil = [&](const std::function<double(double)>& f) {
    return (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h);
  };
  double worst = 0.0;
  for (int point = 0; point < points; ++point) {
    const Matrix x = rand(spec.inputs(), 2.0);
    const Matrix t = rand(spec.outputs(), 0.8);
    rl::MlpTape tape;
    const Matrix y = net.forward(x, &tape);
    rl::MlpGrad g = net.zero_grad();
    const Matrix dx = net.backward(tape, y - t, &g);
    const rl::Vector analytic = rl::Mlp::flatten(g);
    rl::Vector p = net.flatten();
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double orig = p[i];
      const double fd = stencil([&](double d) {
        p[i] = orig + d;
        net.unflatten(p);
        return loss(x, t);
      });
      p[i] = orig;
      worst = std::max(worst, scalar_rel(analytic[i], fd));
      if (checked) ++*checked;
    }
    net.unflatten(p);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double fd = stencil([&](double d) {
        Matrix xs = x;
        xs(i, 0) += d;
        return loss(xs, t);
      });
      worst = std::max(worst, scalar_rel(dx(i, 0), fd));
    }
  }
  return worst;
}

// Static ellipse straddling the lane centre of a bicycle heading in +x.
struct ObstacleProblem {
  BicycleDynamics dyn;
  QuadraticCost<4, 2> cost;
  ConstraintSpec<4, 2> constraints;
  Vec<4> s0;
  int horizon = 50;
};

inline ObstacleProblem obstacle_problem() {
  ObstacleProblem p;
  p.dyn.dt = 0.1;
  p.cost.Q.diagonal() << 0.0, 1.0, 0.5, 2.0;
  p.cost.R.diagonal() << 0.1, 1.0;
  p.cost.Qf = p.cost.Q;
  p.cost.reference.assign(1, (Vec<4>() << 0.0, 2.0, 10.0, 0.0).finished());
  p.constraints.constraints.push_back(ellipse_obstacle<4, 2>({{25.0, 2.5}}, 4.0, 1.5));
  p.constraints.constraints.push_back(state_bound<4, 2>(1, 7.5, 1.0, ConstraintKind::Boundary));
  p.constraints.constraints.push_back(state_bound<4, 2>(1, 0.5, -1.0, ConstraintKind::Boundary));
  p.s0 = (Vec<4>() << 0.0, 2.0, 10.0, 0.0).finished();
  return p;
}

}  // namespace overtake::oracle
