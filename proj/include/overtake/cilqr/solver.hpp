#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "overtake/cilqr/cost.hpp"
#include "overtake/cilqr/trajectory.hpp"

namespace overtake::cilqr {

struct SolverConfig {
  int max_iterations = 100;
  double tolerance = 1e-6;  // on relative cost decrease
  double reg_init = 1e-6;
  double reg_min = 1e-8;
  double reg_max = 1e8;
  double reg_grow = 10.0;
  double reg_shrink = 2.0;
  int line_search_steps = 11;  // step scales 1, 1/2, ..., 2^-(steps-1)
};

inline void validate(const SolverConfig& c) {
  if (c.max_iterations < 1 || !(c.tolerance > 0.0) || c.reg_init < 0.0 || c.reg_min < 0.0 ||
      c.reg_max < c.reg_min || c.line_search_steps < 1) {
    throw std::invalid_argument("invalid solver configuration");
  }
}

struct SolveDiagnostics {
  int iterations = 0;                // accepted iterations
  std::vector<double> cost_history;  // initial cost followed by each accepted cost
  std::vector<double> regularization_trace;
  bool converged = false;
  bool exponent_capped = false;
  double max_constraint = 0.0;
  std::string stop_reason;
};

template <int Nx, int Nu>
struct Gains {
  std::vector<Vec<Nu>> feedforward;
  std::vector<Mat<Nu, Nx>> feedback;
  double expected_linear = 0.0;     // sum k' Q_u
  double expected_quadratic = 0.0;  // sum 1/2 k' Q_uu k

  double expected_decrease(double step) const {
    return -(step * expected_linear + step * step * expected_quadratic);
  }
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Gauss-Newton backward recursion (dynamics second derivatives dropped).
// Returns false when Q_uu + reg I is not positive definite at some knot.
template <class Dyn>
bool backward_pass(const Dyn& dyn,
                   const Trajectory<Dyn::kStateDim, Dyn::kControlDim>& nominal,
                   const QuadraticCost<Dyn::kStateDim, Dyn::kControlDim>& cost,
                   const ConstraintSpec<Dyn::kStateDim, Dyn::kControlDim>& cs, double reg,
                   Gains<Dyn::kStateDim, Dyn::kControlDim>& out) {
  constexpr int Nx = Dyn::kStateDim;
  constexpr int Nu = Dyn::kControlDim;
  const int n = nominal.horizon();
  out.feedforward.assign(static_cast<std::size_t>(n), Vec<Nu>::Zero());
  out.feedback.assign(static_cast<std::size_t>(n), Mat<Nu, Nx>::Zero());
  out.expected_linear = 0.0;
  out.expected_quadratic = 0.0;

  const auto term = expand_terminal(cost, cs, n, nominal.states[static_cast<std::size_t>(n)]);
  Vec<Nx> vs = term.ls;
  Mat<Nx, Nx> vss = term.lss;
  Mat<Nx, Nx> fs;
  Mat<Nx, Nu> fu;

  for (int k = n - 1; k >= 0; --k) {
    const auto idx = static_cast<std::size_t>(k);
    const auto& s = nominal.states[idx];
    const auto& u = nominal.controls[idx];
    const auto e = expand_stage(cost, cs, k, s, u);
    dyn.jacobians(s, u, fs, fu);

    const Vec<Nx> qs = e.ls + fs.transpose() * vs;
    const Vec<Nu> qu = e.lu + fu.transpose() * vs;
    const Mat<Nx, Nx> qss = e.lss + fs.transpose() * vss * fs;
    const Mat<Nu, Nu> quu = e.luu + fu.transpose() * vss * fu;
    const Mat<Nu, Nx> qus = e.lus + fu.transpose() * vss * fs;

    Mat<Nu, Nu> quu_reg = quu + reg * Mat<Nu, Nu>::Identity();
    quu_reg = 0.5 * (quu_reg + quu_reg.transpose()).eval();
    Eigen::LLT<Mat<Nu, Nu>> llt(quu_reg);
    if (llt.info() != Eigen::Success) return false;

    const Vec<Nu> kff = -llt.solve(qu);
    const Mat<Nu, Nx> kfb = -llt.solve(qus);
    out.feedforward[idx] = kff;
    out.feedback[idx] = kfb;
    out.expected_linear += kff.dot(qu);
    out.expected_quadratic += 0.5 * kff.dot(quu * kff);

    vs = qs + kfb.transpose() * quu * kff + kfb.transpose() * qu + qus.transpose() * kff;
    vss = qss + kfb.transpose() * quu * kfb + kfb.transpose() * qus + qus.transpose() * kfb;
    vss = 0.5 * (vss + vss.transpose()).eval();
  }
  return true;
}

// u_k = u_bar_k + step * k_k + K_k (s_k - s_bar_k), s_0 = s_init.
template <class Dyn>
Trajectory<Dyn::kStateDim, Dyn::kControlDim> forward_pass(
    const Dyn& dyn, const Trajectory<Dyn::kStateDim, Dyn::kControlDim>& nominal,
    const Gains<Dyn::kStateDim, Dyn::kControlDim>& gains, double step,
    const Vec<Dyn::kStateDim>& s_init) {
  const int n = nominal.horizon();
  Trajectory<Dyn::kStateDim, Dyn::kControlDim> t(n);
  t.states[0] = s_init;
  for (int k = 0; k < n; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    t.controls[idx] = nominal.controls[idx] + step * gains.feedforward[idx] +
                      gains.feedback[idx] * (t.states[idx] - nominal.states[idx]);
    t.states[idx + 1] = dyn.step(t.states[idx], t.controls[idx]);
  }
  return t;
}

template <int Nx, int Nu>
struct SolveResult {
  Trajectory<Nx, Nu> trajectory;
  SolveDiagnostics diagnostics;
};

template <int Nx, int Nu>
bool any_capped(const Trajectory<Nx, Nu>& t, const QuadraticCost<Nx, Nu>& cost,
                const ConstraintSpec<Nx, Nu>& cs) {
  const int n = t.horizon();
  for (int k = 0; k < n; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    if (expand_stage(cost, cs, k, t.states[idx], t.controls[idx], false).capped) return true;
  }
  return expand_terminal(cost, cs, n, t.states[static_cast<std::size_t>(n)], false).capped;
}

// Alternates backward and forward passes with a backtracking line search and
// adaptive regularisation. The nominal controls are re-rolled from s_init.
template <class Dyn>
SolveResult<Dyn::kStateDim, Dyn::kControlDim> solve(
    const Dyn& dyn, const QuadraticCost<Dyn::kStateDim, Dyn::kControlDim>& cost,
    const ConstraintSpec<Dyn::kStateDim, Dyn::kControlDim>& cs,
    const Vec<Dyn::kStateDim>& s_init,
    const Trajectory<Dyn::kStateDim, Dyn::kControlDim>& nominal, const SolverConfig& cfg) {
  validate(cfg);
  if (nominal.horizon() < 1) throw std::invalid_argument("horizon must be at least 1");

  SolveResult<Dyn::kStateDim, Dyn::kControlDim> res;
  auto& diag = res.diagnostics;
  res.trajectory = rollout(dyn, s_init, nominal.controls);
  double cost_now = augmented_cost(res.trajectory, cost, cs);
  if (!std::isfinite(cost_now) || !res.trajectory.finite()) {
    throw SolverError(
        "initial trajectory has non-finite augmented cost; supply a feasible seed such as a "
        "zero-control rollout");
  }
  diag.cost_history.push_back(cost_now);

  double reg = std::clamp(cfg.reg_init, cfg.reg_min, cfg.reg_max);
  Gains<Dyn::kStateDim, Dyn::kControlDim> gains;

  int attempts = 0;
  while (diag.iterations < cfg.max_iterations) {
    if (++attempts > 4 * cfg.max_iterations) {
      diag.stop_reason = "attempt budget exhausted";
      break;
    }
    diag.regularization_trace.push_back(reg);
    if (!backward_pass(dyn, res.trajectory, cost, cs, reg, gains)) {
      reg *= cfg.reg_grow;
      if (reg > cfg.reg_max) {
        diag.stop_reason = "regularization limit in backward pass";
        break;
      }
      continue;
    }

    // Predicted decrease this small means the nominal is already stationary.
    const double predicted = gains.expected_decrease(1.0);
    if (predicted <= cfg.tolerance * std::max(std::abs(cost_now), 1e-12) * 1e-3) {
      diag.converged = true;
      diag.stop_reason = "stationary";
      break;
    }

    bool accepted = false;
    double step = 1.0;
    for (int ls = 0; ls < cfg.line_search_steps; ++ls, step *= 0.5) {
      auto cand = forward_pass(dyn, res.trajectory, gains, step, s_init);
      if (!cand.finite()) continue;
      const double c = augmented_cost(cand, cost, cs);
      if (std::isfinite(c) && c < cost_now) {
        const double rel = (cost_now - c) / std::max(std::abs(cost_now), 1e-12);
        res.trajectory = std::move(cand);
        cost_now = c;
        diag.cost_history.push_back(c);
        ++diag.iterations;
        accepted = true;
        if (rel < cfg.tolerance) {
          diag.converged = true;
          diag.stop_reason = "relative decrease below tolerance";
        }
        break;
      }
    }

    if (accepted) {
      reg = std::max(reg / cfg.reg_shrink, cfg.reg_min);
      if (diag.converged) break;
    } else {
      if (predicted < cfg.tolerance * std::max(std::abs(cost_now), 1e-12)) {
        diag.converged = true;
        diag.stop_reason = "no decrease and predicted decrease below tolerance";
        break;
      }
      reg *= cfg.reg_grow;
      if (reg > cfg.reg_max) {
        diag.stop_reason = "line search failed at regularization limit";
        break;
      }
    }
  }
  if (diag.stop_reason.empty()) diag.stop_reason = "iteration limit";

  diag.max_constraint = max_constraint(res.trajectory, cs);
  diag.exponent_capped = any_capped(res.trajectory, cost, cs);
  return res;
}

}  // namespace overtake::cilqr
