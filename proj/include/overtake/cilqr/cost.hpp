#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "overtake/cilqr/barrier.hpp"
#include "overtake/cilqr/trajectory.hpp"

namespace overtake::cilqr {

// 1/2 (s - r_k)' Q (s - r_k) + 1/2 u' R u per stage, 1/2 (s - r_N)' Qf (s - r_N)
// at the end. An empty reference means tracking the origin.
template <int Nx, int Nu>
struct QuadraticCost {
  Mat<Nx, Nx> Q = Mat<Nx, Nx>::Zero();
  Mat<Nu, Nu> R = Mat<Nu, Nu>::Identity();
  Mat<Nx, Nx> Qf = Mat<Nx, Nx>::Zero();
  std::vector<Vec<Nx>> reference;

  Vec<Nx> ref(int k) const {
    if (reference.empty()) return Vec<Nx>::Zero();
    return reference[static_cast<std::size_t>(std::min<int>(k, static_cast<int>(reference.size()) - 1))];
  }

  double stage(int k, const Vec<Nx>& s, const Vec<Nu>& u) const {
    const Vec<Nx> e = s - ref(k);
    return 0.5 * e.dot(Q * e) + 0.5 * u.dot(R * u);
  }

  double terminal(int k, const Vec<Nx>& s) const {
    const Vec<Nx> e = s - ref(k);
    return 0.5 * e.dot(Qf * e);
  }
};

template <int Nx, int Nu>
struct ConstraintValue {
  double g = 0.0;
  Vec<Nx> gs = Vec<Nx>::Zero();
  Vec<Nu> gu = Vec<Nu>::Zero();
  Mat<Nx, Nx> gss = Mat<Nx, Nx>::Zero();
  Mat<Nu, Nu> guu = Mat<Nu, Nu>::Zero();
  Mat<Nu, Nx> gus = Mat<Nu, Nx>::Zero();
};

enum class ConstraintKind { Obstacle, Boundary, Control, State };

// Smooth scalar constraint g(k, s, u) < 0 with analytic derivatives.
template <int Nx, int Nu>
struct Constraint {
  ConstraintKind kind = ConstraintKind::State;
  std::function<ConstraintValue<Nx, Nu>(int, const Vec<Nx>&, const Vec<Nu>&)> eval;
  bool uses_control = false;  // control constraints are skipped at k = N
  int owner = 0;              // e.g. NPC id for obstacle constraints
};

template <int Nx, int Nu>
struct ConstraintSpec {
  std::vector<Constraint<Nx, Nu>> constraints;
  BarrierParams barrier;
};

// u[index] * sign < bound * sign, i.e. g = sign * (u[index] - bound).
template <int Nx, int Nu>
Constraint<Nx, Nu> control_bound(int index, double bound, double sign) {
  Constraint<Nx, Nu> c;
  c.kind = ConstraintKind::Control;
  c.uses_control = true;
  c.eval = [=](int, const Vec<Nx>&, const Vec<Nu>& u) {
    ConstraintValue<Nx, Nu> v;
    v.g = sign * (u[index] - bound);
    v.gu[index] = sign;
    return v;
  };
  return c;
}

// g = scale * sign * (s[index] - bound). `scale` sets how sharply the barrier
// rises per unit of violation.
template <int Nx, int Nu>
Constraint<Nx, Nu> state_bound(int index, double bound, double sign,
                               ConstraintKind kind = ConstraintKind::State, double scale = 1.0) {
  Constraint<Nx, Nu> c;
  c.kind = kind;
  c.eval = [=](int, const Vec<Nx>& s, const Vec<Nu>&) {
    ConstraintValue<Nx, Nu> v;
    v.g = scale * sign * (s[index] - bound);
    v.gs[index] = scale * sign;
    return v;
  };
  return c;
}

// Axis-aligned ellipse around a moving point: g = 1 - (dx/a)^2 - (dy/b)^2 with
// the centre at `centers[k]`. States 0 and 1 are the planar position.
template <int Nx, int Nu>
Constraint<Nx, Nu> ellipse_obstacle(std::vector<std::pair<double, double>> centers, double a,
                                    double b, int owner = 0) {
  Constraint<Nx, Nu> c;
  c.kind = ConstraintKind::Obstacle;
  c.owner = owner;
  c.eval = [centers = std::move(centers), a, b](int k, const Vec<Nx>& s, const Vec<Nu>&) {
    const auto& ctr = centers[static_cast<std::size_t>(
        std::min<int>(k, static_cast<int>(centers.size()) - 1))];
    const double dx = s[0] - ctr.first;
    const double dy = s[1] - ctr.second;
    ConstraintValue<Nx, Nu> v;
    v.g = 1.0 - dx * dx / (a * a) - dy * dy / (b * b);
    v.gs[0] = -2.0 * dx / (a * a);
    v.gs[1] = -2.0 * dy / (b * b);
    v.gss(0, 0) = -2.0 / (a * a);
    v.gss(1, 1) = -2.0 / (b * b);
    return v;
  };
  return c;
}

// Second-order expansion of the stage cost plus barrier terms at one knot.
template <int Nx, int Nu>
struct StageExpansion {
  double l = 0.0;
  Vec<Nx> ls = Vec<Nx>::Zero();
  Vec<Nu> lu = Vec<Nu>::Zero();
  Mat<Nx, Nx> lss = Mat<Nx, Nx>::Zero();
  Mat<Nu, Nu> luu = Mat<Nu, Nu>::Zero();
  Mat<Nu, Nx> lus = Mat<Nu, Nx>::Zero();
  double max_g = -std::numeric_limits<double>::infinity();
  bool capped = false;
};

template <int Nx, int Nu>
void add_barriers(StageExpansion<Nx, Nu>& e, const ConstraintSpec<Nx, Nu>& cs, int k,
                  const Vec<Nx>& s, const Vec<Nu>& u, bool terminal, bool derivatives) {
  for (const auto& c : cs.constraints) {
    if (terminal && c.uses_control) continue;
    const ConstraintValue<Nx, Nu> g = c.eval(k, s, u);
    e.max_g = std::max(e.max_g, g.g);
    const BarrierValue b = barrier_expansion(g.g, cs.barrier);
    e.l += b.value;
    e.capped = e.capped || b.capped;
    if (!derivatives) continue;
    e.ls += b.d1 * g.gs;
    e.lss += b.d2 * g.gs * g.gs.transpose() + b.d1 * g.gss;
    if (!terminal) {
      e.lu += b.d1 * g.gu;
      e.luu += b.d2 * g.gu * g.gu.transpose() + b.d1 * g.guu;
      e.lus += b.d2 * g.gu * g.gs.transpose() + b.d1 * g.gus;
    }
  }
}

template <int Nx, int Nu>
StageExpansion<Nx, Nu> expand_stage(const QuadraticCost<Nx, Nu>& cost,
                                    const ConstraintSpec<Nx, Nu>& cs, int k, const Vec<Nx>& s,
                                    const Vec<Nu>& u, bool derivatives = true) {
  StageExpansion<Nx, Nu> e;
  const Vec<Nx> err = s - cost.ref(k);
  e.l = 0.5 * err.dot(cost.Q * err) + 0.5 * u.dot(cost.R * u);
  if (derivatives) {
    e.ls = cost.Q * err;
    e.lu = cost.R * u;
    e.lss = cost.Q;
    e.luu = cost.R;
  }
  add_barriers(e, cs, k, s, u, false, derivatives);
  return e;
}

template <int Nx, int Nu>
StageExpansion<Nx, Nu> expand_terminal(const QuadraticCost<Nx, Nu>& cost,
                                       const ConstraintSpec<Nx, Nu>& cs, int k,
                                       const Vec<Nx>& s, bool derivatives = true) {
  StageExpansion<Nx, Nu> e;
  const Vec<Nx> err = s - cost.ref(k);
  e.l = 0.5 * err.dot(cost.Qf * err);
  if (derivatives) {
    e.ls = cost.Qf * err;
    e.lss = cost.Qf;
  }
  add_barriers(e, cs, k, s, Vec<Nu>(Vec<Nu>::Zero()), true, derivatives);
  return e;
}

// Quadratic cost plus the barrier of every constraint at every knot.
template <int Nx, int Nu>
double augmented_cost(const Trajectory<Nx, Nu>& t, const QuadraticCost<Nx, Nu>& cost,
                      const ConstraintSpec<Nx, Nu>& cs) {
  const int n = t.horizon();
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    total += expand_stage(cost, cs, k, t.states[static_cast<std::size_t>(k)],
                          t.controls[static_cast<std::size_t>(k)], false)
                 .l;
  }
  total += expand_terminal(cost, cs, n, t.states[static_cast<std::size_t>(n)], false).l;
  return total;
}

// Largest constraint value over the trajectory (-inf without constraints).
template <int Nx, int Nu>
double max_constraint(const Trajectory<Nx, Nu>& t, const ConstraintSpec<Nx, Nu>& cs,
                      bool include_control = true) {
  double m = -std::numeric_limits<double>::infinity();
  const int n = t.horizon();
  for (int k = 0; k <= n; ++k) {
    const Vec<Nu> u = k < n ? t.controls[static_cast<std::size_t>(k)] : Vec<Nu>::Zero();
    for (const auto& c : cs.constraints) {
      if (c.uses_control && (k == n || !include_control)) continue;
      m = std::max(m, c.eval(k, t.states[static_cast<std::size_t>(k)], u).g);
    }
  }
  return m;
}

}  // namespace overtake::cilqr
