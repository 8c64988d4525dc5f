#pragma once

#include <cmath>
#include <stdexcept>

namespace overtake::cilqr {

struct BarrierParams {
  double q1 = 1.0;
  double q2 = 5.0;
  double exponent_cap = 30.0;
};

// Value and first two derivatives of the exponential barrier with respect to g.
struct BarrierValue {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  bool capped = false;
};

// q1 * exp(q2 * g). Past the exponent cap the barrier continues linearly in the
// exponent argument, so it stays finite and strictly increasing.
inline BarrierValue barrier_expansion(double g, const BarrierParams& p) {
  if (!(p.q1 > 0.0) || !(p.q2 > 0.0)) {
    throw std::invalid_argument("barrier parameters must be positive");
  }
  const double arg = p.q2 * g;
  BarrierValue out;
  if (arg <= p.exponent_cap) {
    out.value = p.q1 * std::exp(arg);
    out.d1 = p.q2 * out.value;
    out.d2 = p.q2 * out.d1;
  } else {
    const double at_cap = p.q1 * std::exp(p.exponent_cap);
    out.value = at_cap * (1.0 + (arg - p.exponent_cap));
    out.d1 = at_cap * p.q2;
    out.d2 = 0.0;
    out.capped = true;
  }
  return out;
}

inline double barrier(double g, double q1, double q2, double exponent_cap = 30.0) {
  return barrier_expansion(g, {q1, q2, exponent_cap}).value;
}

}  // namespace overtake::cilqr
