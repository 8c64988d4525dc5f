#pragma once

#include <array>
#include <cmath>

#include "overtake/sim/vehicle.hpp"

namespace overtake {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Footprint corners in global coordinates, counter-clockwise from front-left.
inline std::array<Point2, 4> footprint(double x, double y, double heading, double length,
                                       double width) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  const double hl = length / 2.0;
  const double hw = width / 2.0;
  const std::array<std::array<double, 2>, 4> local{{{hl, hw}, {-hl, hw}, {-hl, -hw}, {hl, -hw}}};
  std::array<Point2, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = {x + c * local[i][0] - s * local[i][1], y + s * local[i][0] + c * local[i][1]};
  }
  return out;
}

inline std::array<Point2, 4> footprint(const VehicleState& v, double inflate = 0.0) {
  return footprint(v.x, v.y, v.heading, v.length + 2 * inflate, v.width + 2 * inflate);
}

// Separating-axis test between two convex quadrilaterals. Touching counts as
// overlap.
inline bool rectangles_overlap(const std::array<Point2, 4>& a, const std::array<Point2, 4>& b) {
  auto separated_along_edges_of = [](const std::array<Point2, 4>& p,
                                     const std::array<Point2, 4>& q) {
    for (std::size_t i = 0; i < 2; ++i) {
      const double ex = p[i + 1].x - p[i].x;
      const double ey = p[i + 1].y - p[i].y;
      const double nx = -ey;
      const double ny = ex;
      double pmin = INFINITY, pmax = -INFINITY, qmin = INFINITY, qmax = -INFINITY;
      for (std::size_t k = 0; k < 4; ++k) {
        const double dp = p[k].x * nx + p[k].y * ny;
        const double dq = q[k].x * nx + q[k].y * ny;
        pmin = std::min(pmin, dp);
        pmax = std::max(pmax, dp);
        qmin = std::min(qmin, dq);
        qmax = std::max(qmax, dq);
      }
      if (pmax < qmin || qmax < pmin) return true;
    }
    return false;
  };
  return !separated_along_edges_of(a, b) && !separated_along_edges_of(b, a);
}

inline bool vehicles_collide(const VehicleState& a, const VehicleState& b) {
  return rectangles_overlap(footprint(a), footprint(b));
}

// True when any footprint corner lies outside [0, road width] laterally.
inline bool leaves_road(const VehicleState& v, const RoadSpec& road) {
  for (const auto& p : footprint(v)) {
    if (p.y < 0.0 || p.y > road.width()) return true;
  }
  return false;
}

}  // namespace overtake
