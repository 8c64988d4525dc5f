#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "overtake/sim/world.hpp"

namespace overtake {

inline constexpr int kObservationColumns = 6;

// M x 6 row-major matrix of (presence, x, y, vx, vy, heading); row 0 is the
// ego, the rest are the nearest NPCs by Euclidean distance. Absent rows are
// entirely zero.
class Observation {
 public:
  Observation() = default;
  explicit Observation(int rows)
      : rows_(rows), data_(static_cast<std::size_t>(rows) * kObservationColumns, 0.0) {}

  int rows() const { return rows_; }
  static constexpr int cols() { return kObservationColumns; }
  std::size_t size() const { return data_.size(); }

  double& at(int r, int c) { return data_[static_cast<std::size_t>(r * kObservationColumns + c)]; }
  double at(int r, int c) const {
    return data_[static_cast<std::size_t>(r * kObservationColumns + c)];
  }
  bool present(int r) const { return at(r, 0) != 0.0; }

  std::span<const double> flat() const { return data_; }
  std::span<double> flat() { return data_; }

  void set_row(int r, const VehicleState& v) {
    at(r, 0) = 1.0;
    at(r, 1) = v.x;
    at(r, 2) = v.y;
    at(r, 3) = v.vx();
    at(r, 4) = v.vy();
    at(r, 5) = v.heading;
  }

  bool operator==(const Observation&) const = default;

 private:
  int rows_ = 0;
  std::vector<double> data_;
};

inline Observation build_observation(const World& w, int rows) {
  if (rows < 1) throw ValidationError("observation needs at least one row");
  Observation obs(rows);
  obs.set_row(0, w.ego);

  std::vector<std::size_t> order(w.npcs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> dist(w.npcs.size());
  for (std::size_t i = 0; i < w.npcs.size(); ++i) {
    dist[i] = std::hypot(w.npcs[i].state.x - w.ego.x, w.npcs[i].state.y - w.ego.y);
  }
  const std::size_t keep = std::min(order.size(), static_cast<std::size_t>(rows - 1));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
                    });
  for (std::size_t k = 0; k < keep; ++k) {
    obs.set_row(static_cast<int>(k) + 1, w.npcs[order[k]].state);
  }
  return obs;
}

}  // namespace overtake
