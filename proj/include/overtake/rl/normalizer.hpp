#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "overtake/rl/mlp.hpp"

namespace overtake::rl {

// Online per-feature standardisation (Welford) with clipping. Features flagged
// as passthrough are returned unchanged.
class RunningNormalizer {
 public:
  RunningNormalizer() = default;
  explicit RunningNormalizer(int dim, double clip = 5.0, double eps = 1e-8)
      : mean_(Vector::Zero(dim)),
        m2_(Vector::Zero(dim)),
        passthrough_(static_cast<std::size_t>(dim), false),
        clip_(clip),
        eps_(eps) {}

  // Presence flags of the observation layout (column 0 of every row of width
  // `row_width`).
  static RunningNormalizer for_observation(int rows, int row_width, double clip = 5.0) {
    RunningNormalizer n(rows * row_width, clip);
    for (int r = 0; r < rows; ++r) n.passthrough_[static_cast<std::size_t>(r * row_width)] = true;
    return n;
  }

  void update(const Vector& x) {
    if (x.size() != mean_.size()) throw ValidationError("normalizer input has the wrong dimension");
    count_ += 1.0;
    const Vector delta = x - mean_;
    mean_ += delta / count_;
    m2_ += delta.cwiseProduct(x - mean_);
  }

  // Population variance; 1 before two samples have been seen.
  Vector variance() const {
    if (count_ < 2.0) return Vector::Ones(mean_.size());
    return m2_ / count_;
  }

  Vector normalize(const Vector& x) const {
    if (x.size() != mean_.size()) throw ValidationError("normalizer input has the wrong dimension");
    const Vector var = variance();
    Vector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (passthrough_[static_cast<std::size_t>(i)]) {
        out[i] = x[i];
      } else {
        out[i] = std::clamp((x[i] - mean_[i]) / std::sqrt(var[i] + eps_), -clip_, clip_);
      }
    }
    return out;
  }

  // Columns are samples.
  Matrix normalize(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) out.col(j) = normalize(Vector(x.col(j)));
    return out;
  }

  int dim() const { return static_cast<int>(mean_.size()); }
  double count() const { return count_; }
  const Vector& mean() const { return mean_; }
  const Vector& m2() const { return m2_; }
  const std::vector<bool>& passthrough() const { return passthrough_; }
  double clip() const { return clip_; }
  double eps() const { return eps_; }

  void restore(double count, Vector mean, Vector m2, std::vector<bool> passthrough, double clip,
               double eps) {
    if (mean.size() != m2.size() || static_cast<std::size_t>(mean.size()) != passthrough.size()) {
      throw ValidationError("normalizer state has inconsistent dimensions");
    }
    count_ = count;
    mean_ = std::move(mean);
    m2_ = std::move(m2);
    passthrough_ = std::move(passthrough);
    clip_ = clip;
    eps_ = eps;
  }

  bool operator==(const RunningNormalizer& o) const {
    return count_ == o.count_ && mean_ == o.mean_ && m2_ == o.m2_ && passthrough_ == o.passthrough_ &&
           clip_ == o.clip_ && eps_ == o.eps_;
  }

 private:
  double count_ = 0.0;
  Vector mean_;
  Vector m2_;
  std::vector<bool> passthrough_;
  double clip_ = 5.0;
  double eps_ = 1e-8;
};

}  // namespace overtake::rl
