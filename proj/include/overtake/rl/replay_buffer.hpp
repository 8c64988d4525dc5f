#pragma once

#include <vector>

#include "overtake/rl/normalizer.hpp"
#include "overtake/rng.hpp"

namespace overtake::rl {

// Observations are stored raw and normalised when a batch is drawn. Actions
// and reference actions are in normalised [-1, 1] units.
struct Transition {
  Vector obs;
  Vector action;
  double reward = 0.0;
  Vector next_obs;
  bool terminal = false;  // true only for collision/destination endings
  Vector reference;

  bool operator==(const Transition&) const = default;
};

struct Batch {
  Matrix obs;
  Matrix action;
  Vector reward;
  Matrix next_obs;
  Vector not_done;
  Matrix reference;

  int size() const { return static_cast<int>(reward.size()); }
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ValidationError("replay buffer capacity must be positive");
    data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
  }

  void add(Transition t) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(t));
    } else {
      data_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
  }

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return data_.at(i); }

  // Uniform sampling with replacement.
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const {
    if (data_.empty()) throw ValidationError("cannot sample from an empty replay buffer");
    std::vector<std::size_t> idx(batch);
    for (auto& i : idx) i = rng.index(data_.size());
    return idx;
  }

  Batch gather(const std::vector<std::size_t>& idx, const RunningNormalizer* norm) const {
    const Transition& first = data_.at(idx.front());
    const auto n = static_cast<Eigen::Index>(idx.size());
    Batch b;
    b.obs.resize(first.obs.size(), n);
    b.next_obs.resize(first.obs.size(), n);
    b.action.resize(first.action.size(), n);
    b.reference.resize(first.reference.size(), n);
    b.reward.resize(n);
    b.not_done.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Transition& t = data_.at(idx[static_cast<std::size_t>(j)]);
      b.obs.col(j) = norm ? norm->normalize(t.obs) : t.obs;
      b.next_obs.col(j) = norm ? norm->normalize(t.next_obs) : t.next_obs;
      b.action.col(j) = t.action;
      b.reference.col(j) = t.reference;
      b.reward[j] = t.reward;
      b.not_done[j] = t.terminal ? 0.0 : 1.0;
    }
    return b;
  }

  bool operator==(const ReplayBuffer& o) const {
    return capacity_ == o.capacity_ && next_ == o.next_ && data_ == o.data_;
  }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> data_;
};

}  // namespace overtake::rl
