#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "overtake/rng.hpp"
#include "overtake/sim/vehicle.hpp"

namespace overtake::rl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { Tanh, Relu, Identity };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Identity: return "identity";
  }
  return "tanh";
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  if (s == "identity") return Activation::Identity;
  throw ValidationError("unknown activation '" + s + "'");
}

// Layer sizes from input to output. Hidden layers use `hidden`; the output is
// linear unless `squash` applies tanh, which bounds every output to (-1, 1).
struct MlpSpec {
  std::vector<int> sizes;
  Activation hidden = Activation::Tanh;
  bool squash = false;

  int inputs() const { return sizes.front(); }
  int outputs() const { return sizes.back(); }
  int layers() const { return static_cast<int>(sizes.size()) - 1; }

  void validate() const {
    if (sizes.size() < 2) throw ValidationError("network needs at least input and output sizes");
    for (int s : sizes) {
      if (s <= 0) throw ValidationError("network layer sizes must be positive");
    }
  }

  bool operator==(const MlpSpec&) const = default;
};

// Activations per layer for one batched forward pass; columns are samples.
struct MlpTape {
  std::vector<Matrix> a;  // a[0] input, a[i] output of layer i
};

struct MlpGrad {
  std::vector<Matrix> dW;
  std::vector<Vector> db;

  void set_zero() {
    for (auto& w : dW) w.setZero();
    for (auto& b : db) b.setZero();
  }
};

class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(MlpSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    for (int l = 0; l < spec_.layers(); ++l) {
      W_.push_back(Matrix::Zero(spec_.sizes[l + 1], spec_.sizes[l]));
      b_.push_back(Vector::Zero(spec_.sizes[l + 1]));
    }
  }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  void init(Rng& rng) {
    for (int l = 0; l < spec_.layers(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(spec_.sizes[l]));
      for (Eigen::Index j = 0; j < W_[l].cols(); ++j) {
        for (Eigen::Index i = 0; i < W_[l].rows(); ++i) W_[l](i, j) = rng.uniform(-bound, bound);
      }
      for (Eigen::Index i = 0; i < b_[l].size(); ++i) b_[l][i] = rng.uniform(-bound, bound);
    }
  }

  const MlpSpec& spec() const { return spec_; }
  std::vector<Matrix>& weights() { return W_; }
  std::vector<Vector>& biases() { return b_; }
  const std::vector<Matrix>& weights() const { return W_; }
  const std::vector<Vector>& biases() const { return b_; }

  Matrix forward(const Matrix& x, MlpTape* tape = nullptr) const {
    return run(x, tape, spec_.squash);
  }

  // Output layer before the squashing nonlinearity.
  Matrix forward_presquash(const Matrix& x) const { return run(x, nullptr, false); }

  Vector forward(const Vector& x) const { return forward(Matrix(x)).col(0); }

  // Reverse pass for dL/d(output) `dy`. Parameter gradients are accumulated
  // into `grad` when given; the input gradient is returned.
  Matrix backward(const MlpTape& tape, const Matrix& dy, MlpGrad* grad) const {
    const int n = spec_.layers();
    if (static_cast<int>(tape.a.size()) != n + 1) throw ValidationError("tape does not match network");
    Matrix delta = dy;
    for (int l = n - 1; l >= 0; --l) {
      const Matrix& out = tape.a[static_cast<std::size_t>(l + 1)];
      const Activation act = l == n - 1 ? (spec_.squash ? Activation::Tanh : Activation::Identity)
                                        : spec_.hidden;
      apply_derivative(act, out, delta);
      const Matrix& in = tape.a[static_cast<std::size_t>(l)];
      if (grad) {
        grad->dW[static_cast<std::size_t>(l)].noalias() += delta * in.transpose();
        grad->db[static_cast<std::size_t>(l)].noalias() += delta.rowwise().sum();
      }
      Matrix prev = W_[static_cast<std::size_t>(l)].transpose() * delta;
      delta = std::move(prev);
    }
    return delta;
  }

  MlpGrad zero_grad() const {
    MlpGrad g;
    for (const auto& w : W_) g.dW.push_back(Matrix::Zero(w.rows(), w.cols()));
    for (const auto& b : b_) g.db.push_back(Vector::Zero(b.size()));
    return g;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < W_.size(); ++l) n += static_cast<std::size_t>(W_[l].size() + b_[l].size());
    return n;
  }

  // Layer by layer: weights (column-major) then biases.
  Vector flatten() const {
    Vector v(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < W_.size(); ++l) {
      v.segment(k, W_[l].size()) = Eigen::Map<const Vector>(W_[l].data(), W_[l].size());
      k += W_[l].size();
      v.segment(k, b_[l].size()) = b_[l];
      k += b_[l].size();
    }
    return v;
  }

  void unflatten(const Vector& v) {
    if (static_cast<std::size_t>(v.size()) != parameter_count()) {
      throw ValidationError("parameter vector has " + std::to_string(v.size()) + " entries, expected " +
                            std::to_string(parameter_count()));
    }
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < W_.size(); ++l) {
      Eigen::Map<Vector>(W_[l].data(), W_[l].size()) = v.segment(k, W_[l].size());
      k += W_[l].size();
      b_[l] = v.segment(k, b_[l].size());
      k += b_[l].size();
    }
  }

  static Vector flatten(const MlpGrad& g) {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < g.dW.size(); ++l) n += g.dW[l].size() + g.db[l].size();
    Vector v(n);
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < g.dW.size(); ++l) {
      v.segment(k, g.dW[l].size()) = Eigen::Map<const Vector>(g.dW[l].data(), g.dW[l].size());
      k += g.dW[l].size();
      v.segment(k, g.db[l].size()) = g.db[l];
      k += g.db[l].size();
    }
    return v;
  }

  // this <- tau * src + (1 - tau) * this
  void soft_update_from(const Mlp& src, double tau) {
    for (std::size_t l = 0; l < W_.size(); ++l) {
      W_[l] = tau * src.W_[l] + (1.0 - tau) * W_[l];
      b_[l] = tau * src.b_[l] + (1.0 - tau) * b_[l];
    }
  }

  bool operator==(const Mlp& o) const {
    if (!(spec_ == o.spec_)) return false;
    for (std::size_t l = 0; l < W_.size(); ++l) {
      if (W_[l] != o.W_[l] || b_[l] != o.b_[l]) return false;
    }
    return true;
  }

 private:
  Matrix run(const Matrix& x, MlpTape* tape, bool squash) const {
    if (x.rows() != spec_.inputs()) {
      throw ValidationError("network input has " + std::to_string(x.rows()) + " features, expected " +
                            std::to_string(spec_.inputs()));
    }
    const int n = spec_.layers();
    if (tape) {
      tape->a.clear();
      tape->a.push_back(x);
    }
    Matrix h = x;
    for (int l = 0; l < n; ++l) {
      Matrix z = W_[static_cast<std::size_t>(l)] * h;
      z.colwise() += b_[static_cast<std::size_t>(l)];
      const Activation act =
          l == n - 1 ? (squash ? Activation::Tanh : Activation::Identity) : spec_.hidden;
      apply(act, z);
      if (tape) tape->a.push_back(z);
      h = std::move(z);
    }
    return h;
  }

  static void apply(Activation act, Matrix& z) {
    switch (act) {
      // 1 - 2 / (e^{2z} + 1): vectorises through exp and saturates cleanly.
      case Activation::Tanh: z = (1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0)).matrix(); break;
      case Activation::Relu: z = z.cwiseMax(0.0); break;
      case Activation::Identity: break;
    }
  }

  // Multiplies `delta` by the activation derivative expressed through the
  // layer output.
  static void apply_derivative(Activation act, const Matrix& out, Matrix& delta) {
    switch (act) {
      case Activation::Tanh: delta.array() *= 1.0 - out.array().square(); break;
      case Activation::Relu: delta.array() *= (out.array() > 0.0).cast<double>(); break;
      case Activation::Identity: break;
    }
  }

  MlpSpec spec_;
  std::vector<Matrix> W_;
  std::vector<Vector> b_;
};

}  // namespace overtake::rl
