#pragma once

#include <cmath>

#include "overtake/rl/mlp.hpp"

namespace overtake::rl {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction over every weight and bias of one network.
class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, AdamConfig cfg) : cfg_(cfg), m_(net.zero_grad()), v_(net.zero_grad()) {}

  void step(Mlp& net, const MlpGrad& g) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
      m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * grad;
      v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
      param.array() -= cfg_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg_.eps);
    };
    for (std::size_t l = 0; l < g.dW.size(); ++l) {
      update(net.weights()[l], g.dW[l], m_.dW[l], v_.dW[l]);
      update(net.biases()[l], g.db[l], m_.db[l], v_.db[l]);
    }
  }

  long steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  MlpGrad m_;
  MlpGrad v_;
  long t_ = 0;
};

}  // namespace overtake::rl
