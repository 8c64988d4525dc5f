#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "overtake/rl/adam.hpp"
#include "overtake/rl/fading.hpp"
#include "overtake/rl/replay_buffer.hpp"

namespace overtake::rl {

struct Td3Config {
  std::vector<int> hidden{64, 64};
  Activation activation = Activation::Tanh;
  double gamma = 0.99;
  double tau = 0.005;
  int policy_delay = 2;
  double target_noise = 0.2;
  double target_noise_clip = 0.5;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("discount must lie in (0, 1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw ValidationError("target smoothing must lie in (0, 1]");
    if (policy_delay < 1) throw ValidationError("policy delay must be >= 1");
    if (!(actor_lr > 0.0 && critic_lr > 0.0)) throw ValidationError("learning rates must be > 0");
    if (target_noise < 0.0 || target_noise_clip < 0.0) throw ValidationError("target noise must be >= 0");
    for (int h : hidden) {
      if (h <= 0) throw ValidationError("hidden widths must be positive");
    }
  }
};

inline MlpSpec actor_spec(int obs_dim, int act_dim, const Td3Config& c) {
  MlpSpec s;
  s.sizes.push_back(obs_dim);
  s.sizes.insert(s.sizes.end(), c.hidden.begin(), c.hidden.end());
  s.sizes.push_back(act_dim);
  s.hidden = c.activation;
  s.squash = true;
  return s;
}

inline MlpSpec critic_spec(int obs_dim, int act_dim, const Td3Config& c) {
  MlpSpec s = actor_spec(obs_dim + act_dim, 1, c);
  s.squash = false;
  return s;
}

// Deterministic actor with twin critics and smoothed target copies.
struct Td3Agent {
  Td3Config config;
  Mlp actor, actor_target;
  Mlp critic1, critic2, critic1_target, critic2_target;
  Adam actor_opt, critic1_opt, critic2_opt;

  Td3Agent() = default;
  Td3Agent(int obs_dim, int act_dim, Td3Config cfg, Rng& init) : config(std::move(cfg)) {
    config.validate();
    actor = Mlp(actor_spec(obs_dim, act_dim, config));
    critic1 = Mlp(critic_spec(obs_dim, act_dim, config));
    critic2 = Mlp(critic_spec(obs_dim, act_dim, config));
    actor.init(init);
    critic1.init(init);
    critic2.init(init);
    actor_target = actor;
    critic1_target = critic1;
    critic2_target = critic2;
    actor_opt = Adam(actor, {config.actor_lr});
    critic1_opt = Adam(critic1, {config.critic_lr});
    critic2_opt = Adam(critic2, {config.critic_lr});
  }

  int obs_dim() const { return actor.spec().inputs(); }
  int act_dim() const { return actor.spec().outputs(); }

  bool operator==(const Td3Agent& o) const {
    return actor == o.actor && actor_target == o.actor_target && critic1 == o.critic1 &&
           critic2 == o.critic2 && critic1_target == o.critic1_target &&
           critic2_target == o.critic2_target;
  }
};

inline Matrix stack_rows(const Matrix& top, const Matrix& bottom) {
  Matrix m(top.rows() + bottom.rows(), top.cols());
  m << top, bottom;
  return m;
}

// y = r + gamma * (1 - done) * min(Q1', Q2') at the smoothed target action
// clip(actor'(s') + clip(noise, -c, c), -1, 1).
inline Vector critic_targets(const Td3Agent& agent, const Batch& b, const Matrix& noise) {
  const double c = agent.config.target_noise_clip;
  Matrix next_a = agent.actor_target.forward(b.next_obs) + noise.cwiseMax(-c).cwiseMin(c);
  next_a = next_a.cwiseMax(-1.0).cwiseMin(1.0);
  const Matrix x = stack_rows(b.next_obs, next_a);
  const Vector q1 = agent.critic1_target.forward(x).row(0).transpose();
  const Vector q2 = agent.critic2_target.forward(x).row(0).transpose();
  return b.reward + agent.config.gamma * b.not_done.cwiseProduct(q1.cwiseMin(q2));
}

struct CriticLosses {
  double q1 = 0.0;
  double q2 = 0.0;
};

inline Matrix sample_target_noise(const Td3Agent& agent, int batch, Rng& rng) {
  Matrix n(agent.act_dim(), batch);
  for (Eigen::Index j = 0; j < n.cols(); ++j) {
    for (Eigen::Index i = 0; i < n.rows(); ++i) n(i, j) = rng.normal(0.0, agent.config.target_noise);
  }
  return n;
}

// One gradient step on both critics against a fixed target vector.
inline CriticLosses critic_step(Td3Agent& agent, const Batch& b, const Vector& y) {
  const Matrix x = stack_rows(b.obs, b.action);
  const double inv_n = 1.0 / static_cast<double>(b.size());
  CriticLosses out;
  auto fit = [&](Mlp& net, Adam& opt, double& loss) {
    MlpTape tape;
    const Vector q = net.forward(x, &tape).row(0).transpose();
    const Vector err = q - y;
    loss = err.squaredNorm() * inv_n;
    MlpGrad g = net.zero_grad();
    const Matrix dq = (2.0 * inv_n * err).transpose();
    net.backward(tape, dq, &g);
    opt.step(net, g);
  };
  fit(agent.critic1, agent.critic1_opt, out.q1);
  fit(agent.critic2, agent.critic2_opt, out.q2);
  return out;
}

inline CriticLosses critic_update(Td3Agent& agent, const Batch& b, Rng& rng) {
  const Vector y = critic_targets(agent, b, sample_target_noise(agent, b.size(), rng));
  return critic_step(agent, b, y);
}

struct ActorLosses {
  double policy = 0.0;
  double guidance = 0.0;
  double beta = 0.0;
  double actor = 0.0;
};

// Minimises -mean Q1(s, pi(s)) + beta * MSE(pi(s), reference). `beta_for` sees
// the two loss terms before the step and returns the weight to apply. The
// guidance gradient is skipped entirely when beta is zero.
inline ActorLosses actor_update(Td3Agent& agent, const Batch& b,
                                const std::function<double(double, double)>& beta_for) {
  MlpTape actor_tape;
  const Matrix a = agent.actor.forward(b.obs, &actor_tape);
  MlpTape critic_tape;
  const Matrix q = agent.critic1.forward(stack_rows(b.obs, a), &critic_tape);
  const double inv_n = 1.0 / static_cast<double>(b.size());

  ActorLosses out;
  out.policy = -q.sum() * inv_n;
  out.guidance = guidance_loss(a, b.reference);
  out.beta = beta_for(out.policy, out.guidance);
  out.actor = actor_loss(out.policy, out.guidance, out.beta);

  const Matrix dq = Matrix::Constant(1, b.size(), -inv_n);
  const Matrix dx = agent.critic1.backward(critic_tape, dq, nullptr);
  Matrix da = dx.bottomRows(agent.act_dim());
  if (out.beta != 0.0) da += out.beta * guidance_loss_gradient(a, b.reference);
  MlpGrad g = agent.actor.zero_grad();
  agent.actor.backward(actor_tape, da, &g);
  agent.actor_opt.step(agent.actor, g);
  return out;
}

inline void soft_update_targets(Td3Agent& agent) {
  const double tau = agent.config.tau;
  agent.actor_target.soft_update_from(agent.actor, tau);
  agent.critic1_target.soft_update_from(agent.critic1, tau);
  agent.critic2_target.soft_update_from(agent.critic2, tau);
}

}  // namespace overtake::rl
