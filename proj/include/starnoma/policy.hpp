// Diagonal-Gaussian policy over continuous actions plus the clipped-surrogate
// and advantage-weighted losses with hand-written gradients.
#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "starnoma/mlp.hpp"

namespace starnoma {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 1.0;
inline constexpr double kHalfLog2Pi = 0.918938533204672741780329736406;  // ln(2*pi)/2

struct GaussianPolicy {
  Mlp mean;
  std::vector<double> log_std;  // per action dimension, clamped to [-5, 1]

  static GaussianPolicy create(int obs_size, const std::vector<int>& hidden, int action_size,
                               Rng& rng, double log_std_init = 0.0) {
    std::vector<int> sizes;
    sizes.push_back(obs_size);
    for (int h : hidden) sizes.push_back(h);
    sizes.push_back(action_size);
    GaussianPolicy p;
    p.mean = Mlp::create(sizes, rng);
    p.mean.scale_output_layer(0.01);  // start near-zero means
    p.log_std.assign(action_size, log_std_init);
    p.clamp_log_std();
    return p;
  }

  int action_size() const { return mean.output_size(); }

  void clamp_log_std() {
    for (double& v : log_std) v = std::fmin(kLogStdMax, std::fmax(kLogStdMin, v));
  }

  double log_prob_given_mean(std::span<const double> mu, std::span<const double> action) const {
    double lp = 0.0;
    for (size_t i = 0; i < log_std.size(); ++i) {
      const double sigma = std::exp(log_std[i]);
      const double z = (action[i] - mu[i]) / sigma;
      lp += -0.5 * z * z - log_std[i] - kHalfLog2Pi;
    }
    return lp;
  }

  // Draws an action in-place and returns its log-probability.
  double sample(std::span<const double> obs, Rng& rng, std::vector<double>& action) const {
    const std::vector<double> mu = mean.forward(obs);
    action.resize(mu.size());
    double lp = 0.0;
    for (size_t i = 0; i < mu.size(); ++i) {
      const double z = rng.normal();
      const double sigma = std::exp(log_std[i]);
      action[i] = mu[i] + sigma * z;
      lp += -0.5 * z * z - log_std[i] - kHalfLog2Pi;
    }
    return lp;
  }

  double log_prob(std::span<const double> obs, std::span<const double> action) const {
    const std::vector<double> mu = mean.forward(obs);
    return log_prob_given_mean(mu, action);
  }

  // Differential entropy; state-independent for a fixed log-std vector.
  double entropy() const {
    double e = 0.0;
    for (double ls : log_std) e += ls + 0.5 + kHalfLog2Pi;
    return e;
  }
};

struct PolicyGrad {
  MlpGrad mean;
  std::vector<double> log_std;

  static PolicyGrad zeros_like(const GaussianPolicy& p) {
    PolicyGrad g;
    g.mean = MlpGrad::zeros_like(p.mean);
    g.log_std.assign(p.log_std.size(), 0.0);
    return g;
  }
};

// Rollout data laid out per transition; advantages are expected normalized
// and value targets are lambda-returns.
struct RolloutBatch {
  std::vector<std::vector<double>> obs;
  std::vector<std::vector<double>> action;
  std::vector<double> logp_old;
  std::vector<double> advantage;
  std::vector<double> value_target;

  size_t size() const { return obs.size(); }
};

struct LossSettings {
  double clip = 0.2;          // epsilon; ignored for the a2c objective
  double value_coef = 0.5;    // c1
  double entropy_coef = 0.01; // c2
};

enum class PolicyObjective { ppo_clip, a2c };

// Loss over the selected transitions: mean of
//   -(surrogate) + c1 * (V - target)^2 - c2 * entropy,
// where the surrogate is min(r*A, clip(r)*A) for PPO and logp*A for A2C.
// When grad outputs are non-null the exact gradients are accumulated there.
inline double policy_loss(const RolloutBatch& batch, std::span<const size_t> indices,
                          const GaussianPolicy& policy, const Mlp& critic,
                          const LossSettings& cfg, PolicyObjective objective,
                          PolicyGrad* policy_grad = nullptr, MlpGrad* critic_grad = nullptr) {
  if (indices.empty()) throw std::invalid_argument("policy_loss: empty batch");
  const double inv_n = 1.0 / static_cast<double>(indices.size());
  double loss = 0.0;
  MlpTape tape;

  for (size_t idx : indices) {
    const auto& obs = batch.obs[idx];
    const auto& act = batch.action[idx];
    const double adv = batch.advantage[idx];

    const std::vector<double>& mu = forward(policy.mean, obs, tape);
    const double logp = policy.log_prob_given_mean(mu, act);

    double surrogate = 0.0;
    double dloss_dlogp = 0.0;
    if (objective == PolicyObjective::ppo_clip) {
      const double ratio = std::exp(logp - batch.logp_old[idx]);
      const double clipped = std::fmin(1.0 + cfg.clip, std::fmax(1.0 - cfg.clip, ratio));
      const double surr1 = ratio * adv;
      const double surr2 = clipped * adv;
      surrogate = std::fmin(surr1, surr2);
      if (surr1 <= surr2) dloss_dlogp = -adv * ratio * inv_n;
    } else {
      surrogate = logp * adv;
      dloss_dlogp = -adv * inv_n;
    }
    loss -= surrogate;

    if (policy_grad != nullptr && dloss_dlogp != 0.0) {
      std::vector<double> dmu(mu.size());
      for (size_t i = 0; i < mu.size(); ++i) {
        const double sigma = std::exp(policy.log_std[i]);
        const double z = (act[i] - mu[i]) / sigma;
        dmu[i] = dloss_dlogp * z / sigma;
        policy_grad->log_std[i] += dloss_dlogp * (z * z - 1.0);
      }
      backward(policy.mean, tape, dmu, policy_grad->mean);
    }

    const std::vector<double>& v = forward(critic, obs, tape);
    const double verr = v[0] - batch.value_target[idx];
    loss += cfg.value_coef * verr * verr;
    if (critic_grad != nullptr) {
      const double dv = 2.0 * cfg.value_coef * verr * inv_n;
      backward(critic, tape, std::span<const double>(&dv, 1), *critic_grad);
    }

    loss -= cfg.entropy_coef * policy.entropy();
    if (policy_grad != nullptr)
      for (size_t i = 0; i < policy.log_std.size(); ++i)
        policy_grad->log_std[i] -= cfg.entropy_coef * inv_n;
  }
  return loss * inv_n;
}

inline double ppo_loss(const RolloutBatch& batch, const GaussianPolicy& policy, const Mlp& critic,
                       const LossSettings& cfg) {
  std::vector<size_t> all(batch.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  return policy_loss(batch, all, policy, critic, cfg, PolicyObjective::ppo_clip);
}

inline double a2c_loss(const RolloutBatch& batch, const GaussianPolicy& policy, const Mlp& critic,
                       const LossSettings& cfg) {
  std::vector<size_t> all(batch.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  return policy_loss(batch, all, policy, critic, cfg, PolicyObjective::a2c);
}

inline void normalize_advantages(std::vector<double>& adv, double eps = 1e-8) {
  if (adv.empty()) return;
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(adv.size());
  const double inv = 1.0 / (std::sqrt(var) + eps);
  for (double& a : adv) a = (a - mean) * inv;
}

}  // namespace starnoma
