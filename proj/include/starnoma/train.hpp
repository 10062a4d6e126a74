// Training loops: two-agent clipped-surrogate learning (one agent per
// decision variable), single-agent joint learning, the advantage-actor-critic
// baseline, and a non-learning random policy. One update per episode; the
// rollout's stored log-probabilities play the role of the frozen old policy.
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "starnoma/env.hpp"
#include "starnoma/gae.hpp"
#include "starnoma/mlp.hpp"
#include "starnoma/policy.hpp"

namespace starnoma {

enum class Algorithm { mappo, ppo, a2c, random_policy };

inline std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::mappo: return "mappo";
    case Algorithm::ppo: return "ppo";
    case Algorithm::a2c: return "a2c";
    case Algorithm::random_policy: return "random";
  }
  return "unknown";
}

inline Algorithm algorithm_from_name(const std::string& s) {
  if (s == "mappo") return Algorithm::mappo;
  if (s == "ppo") return Algorithm::ppo;
  if (s == "a2c") return Algorithm::a2c;
  if (s == "random") return Algorithm::random_policy;
  throw std::invalid_argument("unknown algorithm: " + s);
}

struct HyperParams {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double learning_rate = 3e-4;
  int minibatch = 64;
  int epochs = 4;
  int episodes = 500;
  int steps = 10;
  double reward_scale = 1.0;  // critic-side scaling; traces log raw rewards
  double log_std_init = 0.0;
  std::vector<int> hidden{256, 256};
};

struct Transition {
  std::vector<double> obs;
  std::vector<double> action;
  double logp = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool terminal = false;
};

struct EpisodeStats {
  double mean_reward = 0.0;
  double min_rate = 0.0;  // final step of the episode
  double sum_rate = 0.0;  // final step of the episode
};

struct Agent {
  GaussianPolicy policy;
  Mlp critic;
  Adam policy_opt;
  Adam critic_opt;

  static Agent create(int obs_size, int action_size, const HyperParams& hp, Rng policy_rng,
                      Rng critic_rng) {
    Agent a;
    a.policy = GaussianPolicy::create(obs_size, hp.hidden, action_size, policy_rng,
                                      hp.log_std_init);
    std::vector<int> critic_sizes;
    critic_sizes.push_back(obs_size);
    for (int h : hp.hidden) critic_sizes.push_back(h);
    critic_sizes.push_back(1);
    a.critic = Mlp::create(critic_sizes, critic_rng);
    a.policy_opt = Adam(policy_parameter_refs(a));
    a.critic_opt = Adam(parameter_refs(a.critic));
    return a;
  }

  static std::vector<std::vector<double>*> policy_parameter_refs(Agent& a) {
    auto refs = parameter_refs(a.policy.mean);
    refs.push_back(&a.policy.log_std);
    return refs;
  }
};

// Snapshot of a deterministic (mean-action) evaluation episode.
struct EvalSnapshot {
  StarRisState state;
  ActiveBeamforming beams;
  ClusterAssignment assignment;
  AdjacencyIndicators adjacency;
  std::vector<double> user_rates;
  double min_rate = 0.0;
  double sum_rate = 0.0;
};

struct TrainResult {
  Algorithm algorithm = Algorithm::random_policy;
  std::vector<Agent> agents;
  std::vector<EpisodeStats> trace;
  std::vector<size_t> transitions_per_agent;
  EvalSnapshot final_eval;
};

namespace detail {

// Per-agent episode memory plus the bootstrap value of the state after the
// final step.
struct Rollout {
  std::vector<Transition> memory;
  double bootstrap_value = 0.0;
};

inline void fisher_yates(std::vector<size_t>& idx, Rng& rng) {
  for (size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[rng.next_below(i)]);
}

inline void update_agent(Agent& agent, Rollout& roll, const HyperParams& hp,
                         PolicyObjective objective, Rng shuffle_rng) {
  const size_t n = roll.memory.size();
  std::vector<double> rewards(n), values(n + 1);
  RolloutBatch batch;
  for (size_t i = 0; i < n; ++i) {
    Transition& t = roll.memory[i];
    rewards[i] = t.reward * hp.reward_scale;
    values[i] = t.value;
    batch.obs.push_back(std::move(t.obs));
    batch.action.push_back(std::move(t.action));
    batch.logp_old.push_back(t.logp);
  }
  values[n] = roll.bootstrap_value;

  std::vector<double> adv = gae(rewards, values, hp.gamma, hp.gae_lambda);
  batch.value_target.resize(n);
  for (size_t i = 0; i < n; ++i) batch.value_target[i] = adv[i] + values[i];
  normalize_advantages(adv);
  batch.advantage = std::move(adv);

  const LossSettings cfg{hp.clip, hp.value_coef, hp.entropy_coef};
  const int epochs = objective == PolicyObjective::a2c ? 1 : hp.epochs;
  const size_t mb = objective == PolicyObjective::a2c
                        ? n
                        : std::min<size_t>(n, static_cast<size_t>(hp.minibatch));
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});

  for (int epoch = 0; epoch < epochs; ++epoch) {
    fisher_yates(idx, shuffle_rng);
    for (size_t start = 0; start < n; start += mb) {
      const size_t count = std::min(mb, n - start);
      PolicyGrad pg = PolicyGrad::zeros_like(agent.policy);
      MlpGrad cg = MlpGrad::zeros_like(agent.critic);
      policy_loss(batch, std::span<const size_t>(idx.data() + start, count), agent.policy,
                  agent.critic, cfg, objective, &pg, &cg);
      auto policy_grads = gradient_refs(pg.mean);
      policy_grads.push_back(&pg.log_std);
      agent.policy_opt.step(hp.learning_rate, Agent::policy_parameter_refs(agent), policy_grads);
      agent.policy.clamp_log_std();
      agent.critic_opt.step(hp.learning_rate, parameter_refs(agent.critic), gradient_refs(cg));
    }
  }
}

}  // namespace detail

// Runs one mean-action episode and captures the final configuration.
inline EvalSnapshot evaluate_deterministic(BeamformingEnv& env, std::vector<Agent>& agents,
                                           Algorithm algo, const HyperParams& hp, Rng rng) {
  std::vector<double> obs = env.reset(rng);
  Rng noise = rng.derive(77);
  EvalSnapshot snap;
  for (int n = 0; n < hp.steps; ++n) {
    std::vector<double> omega_raw, phi_raw;
    if (algo == Algorithm::random_policy) {
      omega_raw.resize(env.omega_action_size());
      phi_raw.resize(env.phi_action_size());
      for (double& x : omega_raw) x = noise.normal();
      for (double& x : phi_raw) x = noise.normal();
    } else if (algo == Algorithm::ppo) {
      const std::vector<double> joint = agents[0].policy.mean.forward(obs);
      omega_raw.assign(joint.begin(), joint.begin() + env.omega_action_size());
      phi_raw.assign(joint.begin() + env.omega_action_size(), joint.end());
    } else {
      omega_raw = agents[0].policy.mean.forward(obs);
      phi_raw = agents[1].policy.mean.forward(obs);
    }
    const ActiveBeamforming beams = project_active_action(
        omega_raw, env.settings().channel.ap_antennas, env.settings().clusters,
        env.settings().p_max_mw);
    const StarRisState state =
        project_passive_action(phi_raw, env.surfaces(), env.elements_per_surface());
    const auto sr = env.step(beams, state);
    if (n + 1 == hp.steps) {
      snap.user_rates = sr.eval.user_rate;
      snap.min_rate = sr.eval.min_rate;
      snap.sum_rate = sr.eval.sum_rate;
    }
    obs = sr.obs;
  }
  snap.state = env.surface_state();
  snap.beams = env.beams();
  snap.assignment = env.assignment();
  snap.adjacency = env.adjacency();
  return snap;
}

inline TrainResult train(Algorithm algo, const EnvSettings& env_cfg, const HyperParams& hp,
                         std::uint64_t seed) {
  BeamformingEnv env(env_cfg);
  const Rng root(seed);

  const int omega_sz = env.omega_action_size();
  const int phi_sz = env.phi_action_size();
  std::vector<int> action_sizes;
  if (algo == Algorithm::ppo)
    action_sizes = {omega_sz + phi_sz};
  else if (algo != Algorithm::random_policy)
    action_sizes = {omega_sz, phi_sz};

  TrainResult result;
  result.algorithm = algo;
  for (size_t i = 0; i < action_sizes.size(); ++i)
    result.agents.push_back(Agent::create(env.observation_size(), action_sizes[i], hp,
                                          root.derive(10 + i), root.derive(20 + i)));
  result.transitions_per_agent.assign(result.agents.size(), 0);

  std::vector<Rng> action_rng;
  for (size_t i = 0; i < std::max<size_t>(1, action_sizes.size()); ++i)
    action_rng.push_back(root.derive(30 + i));

  const PolicyObjective objective =
      algo == Algorithm::a2c ? PolicyObjective::a2c : PolicyObjective::ppo_clip;

  for (int e = 0; e < hp.episodes; ++e) {
    std::vector<double> obs = env.reset(root.derive(100).derive(e));

    std::vector<detail::Rollout> rolls(result.agents.size());
    double reward_sum = 0.0;
    EpisodeStats stats;
    for (int n = 0; n < hp.steps; ++n) {
      std::vector<double> omega_raw, phi_raw;
      std::vector<std::vector<double>> actions(result.agents.size());
      std::vector<double> logps(result.agents.size());
      std::vector<double> values(result.agents.size());
      for (size_t i = 0; i < result.agents.size(); ++i) {
        logps[i] = result.agents[i].policy.sample(obs, action_rng[i], actions[i]);
        values[i] = result.agents[i].critic.forward(obs)[0];
      }
      if (algo == Algorithm::random_policy) {
        omega_raw.resize(omega_sz);
        phi_raw.resize(phi_sz);
        for (double& x : omega_raw) x = action_rng[0].normal();
        for (double& x : phi_raw) x = action_rng[0].normal();
      } else if (algo == Algorithm::ppo) {
        omega_raw.assign(actions[0].begin(), actions[0].begin() + omega_sz);
        phi_raw.assign(actions[0].begin() + omega_sz, actions[0].end());
      } else {
        omega_raw = actions[0];
        phi_raw = actions[1];
      }

      const ActiveBeamforming beams =
          project_active_action(omega_raw, env_cfg.channel.ap_antennas, env_cfg.clusters,
                                env_cfg.p_max_mw);
      const StarRisState state = project_passive_action(phi_raw, env.surfaces(),
                                                        env.elements_per_surface());
      const auto sr = env.step(beams, state);
      reward_sum += sr.reward;
      if (n + 1 == hp.steps) {
        stats.min_rate = sr.eval.min_rate;
        stats.sum_rate = sr.eval.sum_rate;
      }

      for (size_t i = 0; i < result.agents.size(); ++i) {
        Transition t;
        t.obs = obs;
        t.action = actions[i];
        t.logp = logps[i];
        t.reward = sr.reward;  // raw common reward; scaling is applied at update time
        t.value = values[i];
        t.terminal = n + 1 == hp.steps;
        rolls[i].memory.push_back(std::move(t));
        ++result.transitions_per_agent[i];
      }
      obs = sr.obs;
    }
    stats.mean_reward = reward_sum / hp.steps;
    result.trace.push_back(stats);

    for (size_t i = 0; i < result.agents.size(); ++i) {
      rolls[i].bootstrap_value = result.agents[i].critic.forward(obs)[0];
      detail::update_agent(result.agents[i], rolls[i], hp, objective,
                           root.derive(200).derive(e).derive(i));
    }
  }

  result.final_eval = evaluate_deterministic(env, result.agents, algo, hp, root.derive(300));
  return result;
}

}  // namespace starnoma
