// Episodic decision environment: a deployment and channel draw per episode,
// feasibility-projected beamforming actions, and the common min-rate reward.
#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "starnoma/channel.hpp"
#include "starnoma/geometry.hpp"
#include "starnoma/noma.hpp"
#include "starnoma/pairing.hpp"

namespace starnoma {

// Raw reals pair into complex beam entries; if the total power exceeds the
// budget every beam is rescaled onto the boundary, with a one-ulp nudge so
// the post-projection power never rounds above the budget.
inline ActiveBeamforming project_active_action(std::span<const double> raw, int antennas,
                                               int clusters, double p_max) {
  if (static_cast<int>(raw.size()) != 2 * antennas * clusters)
    throw std::invalid_argument("project_active_action: raw length mismatch");
  ActiveBeamforming beams;
  size_t i = 0;
  for (int k = 0; k < clusters; ++k) {
    CMat w(antennas, 1);
    for (int n = 0; n < antennas; ++n) {
      w(n, 0) = cplx{raw[i], raw[i + 1]};
      i += 2;
    }
    beams.w.push_back(std::move(w));
  }
  const double power = beams.total_power();
  if (power > p_max) {
    double scale = std::sqrt(p_max / power);
    for (CMat& w : beams.w) w *= scale;
    while (beams.total_power() > p_max)
      for (CMat& w : beams.w) w *= 1.0 - 1e-15;
  }
  return beams;
}

// Per element: one split logit and two raw phase angles. The logistic split
// makes the amplitude pair sum to one by construction.
inline StarRisState project_passive_action(std::span<const double> raw, int surfaces,
                                           int elements) {
  if (static_cast<int>(raw.size()) != surfaces * elements * 3)
    throw std::invalid_argument("project_passive_action: raw length mismatch");
  StarRisState s;
  s.beta_f.assign(surfaces, std::vector<double>(elements));
  s.beta_b.assign(surfaces, std::vector<double>(elements));
  s.theta_f.assign(surfaces, std::vector<double>(elements));
  s.theta_b.assign(surfaces, std::vector<double>(elements));
  size_t i = 0;
  for (int l = 0; l < surfaces; ++l)
    for (int m = 0; m < elements; ++m) {
      const double bf = 1.0 / (1.0 + std::exp(-raw[i]));
      s.beta_f[l][m] = bf;
      s.beta_b[l][m] = 1.0 - bf;
      s.theta_f[l][m] = wrap_phase(raw[i + 1]);
      s.theta_b[l][m] = wrap_phase(raw[i + 2]);
      i += 3;
    }
  return s;
}

struct EnvSettings {
  Layout layout;               // fixture or sampling template
  bool randomize_positions = false;
  ChannelParams channel;
  int clusters = 4;
  double sigma2_mw = 1e-3;     // -100 dBm/Hz over 10 MHz
  double p_max_mw = 100.0;     // 20 dBm
  double r_min = 0.1;
  double obs_channel_scale = 1e4;  // lifts channel entries into the net's working range
  bool per_step_fading = false;
};

// Observation layout: pairing matrix (K*U), previous beams (2*N_b*K),
// previous surface coefficients (beta, cos/sin phase per side: 6 per
// element), then the combined channels under the previous coefficients
// (2*N_b*U, scaled).
class BeamformingEnv {
 public:
  explicit BeamformingEnv(EnvSettings settings) : cfg_(std::move(settings)) {
    if (cfg_.layout.user_count() < cfg_.clusters)
      throw std::invalid_argument("BeamformingEnv: fewer users than clusters");
    elements_ = cfg_.layout.surfaces.empty() ? 0 : cfg_.layout.surfaces[0].element_count();
    for (const Surface& s : cfg_.layout.surfaces)
      if (s.element_count() != elements_)
        throw std::invalid_argument("BeamformingEnv: surfaces must share an element count");
    params_ = NomaParams::with_defaults(cfg_.layout.user_count(), cfg_.sigma2_mw, cfg_.p_max_mw,
                                        cfg_.r_min);
  }

  const EnvSettings& settings() const { return cfg_; }
  int users() const { return cfg_.layout.user_count(); }
  int surfaces() const { return cfg_.layout.surface_count(); }
  int elements_per_surface() const { return elements_; }
  int omega_action_size() const { return 2 * cfg_.channel.ap_antennas * cfg_.clusters; }
  int phi_action_size() const { return surfaces() * elements_ * 3; }

  int observation_size() const {
    return cfg_.clusters * users() + omega_action_size() + 6 * surfaces() * elements_ +
           2 * cfg_.channel.ap_antennas * users();
  }

  // Starts an episode: deployment, channel draw, pairing under the neutral
  // surface state, and zero previous actions. Takes its own rng so episode
  // streams stay independent of the caller's draws. Random deployments are
  // redrawn until every MU has at least one path to the AP; a MU with no
  // path has an identically zero channel and an undefined pairing.
  std::vector<double> reset(Rng rng) {
    if (cfg_.randomize_positions) {
      for (;;) {
        layout_ = sample_deployment(rng, cfg_.layout);
        try {
          adjacency_ = compute_adjacency(layout_);
        } catch (const std::domain_error&) {
          continue;
        }
        if (all_users_reachable(adjacency_)) break;
      }
    } else {
      layout_ = cfg_.layout;
      adjacency_ = compute_adjacency(layout_);
    }
    Rng channel_rng = rng.derive(1);
    channel_ = sample_channels(layout_, adjacency_, cfg_.channel, channel_rng);
    state_ = StarRisState::neutral(surfaces(), elements_);
    beams_ = ActiveBeamforming{};
    for (int k = 0; k < cfg_.clusters; ++k) beams_.w.push_back(CMat(cfg_.channel.ap_antennas, 1));
    hhat_ = combined_channels(channel_, adjacency_, state_);
    Rng pairing_rng = rng.derive(2);
    assignment_ = kmeans_pairing(hhat_, cfg_.clusters, pairing_rng);
    step_rng_ = rng.derive(3);
    return observation();
  }

  struct StepResult {
    std::vector<double> obs;
    double reward = 0.0;
    Evaluation eval;
  };

  // Applies projected actions. Feasibility is asserted on every call.
  StepResult step(const ActiveBeamforming& beams, const StarRisState& state) {
    require_feasible(beams, state);
    beams_ = beams;
    state_ = state;
    if (cfg_.per_step_fading)
      channel_ = sample_channels(layout_, adjacency_, cfg_.channel, step_rng_);
    hhat_ = combined_channels(channel_, adjacency_, state_);
    const DecodingOrder order = decoding_order(hhat_, beams_, assignment_, params_);
    StepResult r;
    r.eval = objective_and_feasibility(hhat_, beams_, assignment_, order, state_, params_);
    r.reward = r.eval.min_rate;
    r.obs = observation();
    return r;
  }

  const Layout& layout() const { return layout_; }
  const AdjacencyIndicators& adjacency() const { return adjacency_; }
  const ClusterAssignment& assignment() const { return assignment_; }
  const ChannelRealization& channel() const { return channel_; }
  const std::vector<CMat>& combined() const { return hhat_; }
  const ActiveBeamforming& beams() const { return beams_; }
  const StarRisState& surface_state() const { return state_; }
  const NomaParams& noma_params() const { return params_; }

 private:
  static bool all_users_reachable(const AdjacencyIndicators& adj) {
    for (size_t u = 0; u < adj.ap_mu.size(); ++u) {
      bool reachable = adj.ap_mu[u] != 0;
      for (size_t l = 0; l < adj.ap_surface.size() && !reachable; ++l)
        reachable = adj.ap_surface[l] != 0 &&
                    (adj.surface_mu_f[l][u] != 0 || adj.surface_mu_b[l][u] != 0);
      if (!reachable) return false;
    }
    return true;
  }

  void require_feasible(const ActiveBeamforming& beams, const StarRisState& state) const {
    if (beams.total_power() > cfg_.p_max_mw)
      throw std::invalid_argument("BeamformingEnv::step: beam power above budget");
    for (int l = 0; l < state.surface_count(); ++l)
      for (size_t m = 0; m < state.beta_f[l].size(); ++m) {
        if (std::abs(state.beta_f[l][m] + state.beta_b[l][m] - 1.0) > 1e-12)
          throw std::invalid_argument("BeamformingEnv::step: energy split violated");
        for (double th : {state.theta_f[l][m], state.theta_b[l][m]})
          if (th < 0.0 || th >= kTwoPi)
            throw std::invalid_argument("BeamformingEnv::step: phase outside [0, 2pi)");
      }
  }

  std::vector<double> observation() const {
    std::vector<double> obs;
    obs.reserve(observation_size());
    for (int k = 0; k < cfg_.clusters; ++k)
      for (int u = 0; u < users(); ++u) obs.push_back(assignment_.contains(k, u) ? 1.0 : 0.0);
    for (const CMat& w : beams_.w)
      for (cplx z : w.entries()) {
        obs.push_back(z.real());
        obs.push_back(z.imag());
      }
    for (int l = 0; l < surfaces(); ++l)
      for (int m = 0; m < elements_; ++m) {
        obs.push_back(state_.beta_f[l][m]);
        obs.push_back(std::cos(state_.theta_f[l][m]));
        obs.push_back(std::sin(state_.theta_f[l][m]));
        obs.push_back(state_.beta_b[l][m]);
        obs.push_back(std::cos(state_.theta_b[l][m]));
        obs.push_back(std::sin(state_.theta_b[l][m]));
      }
    for (const CMat& h : hhat_)
      for (cplx z : h.entries()) {
        obs.push_back(cfg_.obs_channel_scale * z.real());
        obs.push_back(cfg_.obs_channel_scale * z.imag());
      }
    return obs;
  }

  EnvSettings cfg_;
  int elements_ = 0;
  NomaParams params_;
  Layout layout_;
  AdjacencyIndicators adjacency_;
  ChannelRealization channel_;
  StarRisState state_;
  ActiveBeamforming beams_;
  std::vector<CMat> hhat_;
  ClusterAssignment assignment_;
  Rng step_rng_{0};
};

}  // namespace starnoma
