// Downlink NOMA evaluation: per-cluster decoding order by equivalent-combined
// gain, intra/inter-cluster interference, SINR and achievable rates, the SIC
// cross-decoding audit, and feasibility checks for the full configuration.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "starnoma/channel.hpp"
#include "starnoma/linalg.hpp"

namespace starnoma {

// gamma_{k,u} as a per-user cluster id; every user belongs to exactly one
// cluster and no cluster may be empty.
struct ClusterAssignment {
  int clusters = 0;
  std::vector<int> of_user;  // cluster index per MU

  bool contains(int k, int u) const { return of_user[u] == k; }

  std::vector<std::vector<int>> members() const {
    std::vector<std::vector<int>> out(clusters);
    for (int u = 0; u < static_cast<int>(of_user.size()); ++u) out[of_user[u]].push_back(u);
    return out;
  }

  void validate() const {
    if (clusters <= 0) throw std::invalid_argument("ClusterAssignment: no clusters");
    std::vector<int> count(clusters, 0);
    for (int c : of_user) {
      if (c < 0 || c >= clusters) throw std::invalid_argument("ClusterAssignment: bad cluster id");
      ++count[c];
    }
    for (int k = 0; k < clusters; ++k)
      if (count[k] == 0)
        throw std::invalid_argument("ClusterAssignment: empty cluster " + std::to_string(k));
  }
};

// Per-cluster SIC order; position 0 decodes first (weakest equivalent gain).
struct DecodingOrder {
  std::vector<std::vector<int>> order;  // order[k] lists cluster k's members

  int position(int k, int u) const {
    const auto& o = order[k];
    for (int i = 0; i < static_cast<int>(o.size()); ++i)
      if (o[i] == u) return i;
    throw std::invalid_argument("DecodingOrder: MU not in cluster");
  }
};

struct ActiveBeamforming {
  std::vector<CMat> w;  // one N_b x 1 vector per cluster

  double total_power() const {
    double p = 0.0;
    for (const CMat& v : w) {
      const double n = frobenius_norm(v);
      p += n * n;
    }
    return p;
  }
};

struct NomaParams {
  double p0 = 0.0;     // per-user power allocation coefficient, 1/U
  double sigma2 = 0.0; // noise power, linear mW
  double p_max = 0.0;  // beam power budget, linear mW
  std::vector<double> r_min;  // per-user rate floor, bps/Hz

  static NomaParams with_defaults(int users, double sigma2, double p_max, double r_min) {
    NomaParams p;
    p.p0 = 1.0 / users;
    p.sigma2 = sigma2;
    p.p_max = p_max;
    p.r_min.assign(users, r_min);
    return p;
  }
};

inline double beam_power(const CMat& h_u, const CMat& w_k) { return std::norm(inner(h_u, w_k)); }

// Equivalent-combined channel gain: own beam power over inter-cluster
// interference plus noise. Independent of the decoding order.
inline double equivalent_gain(int u, int k, const std::vector<CMat>& hhat,
                              const ActiveBeamforming& beams, const ClusterAssignment& assignment,
                              const NomaParams& params) {
  double interference = 0.0;
  for (int kp = 0; kp < assignment.clusters; ++kp) {
    if (kp == k) continue;
    for (int up = 0; up < static_cast<int>(assignment.of_user.size()); ++up)
      if (assignment.contains(kp, up)) interference += beam_power(hhat[u], beams.w[kp]);
  }
  return beam_power(hhat[u], beams.w[k]) / (interference + params.sigma2);
}

// Sorts every cluster ascending by equivalent gain; ties fall back to MU index.
inline DecodingOrder decoding_order(const std::vector<CMat>& hhat, const ActiveBeamforming& beams,
                                    const ClusterAssignment& assignment, const NomaParams& params) {
  DecodingOrder d;
  d.order = assignment.members();
  for (int k = 0; k < assignment.clusters; ++k) {
    std::vector<double> gain(d.order[k].size());
    for (size_t i = 0; i < d.order[k].size(); ++i)
      gain[i] = equivalent_gain(d.order[k][i], k, hhat, beams, assignment, params);
    std::vector<size_t> idx(d.order[k].size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
      if (gain[a] != gain[b]) return gain[a] < gain[b];
      return d.order[k][a] < d.order[k][b];
    });
    std::vector<int> sorted(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) sorted[i] = d.order[k][idx[i]];
    d.order[k] = std::move(sorted);
  }
  return d;
}

// Residual same-cluster power after SIC: own beam power times the allocation
// coefficients of users decoded later.
inline double intra_interference(int k, int u, const std::vector<CMat>& hhat,
                                 const ActiveBeamforming& beams, const DecodingOrder& order,
                                 const NomaParams& params) {
  const int pos = order.position(k, u);
  double coeff = 0.0;
  for (int up : order.order[k])
    if (order.position(k, up) > pos) coeff += params.p0;
  return beam_power(hhat[u], beams.w[k]) * coeff;
}

inline double inter_interference(int k, int u, const std::vector<CMat>& hhat,
                                 const ActiveBeamforming& beams,
                                 const ClusterAssignment& assignment) {
  double sum = 0.0;
  for (int kp = 0; kp < assignment.clusters; ++kp) {
    if (kp == k) continue;
    for (int up = 0; up < static_cast<int>(assignment.of_user.size()); ++up)
      if (assignment.contains(kp, up)) sum += beam_power(hhat[u], beams.w[kp]);
  }
  return sum;
}

inline double sinr(int k, int u, const std::vector<CMat>& hhat, const ActiveBeamforming& beams,
                   const ClusterAssignment& assignment, const DecodingOrder& order,
                   const NomaParams& params) {
  if (!assignment.contains(k, u)) throw std::invalid_argument("sinr: MU not in cluster");
  const double signal = beam_power(hhat[u], beams.w[k]) * params.p0;
  const double intra = intra_interference(k, u, hhat, beams, order, params);
  const double inter = inter_interference(k, u, hhat, beams, assignment);
  return signal / (intra + inter + params.sigma2);
}

inline double rate(int k, int u, const std::vector<CMat>& hhat, const ActiveBeamforming& beams,
                   const ClusterAssignment& assignment, const DecodingOrder& order,
                   const NomaParams& params) {
  return std::log2(1.0 + sinr(k, u, hhat, beams, assignment, order, params));
}

// SINR of user u's signal when decoded at user v (later in the SIC chain):
// v's channel with the interference cut at u's decoding position.
inline double cross_sinr(int k, int v, int u, const std::vector<CMat>& hhat,
                         const ActiveBeamforming& beams, const ClusterAssignment& assignment,
                         const DecodingOrder& order, const NomaParams& params) {
  if (!assignment.contains(k, u) || !assignment.contains(k, v))
    throw std::invalid_argument("cross_sinr: MU outside cluster");
  if (order.position(k, v) < order.position(k, u))
    throw std::invalid_argument("cross_sinr: v must be decoded after u");
  const int pos_u = order.position(k, u);
  double coeff = 0.0;
  for (int up : order.order[k])
    if (order.position(k, up) > pos_u) coeff += params.p0;
  const double own = beam_power(hhat[v], beams.w[k]);
  const double signal = own * params.p0;
  const double intra = own * coeff;
  const double inter = inter_interference(k, v, hhat, beams, assignment);
  return signal / (intra + inter + params.sigma2);
}

struct SicViolation {
  int cluster = 0;
  int decoder = 0;  // v
  int source = 0;   // u
  double cross = 0.0;
  double own = 0.0;
};

struct SicReport {
  std::vector<SicViolation> violations;
  int pairs_checked = 0;

  bool clean() const { return violations.empty(); }
};

// Checks SINR_{k,v->u} >= SINR_{k,u} for every ordered in-cluster pair.
inline SicReport sic_audit(const std::vector<CMat>& hhat, const ActiveBeamforming& beams,
                           const ClusterAssignment& assignment, const DecodingOrder& order,
                           const NomaParams& params, double tolerance = 1e-12) {
  SicReport report;
  for (int k = 0; k < assignment.clusters; ++k) {
    const auto& seq = order.order[k];
    for (size_t iu = 0; iu < seq.size(); ++iu)
      for (size_t iv = iu + 1; iv < seq.size(); ++iv) {
        const int u = seq[iu];
        const int v = seq[iv];
        ++report.pairs_checked;
        const double lhs = cross_sinr(k, v, u, hhat, beams, assignment, order, params);
        const double rhs = sinr(k, u, hhat, beams, assignment, order, params);
        if (lhs < rhs * (1.0 - tolerance) - tolerance)
          report.violations.push_back({k, v, u, lhs, rhs});
      }
  }
  return report;
}

enum class Constraint { min_rate, power_budget, amplitude_range, energy_split, phase_range };

inline std::string constraint_name(Constraint c) {
  switch (c) {
    case Constraint::min_rate: return "min_rate";
    case Constraint::power_budget: return "power_budget";
    case Constraint::amplitude_range: return "amplitude_range";
    case Constraint::energy_split: return "energy_split";
    case Constraint::phase_range: return "phase_range";
  }
  return "unknown";
}

struct Evaluation {
  double sum_rate = 0.0;
  double min_rate = 0.0;
  std::vector<double> user_rate;
  std::vector<Constraint> violated;

  bool feasible() const { return violated.empty(); }
};

// Sum/min rate plus the violated-constraint list for a full configuration.
inline Evaluation objective_and_feasibility(const std::vector<CMat>& hhat,
                                            const ActiveBeamforming& beams,
                                            const ClusterAssignment& assignment,
                                            const DecodingOrder& order, const StarRisState& state,
                                            const NomaParams& params,
                                            double split_tolerance = 1e-9) {
  Evaluation ev;
  const int U = static_cast<int>(hhat.size());
  ev.user_rate.resize(U);
  ev.min_rate = std::numeric_limits<double>::infinity();
  bool rate_violated = false;
  for (int u = 0; u < U; ++u) {
    const int k = assignment.of_user[u];
    ev.user_rate[u] = rate(k, u, hhat, beams, assignment, order, params);
    ev.sum_rate += ev.user_rate[u];
    ev.min_rate = std::min(ev.min_rate, ev.user_rate[u]);
    rate_violated |= ev.user_rate[u] < params.r_min[u];
  }
  if (rate_violated) ev.violated.push_back(Constraint::min_rate);
  if (beams.total_power() > params.p_max) ev.violated.push_back(Constraint::power_budget);

  bool amplitude_bad = false, split_bad = false, phase_bad = false;
  for (int l = 0; l < state.surface_count(); ++l)
    for (size_t m = 0; m < state.beta_f[l].size(); ++m) {
      const double bf = state.beta_f[l][m];
      const double bb = state.beta_b[l][m];
      amplitude_bad |= bf < 0.0 || bf > 1.0 || bb < 0.0 || bb > 1.0;
      split_bad |= std::abs(bf + bb - 1.0) > split_tolerance;
      for (double th : {state.theta_f[l][m], state.theta_b[l][m]})
        phase_bad |= th < 0.0 || th >= kTwoPi;
    }
  if (amplitude_bad) ev.violated.push_back(Constraint::amplitude_range);
  if (split_bad) ev.violated.push_back(Constraint::energy_split);
  if (phase_bad) ev.violated.push_back(Constraint::phase_range);
  return ev;
}

}  // namespace starnoma
