// Correlation-based K-means user pairing. The distance measure is the
// modulus of the normalized channel inner product; representatives are the
// members least correlated with the other clusters, and the loop stops when
// the representative set repeats.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "starnoma/linalg.hpp"
#include "starnoma/noma.hpp"
#include "starnoma/rng.hpp"

namespace starnoma {

inline double correlation(const CMat& hi, const CMat& hj) {
  const double ni = frobenius_norm(hi);
  const double nj = frobenius_norm(hj);
  if (ni == 0.0 || nj == 0.0) throw std::domain_error("correlation: zero-norm channel");
  return std::abs(inner(hi, hj)) / (ni * nj);
}

struct CorrelationMatrix {
  int users = 0;
  std::vector<double> cor;  // row-major U x U

  double operator()(int i, int j) const { return cor[static_cast<size_t>(i) * users + j]; }
};

inline CorrelationMatrix correlation_matrix(const std::vector<CMat>& hhat) {
  CorrelationMatrix m;
  m.users = static_cast<int>(hhat.size());
  m.cor.assign(static_cast<size_t>(m.users) * m.users, 0.0);
  for (int i = 0; i < m.users; ++i)
    for (int j = 0; j < m.users; ++j)
      m.cor[static_cast<size_t>(i) * m.users + j] = correlation(hhat[i], hhat[j]);
  return m;
}

// Total correlation between MU u and the members of every other cluster.
inline double cluster_correlation(int u, const std::vector<std::vector<int>>& clusters,
                                  const CorrelationMatrix& cor) {
  int own = -1;
  for (int k = 0; k < static_cast<int>(clusters.size()); ++k)
    for (int v : clusters[k])
      if (v == u) own = k;
  if (own < 0) throw std::invalid_argument("cluster_correlation: MU is unassigned");
  double sum = 0.0;
  for (int k = 0; k < static_cast<int>(clusters.size()); ++k) {
    if (k == own) continue;
    for (int v : clusters[k]) sum += cor(u, v);
  }
  return sum;
}

// Member of cluster k minimizing the cross-cluster correlation; ties fall to
// the lowest MU index.
inline int update_representative(int k, const std::vector<std::vector<int>>& clusters,
                                 const CorrelationMatrix& cor) {
  if (clusters[k].empty()) throw std::invalid_argument("update_representative: empty cluster");
  int best = -1;
  double best_cor = 0.0;
  for (int u : clusters[k]) {
    const double c = cluster_correlation(u, clusters, cor);
    if (best < 0 || c < best_cor || (c == best_cor && u < best)) {
      best = u;
      best_cor = c;
    }
  }
  return best;
}

namespace detail {

inline double intra_cluster_correlation(const std::vector<std::vector<int>>& clusters,
                                        const CorrelationMatrix& cor) {
  double sum = 0.0;
  for (const auto& members : clusters)
    for (size_t i = 0; i < members.size(); ++i)
      for (size_t j = i + 1; j < members.size(); ++j) sum += cor(members[i], members[j]);
  return sum;
}

// Relabels clusters by ascending minimal member index so the emitted ids do
// not depend on the random representative draw.
inline ClusterAssignment canonical_assignment(const std::vector<std::vector<int>>& clusters,
                                              int users) {
  std::vector<std::vector<int>> sorted = clusters;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  ClusterAssignment out;
  out.clusters = static_cast<int>(sorted.size());
  out.of_user.assign(users, -1);
  for (int k = 0; k < out.clusters; ++k)
    for (int u : sorted[k]) out.of_user[u] = k;
  out.validate();
  return out;
}

}  // namespace detail

inline constexpr int kPairingIterationCap = 100;

// K-means pairing: random distinct representatives, repeated max-correlation
// assignment and representative refresh until the representative set repeats.
// A cycle past the iteration cap returns the best assignment seen, ranked by
// total intra-cluster correlation.
inline ClusterAssignment kmeans_pairing(const std::vector<CMat>& hhat, int K, Rng& rng) {
  const int U = static_cast<int>(hhat.size());
  if (K < 1 || U < K) throw std::invalid_argument("kmeans_pairing: need U >= K >= 1");
  const CorrelationMatrix cor = correlation_matrix(hhat);

  // Distinct initial representatives via partial Fisher-Yates.
  std::vector<int> pool(U);
  for (int u = 0; u < U; ++u) pool[u] = u;
  std::vector<int> reps(K);
  for (int k = 0; k < K; ++k) {
    const int j = k + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(U - k)));
    std::swap(pool[k], pool[j]);
    reps[k] = pool[k];
  }

  std::vector<std::vector<int>> best_clusters;
  double best_score = -1.0;

  for (int iter = 0; iter < kPairingIterationCap; ++iter) {
    std::vector<std::vector<int>> clusters(K);
    for (int k = 0; k < K; ++k) clusters[k] = {reps[k]};

    for (int u = 0; u < U; ++u) {
      bool is_rep = false;
      for (int k = 0; k < K; ++k) is_rep |= reps[k] == u;
      if (is_rep) continue;
      int best_k = 0;
      for (int k = 1; k < K; ++k)
        if (cor(u, reps[k]) > cor(u, reps[best_k])) best_k = k;
      clusters[best_k].push_back(u);
    }
    for (auto& members : clusters) std::sort(members.begin(), members.end());

    const double score = detail::intra_cluster_correlation(clusters, cor);
    if (score > best_score) {
      best_score = score;
      best_clusters = clusters;
    }

    std::vector<int> next(K);
    for (int k = 0; k < K; ++k) next[k] = update_representative(k, clusters, cor);

    std::set<int> before(reps.begin(), reps.end());
    std::set<int> after(next.begin(), next.end());
    if (before == after) return detail::canonical_assignment(clusters, U);
    reps = std::move(next);
  }
  return detail::canonical_assignment(best_clusters, U);
}

}  // namespace starnoma
