// Truncated generalized advantage estimation.
#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace starnoma {

// advantages[n] = sum_{i >= n} (gamma*lambda)^(i-n) * delta_i with
// delta_i = r_i + gamma*V(s_{i+1}) - V(s_i); values carries the bootstrap
// entry, so values.size() == rewards.size() + 1.
inline std::vector<double> gae(std::span<const double> rewards, std::span<const double> values,
                               double gamma, double lambda) {
  if (values.size() != rewards.size() + 1)
    throw std::invalid_argument("gae: values must have one more entry than rewards");
  const size_t n = rewards.size();
  std::vector<double> delta(n);
  for (size_t i = 0; i < n; ++i) delta[i] = rewards[i] + gamma * values[i + 1] - values[i];
  std::vector<double> adv(n, 0.0);
  for (size_t start = 0; start < n; ++start) {
    double weight = 1.0;
    for (size_t i = start; i < n; ++i) {
      adv[start] += weight * delta[i];
      weight *= gamma * lambda;
    }
  }
  return adv;
}

}  // namespace starnoma
