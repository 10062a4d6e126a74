// Flat text checkpoints: layer sizes followed by hexfloat parameters, one
// section per network, exact on round trip.
#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "starnoma/channel.hpp"  // hexfloat helpers
#include "starnoma/train.hpp"

namespace starnoma {

namespace detail {

inline void put_vector(std::ostream& os, const std::vector<double>& v) {
  os << v.size();
  for (double x : v) {
    os << ' ';
    put_double(os, x);
  }
  os << '\n';
}

inline std::vector<double> get_vector(std::istream& is) {
  size_t n = 0;
  if (!(is >> n)) throw std::runtime_error("checkpoint: truncated vector header");
  std::vector<double> v(n);
  for (double& x : v) x = get_double(is);
  return v;
}

inline void put_mlp(std::ostream& os, const Mlp& net) {
  os << net.sizes.size();
  for (int s : net.sizes) os << ' ' << s;
  os << '\n';
  for (size_t i = 0; i < net.w.size(); ++i) {
    put_vector(os, net.w[i]);
    put_vector(os, net.b[i]);
  }
}

inline Mlp get_mlp(std::istream& is) {
  size_t n = 0;
  if (!(is >> n) || n < 2) throw std::runtime_error("checkpoint: bad layer count");
  Mlp net;
  net.sizes.resize(n);
  for (int& s : net.sizes) is >> s;
  for (size_t i = 0; i + 1 < n; ++i) {
    net.w.push_back(get_vector(is));
    net.b.push_back(get_vector(is));
    if (net.w.back().size() != static_cast<size_t>(net.sizes[i]) * net.sizes[i + 1] ||
        net.b.back().size() != static_cast<size_t>(net.sizes[i + 1]))
      throw std::runtime_error("checkpoint: parameter count does not match layer sizes");
  }
  return net;
}

}  // namespace detail

inline void save_agents(std::ostream& os, const TrainResult& result) {
  os << "starnoma_checkpoint v1\n";
  os << algorithm_name(result.algorithm) << ' ' << result.agents.size() << '\n';
  for (const Agent& a : result.agents) {
    detail::put_mlp(os, a.policy.mean);
    detail::put_vector(os, a.policy.log_std);
    detail::put_mlp(os, a.critic);
  }
}

struct LoadedAgents {
  Algorithm algorithm = Algorithm::random_policy;
  std::vector<Agent> agents;
};

inline LoadedAgents load_agents(std::istream& is) {
  std::string tag, version;
  is >> tag >> version;
  if (tag != "starnoma_checkpoint" || version != "v1")
    throw std::runtime_error("checkpoint: unrecognized header");
  LoadedAgents out;
  std::string algo;
  size_t count = 0;
  is >> algo >> count;
  out.algorithm = algorithm_from_name(algo);
  for (size_t i = 0; i < count; ++i) {
    Agent a;
    a.policy.mean = detail::get_mlp(is);
    a.policy.log_std = detail::get_vector(is);
    a.critic = detail::get_mlp(is);
    a.policy_opt = Adam(Agent::policy_parameter_refs(a));
    a.critic_opt = Adam(parameter_refs(a.critic));
    out.agents.push_back(std::move(a));
  }
  return out;
}

}  // namespace starnoma
