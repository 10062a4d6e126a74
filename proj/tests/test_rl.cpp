#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "starnoma/env.hpp"
#include "starnoma/gae.hpp"
#include "starnoma/mlp.hpp"
#include "starnoma/policy.hpp"

using namespace starnoma;

namespace {

std::vector<double> random_vector(Rng& rng, int n, double lo = -1, double hi = 1) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Plain matrix-vector oracle for the forward pass.
std::vector<double> forward_oracle(const Mlp& net, const std::vector<double>& input) {
  std::vector<double> cur = input;
  for (int layer = 0; layer < net.layer_count(); ++layer) {
    const int rows = net.sizes[layer + 1];
    const int cols = net.sizes[layer];
    std::vector<double> next(rows);
    for (int r = 0; r < rows; ++r) {
      double acc = net.b[layer][r];
      for (int c = 0; c < cols; ++c) acc += net.w[layer][r * cols + c] * cur[c];
      next[r] = layer + 1 < net.layer_count() ? 0.0 : acc;
      if (layer + 1 < net.layer_count()) next[r] = std::tanh(acc);
    }
    cur = next;
  }
  return cur;
}

std::vector<std::vector<double>*> all_params(Mlp& net) { return parameter_refs(net); }

}  // namespace

TEST_CASE("mlp forward special cases") {
  Rng rng(71);
  Mlp net = Mlp::create({3, 2}, rng);
  for (double& x : net.w[0]) x = 0.0;
  net.b[0] = {0.5, -1.25};
  const auto out = net.forward(std::vector<double>{1, 2, 3});
  CHECK(out == std::vector<double>{0.5, -1.25});

  Mlp id = Mlp::create({2, 2}, rng);
  id.w[0] = {1, 0, 0, 1};
  id.b[0] = {0, 0};
  const auto echoed = id.forward(std::vector<double>{0.3, -0.7});
  CHECK(echoed[0] == Catch::Approx(0.3));
  CHECK(echoed[1] == Catch::Approx(-0.7));

  CHECK_THROWS_AS(net.forward(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("mlp forward matches the oracle") {
  Rng rng(72);
  const Mlp net = Mlp::create({5, 7, 6, 3}, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const auto input = random_vector(rng, 5);
    const auto got = net.forward(input);
    const auto want = forward_oracle(net, input);
    for (int i = 0; i < 3; ++i) CHECK(got[i] == Catch::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("backward: linear net analytic gradient") {
  Rng rng(73);
  Mlp net = Mlp::create({3, 2}, rng);
  const std::vector<double> x{0.4, -1.2, 2.0};
  const std::vector<double> target{1.0, -1.0};
  MlpTape tape;
  const auto& y = forward(net, x, tape);
  // loss = sum (y - t)^2; dL/dy = 2(y - t); dL/dW_rc = dL/dy_r * x_c.
  std::vector<double> dy(2);
  for (int r = 0; r < 2; ++r) dy[r] = 2 * (y[r] - target[r]);
  MlpGrad grad = MlpGrad::zeros_like(net);
  backward(net, tape, dy, grad);
  for (int r = 0; r < 2; ++r) {
    CHECK(grad.b[0][r] == Catch::Approx(dy[r]).epsilon(1e-12));
    for (int c = 0; c < 3; ++c)
      CHECK(grad.w[0][r * 3 + c] == Catch::Approx(dy[r] * x[c]).epsilon(1e-12));
  }
}

TEST_CASE("backward: finite differences across a deep net") {
  Rng rng(74);
  Mlp net = Mlp::create({4, 6, 5, 2}, rng);
  const std::vector<double> x = random_vector(rng, 4);
  const std::vector<double> target = random_vector(rng, 2);

  const auto loss_of = [&](const Mlp& n) {
    const auto y = n.forward(x);
    double l = 0;
    for (int i = 0; i < 2; ++i) l += (y[i] - target[i]) * (y[i] - target[i]);
    return l;
  };

  MlpTape tape;
  const auto& y = forward(net, x, tape);
  std::vector<double> dy(2);
  for (int i = 0; i < 2; ++i) dy[i] = 2 * (y[i] - target[i]);
  MlpGrad grad = MlpGrad::zeros_like(net);
  backward(net, tape, dy, grad);

  const double h = 1e-5;
  for (int layer = 0; layer < net.layer_count(); ++layer) {
    for (size_t i = 0; i < net.w[layer].size(); ++i) {
      Mlp probe = net;
      probe.w[layer][i] += h;
      const double lp = loss_of(probe);
      probe.w[layer][i] -= 2 * h;
      const double lm = loss_of(probe);
      const double fd = (lp - lm) / (2 * h);
      const double an = grad.w[layer][i];
      CHECK(std::abs(fd - an) <= 1e-4 * std::max({std::abs(fd), std::abs(an), 1e-8}));
    }
    for (size_t i = 0; i < net.b[layer].size(); ++i) {
      Mlp probe = net;
      probe.b[layer][i] += h;
      const double lp = loss_of(probe);
      probe.b[layer][i] -= 2 * h;
      const double lm = loss_of(probe);
      const double fd = (lp - lm) / (2 * h);
      const double an = grad.b[layer][i];
      CHECK(std::abs(fd - an) <= 1e-4 * std::max({std::abs(fd), std::abs(an), 1e-8}));
    }
  }
}

TEST_CASE("backward: zero output gradient gives zero parameter gradients") {
  Rng rng(75);
  Mlp net = Mlp::create({3, 4, 2}, rng);
  MlpTape tape;
  forward(net, std::vector<double>{1, 2, 3}, tape);
  MlpGrad grad = MlpGrad::zeros_like(net);
  backward(net, tape, std::vector<double>{0, 0}, grad);
  for (const auto& v : grad.w)
    for (double g : v) CHECK(g == 0.0);
  for (const auto& v : grad.b)
    for (double g : v) CHECK(g == 0.0);
}

TEST_CASE("gae closed forms and oracle") {
  {
    const std::vector<double> rewards{1.0};
    const std::vector<double> values{0.0, 0.0};
    const auto adv = gae(rewards, values, 0.99, 0.95);
    REQUIRE(adv.size() == 1);
    CHECK(adv[0] == Catch::Approx(1.0));
  }
  {
    const std::vector<double> rewards{1.0, 2.0, 3.0};
    const std::vector<double> values{0.0, 0.0, 0.0, 0.0};
    const auto adv = gae(rewards, values, 1.0, 1.0);
    CHECK(adv[0] == Catch::Approx(6.0));
    CHECK(adv[1] == Catch::Approx(5.0));
    CHECK(adv[2] == Catch::Approx(3.0));
  }
  Rng rng(76);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(12));
    const auto rewards = random_vector(rng, n, -2, 2);
    const auto values = random_vector(rng, n + 1, -2, 2);
    const double gamma = rng.uniform(0.5, 1.0);
    const double lambda = rng.uniform(0.5, 1.0);
    const auto adv = gae(rewards, values, gamma, lambda);
    // Backward-recursion oracle.
    std::vector<double> want(n);
    double acc = 0;
    for (int i = n - 1; i >= 0; --i) {
      const double delta = rewards[i] + gamma * values[i + 1] - values[i];
      acc = delta + gamma * lambda * acc;
      want[i] = acc;
    }
    for (int i = 0; i < n; ++i) CHECK(adv[i] == Catch::Approx(want[i]).margin(1e-12));
  }
  CHECK_THROWS_AS(gae(std::vector<double>{1.0}, std::vector<double>{0.0}, 0.9, 0.9),
                  std::invalid_argument);
}

namespace {

// One-transition batch with a crafted old log-probability so the ratio is
// exactly `ratio` at the current parameters.
RolloutBatch ratio_batch(const GaussianPolicy& policy, Rng& rng, double ratio, double advantage) {
  RolloutBatch batch;
  const auto obs = random_vector(rng, policy.mean.input_size());
  const auto mu = policy.mean.forward(obs);
  std::vector<double> action(mu.size());
  for (size_t i = 0; i < mu.size(); ++i) action[i] = mu[i] + 0.3 * (i + 1);
  const double logp = policy.log_prob(obs, action);
  batch.obs.push_back(obs);
  batch.action.push_back(action);
  batch.logp_old.push_back(logp - std::log(ratio));
  batch.advantage.push_back(advantage);
  batch.value_target.push_back(0.0);
  return batch;
}

}  // namespace

TEST_CASE("ppo clipped surrogate hand values") {
  Rng rng(77);
  GaussianPolicy policy = GaussianPolicy::create(3, {4}, 2, rng);
  Mlp critic = Mlp::create({3, 4, 1}, rng);
  LossSettings cfg;
  cfg.clip = 0.2;
  cfg.value_coef = 0.0;
  cfg.entropy_coef = 0.0;

  // theta == theta_old: the surrogate equals the mean advantage.
  {
    RolloutBatch batch = ratio_batch(policy, rng, 1.0, 0.7);
    CHECK(ppo_loss(batch, policy, critic, cfg) == Catch::Approx(-0.7).epsilon(1e-9));
  }
  // ratio 1.5, A = +1: clipped at 1.2.
  {
    RolloutBatch batch = ratio_batch(policy, rng, 1.5, 1.0);
    CHECK(ppo_loss(batch, policy, critic, cfg) == Catch::Approx(-1.2).epsilon(1e-9));
  }
  // ratio 0.5, A = -1: min(-0.5, -0.8) = -0.8.
  {
    RolloutBatch batch = ratio_batch(policy, rng, 0.5, -1.0);
    CHECK(ppo_loss(batch, policy, critic, cfg) == Catch::Approx(0.8).epsilon(1e-9));
  }
}

TEST_CASE("value and entropy terms enter the loss") {
  Rng rng(78);
  GaussianPolicy policy = GaussianPolicy::create(3, {4}, 2, rng);
  Mlp critic = Mlp::create({3, 4, 1}, rng);
  RolloutBatch batch = ratio_batch(policy, rng, 1.0, 0.0);
  batch.value_target[0] = 2.0;

  LossSettings cfg;
  cfg.value_coef = 0.5;
  cfg.entropy_coef = 0.0;
  const double v = critic.forward(batch.obs[0])[0];
  CHECK(ppo_loss(batch, policy, critic, cfg) ==
        Catch::Approx(0.5 * (v - 2.0) * (v - 2.0)).epsilon(1e-9));

  cfg.value_coef = 0.0;
  cfg.entropy_coef = 0.01;
  CHECK(ppo_loss(batch, policy, critic, cfg) ==
        Catch::Approx(-0.01 * policy.entropy()).epsilon(1e-9));
}

TEST_CASE("ppo update direction matches the a2c direction at the old policy") {
  Rng rng(79);
  GaussianPolicy policy = GaussianPolicy::create(4, {6}, 3, rng);
  Mlp critic = Mlp::create({4, 6, 1}, rng);

  RolloutBatch batch;
  for (int i = 0; i < 6; ++i) {
    const auto obs = random_vector(rng, 4);
    std::vector<double> action;
    Rng srng(500 + i);
    const double logp = policy.sample(obs, srng, action);
    batch.obs.push_back(obs);
    batch.action.push_back(action);
    batch.logp_old.push_back(logp);
    batch.advantage.push_back(rng.uniform(-1, 1));
    batch.value_target.push_back(rng.uniform(-1, 1));
  }
  std::vector<size_t> idx{0, 1, 2, 3, 4, 5};

  LossSettings wide;
  wide.clip = 1e9;  // clipping never binds
  PolicyGrad ppo_grad = PolicyGrad::zeros_like(policy);
  MlpGrad cg1 = MlpGrad::zeros_like(critic);
  policy_loss(batch, idx, policy, critic, wide, PolicyObjective::ppo_clip, &ppo_grad, &cg1);

  PolicyGrad a2c_grad = PolicyGrad::zeros_like(policy);
  MlpGrad cg2 = MlpGrad::zeros_like(critic);
  policy_loss(batch, idx, policy, critic, wide, PolicyObjective::a2c, &a2c_grad, &cg2);

  double dot = 0, na = 0, nb = 0;
  const auto accumulate = [&](const std::vector<double>& a, const std::vector<double>& b) {
    for (size_t i = 0; i < a.size(); ++i) {
      dot += a[i] * b[i];
      na += a[i] * a[i];
      nb += b[i] * b[i];
    }
  };
  for (size_t l = 0; l < ppo_grad.mean.w.size(); ++l) {
    accumulate(ppo_grad.mean.w[l], a2c_grad.mean.w[l]);
    accumulate(ppo_grad.mean.b[l], a2c_grad.mean.b[l]);
  }
  accumulate(ppo_grad.log_std, a2c_grad.log_std);
  const double cosine = dot / std::sqrt(na * nb);
  CHECK(cosine >= 0.999);
}

TEST_CASE("policy sampling is deterministic and self-consistent") {
  Rng rng(80);
  const GaussianPolicy policy = GaussianPolicy::create(5, {6}, 3, rng);
  const auto obs = random_vector(rng, 5);
  Rng s1(9), s2(9);
  std::vector<double> a1, a2;
  const double lp1 = policy.sample(obs, s1, a1);
  const double lp2 = policy.sample(obs, s2, a2);
  CHECK(a1 == a2);
  CHECK(lp1 == lp2);
  CHECK(policy.log_prob(obs, a1) == Catch::Approx(lp1).epsilon(1e-12));
}

TEST_CASE("active projection respects the power budget") {
  const double p_max = 100.0;
  {
    const std::vector<double> raw(16, 0.0);
    const ActiveBeamforming beams = project_active_action(raw, 4, 2, p_max);
    CHECK(beams.total_power() == 0.0);
  }
  {
    // Raw power 4 * p_max scales onto the boundary.
    std::vector<double> raw(16, 0.0);
    raw[0] = 20.0;  // power 400
    const ActiveBeamforming beams = project_active_action(raw, 4, 2, p_max);
    CHECK(beams.total_power() <= p_max);
    CHECK(beams.total_power() == Catch::Approx(p_max).epsilon(1e-12));
  }
  {
    std::vector<double> raw{1, 2, 0.5, -1, 0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0};
    const ActiveBeamforming beams = project_active_action(raw, 4, 2, p_max);
    CHECK(beams.w[0](0, 0) == cplx{1, 2});  // feasible input is untouched
    CHECK(beams.w[1](0, 0) == cplx{1, 1});
  }
  Rng rng(81);
  for (int trial = 0; trial < 200; ++trial) {
    const auto raw = random_vector(rng, 16, -10, 10);
    const ActiveBeamforming beams = project_active_action(raw, 4, 2, p_max);
    CHECK(beams.total_power() <= p_max);
  }
}

TEST_CASE("passive projection enforces the split and wraps phases") {
  {
    std::vector<double> raw{0.0, 3 * std::numbers::pi, -0.5};
    const StarRisState s = project_passive_action(raw, 1, 1);
    CHECK(s.beta_f[0][0] == Catch::Approx(0.5));
    CHECK(s.beta_b[0][0] == Catch::Approx(0.5));
    CHECK(s.theta_f[0][0] == Catch::Approx(std::numbers::pi).epsilon(1e-12));
    CHECK(s.theta_b[0][0] == Catch::Approx(2 * std::numbers::pi - 0.5).epsilon(1e-12));
  }
  Rng rng(82);
  for (int trial = 0; trial < 200; ++trial) {
    const auto raw = random_vector(rng, 2 * 5 * 3, -20, 20);
    const StarRisState s = project_passive_action(raw, 2, 5);
    for (int l = 0; l < 2; ++l)
      for (int m = 0; m < 5; ++m) {
        CHECK(s.beta_f[l][m] + s.beta_b[l][m] == 1.0);
        CHECK(s.beta_f[l][m] >= 0.0);
        CHECK(s.beta_f[l][m] <= 1.0);
        for (double th : {s.theta_f[l][m], s.theta_b[l][m]}) {
          CHECK(th >= 0.0);
          CHECK(th < kTwoPi);
        }
      }
  }
}
