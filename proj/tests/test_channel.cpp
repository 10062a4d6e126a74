#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "starnoma/channel.hpp"

using namespace starnoma;

TEST_CASE("path loss closed-form values") {
  PathLossParams p;  // 6 GHz
  CHECK(path_loss_db(LinkKind::los, 1.0, p) == Catch::Approx(47.963025007672875).margin(1e-9));
  CHECK(path_loss_db(LinkKind::los, 10.0, p) == Catch::Approx(65.263025007672875).margin(1e-9));
  CHECK(path_loss_db(LinkKind::nlos, 10.0, p) == Catch::Approx(79.863025007672875).margin(1e-9));
  CHECK_THROWS_AS(path_loss_db(LinkKind::los, 0.0, p), std::domain_error);
  CHECK_THROWS_AS(path_loss_db(LinkKind::los, -1.0, p), std::domain_error);
}

TEST_CASE("path loss is monotone in distance and frequency") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    PathLossParams p;
    p.carrier_freq_ghz = rng.uniform(0.5, 60.0);
    const double d1 = rng.uniform(0.5, 30.0);
    const double d2 = d1 + rng.uniform(0.1, 10.0);
    for (LinkKind kind : {LinkKind::los, LinkKind::nlos})
      CHECK(path_loss_db(kind, d2, p) > path_loss_db(kind, d1, p));
    PathLossParams hi = p;
    hi.carrier_freq_ghz = p.carrier_freq_ghz * 1.5;
    CHECK(path_loss_db(LinkKind::los, d1, hi) > path_loss_db(LinkKind::los, d1, p));
  }
}

TEST_CASE("steering vector basics") {
  const double lambda = 0.05;
  // Line of elements along x, broadside direction along y.
  std::vector<Vec3> offsets{{0, 0, 0}, {0.025, 0, 0}, {0.05, 0, 0}};
  const CMat broadside = steering_vector(offsets, {0, 1, 0}, lambda);
  for (size_t i = 0; i < broadside.size(); ++i) {
    CHECK(broadside[i].real() == Catch::Approx(1.0).margin(1e-12));
    CHECK(broadside[i].imag() == Catch::Approx(0.0).margin(1e-12));
  }

  const CMat single = steering_vector({{0.3, 0.1, 0.0}}, {1, 0, 0}, lambda);
  REQUIRE(single.rows() == 1);

  // Half-wavelength endfire line: phases 0, pi, 2pi, 3pi.
  std::vector<Vec3> line;
  for (int n = 0; n < 4; ++n) line.push_back({n * lambda / 2, 0, 0});
  const CMat endfire = steering_vector(line, {1, 0, 0}, lambda);
  for (int n = 0; n < 4; ++n) {
    const double expected = n % 2 == 0 ? 1.0 : -1.0;
    CHECK(endfire(n, 0).real() == Catch::Approx(expected).margin(1e-12));
    CHECK(std::abs(endfire(n, 0)) == Catch::Approx(1.0).margin(1e-12));
  }
}

namespace {

struct Fixture {
  Layout layout = verification_layout();
  AdjacencyIndicators adj = compute_adjacency(layout);
};

}  // namespace

TEST_CASE("rician limits") {
  Fixture f;
  ChannelParams nearly_los;
  nearly_los.rician_kappa = 1e12;
  Rng r1(5);
  const ChannelRealization ch = sample_channels(f.layout, f.adj, nearly_los, r1);

  // Direct visible link: compare with the deterministic LoS construction.
  const auto offsets = ap_element_offsets(nearly_los);
  const Vec3 mu{f.layout.mus[0].x, f.layout.mus[0].y, 0.0};
  const Vec3 delta = mu - f.layout.ap;
  const double amp = path_gain_amplitude(LinkKind::los, norm(delta), nearly_los.path_loss);
  const CMat los = steering_vector(offsets, normalized(delta), nearly_los.path_loss.wavelength_m());
  for (int n = 0; n < 4; ++n)
    CHECK(std::abs(ch.ap_mu[0](n, 0) - amp * los(n, 0)) / amp < 1e-5);

  // kappa = 0: the channel is exactly the scaled NLoS draw, replayed from the
  // documented sampling order (direct links first).
  ChannelParams pure_nlos;
  pure_nlos.rician_kappa = 0.0;
  Rng r2(6);
  const ChannelRealization ch0 = sample_channels(f.layout, f.adj, pure_nlos, r2);
  Rng replay(6);
  const CMat draw = sample_cn01(replay, 4, 1);
  const double amp0 = path_gain_amplitude(f.adj.ap_mu[0] ? LinkKind::los : LinkKind::nlos,
                                          norm(delta), pure_nlos.path_loss);
  for (int n = 0; n < 4; ++n)
    CHECK(std::abs(ch0.ap_mu[0](n, 0) - amp0 * draw(n, 0)) < 1e-15);
}

TEST_CASE("mean channel power matches the link budget") {
  Fixture f;
  ChannelParams params;
  Rng rng(31);
  const Vec3 mu{f.layout.mus[0].x, f.layout.mus[0].y, 0.0};
  const double amp =
      path_gain_amplitude(LinkKind::los, norm(mu - f.layout.ap), params.path_loss);
  double mean_power = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const ChannelRealization ch = sample_channels(f.layout, f.adj, params, rng);
    for (int n = 0; n < 4; ++n) mean_power += std::norm(ch.ap_mu[0](n, 0));
  }
  mean_power /= draws * 4;
  CHECK(mean_power == Catch::Approx(amp * amp).epsilon(0.03));
}

TEST_CASE("phi matrix forms") {
  StarRisState s = StarRisState::neutral(1, 3);
  for (double& b : s.beta_f[0]) b = 1.0;
  for (double& b : s.beta_b[0]) b = 0.0;
  const CMat full = phi_matrix(s, 0, Side::forward);
  CHECK(frobenius_norm(full + CMat::identity(3) * cplx{-1.0, 0.0}) < 1e-15);

  StarRisState half = StarRisState::neutral(1, 2);
  half.theta_f[0] = {std::numbers::pi / 2, std::numbers::pi / 2};
  const CMat phi = phi_matrix(half, 0, Side::forward);
  for (int m = 0; m < 2; ++m) {
    CHECK(phi(m, m).real() == Catch::Approx(0.0).margin(1e-12));
    CHECK(phi(m, m).imag() == Catch::Approx(std::sqrt(0.5)).margin(1e-12));
  }

  // |Phi_F|^2 + |Phi_B|^2 has unit diagonal under the split constraint.
  Rng rng(32);
  StarRisState random_state = StarRisState::neutral(1, 4);
  for (int m = 0; m < 4; ++m) {
    random_state.beta_f[0][m] = rng.uniform();
    random_state.beta_b[0][m] = 1.0 - random_state.beta_f[0][m];
    random_state.theta_f[0][m] = rng.uniform(0, kTwoPi);
    random_state.theta_b[0][m] = rng.uniform(0, kTwoPi);
  }
  const CMat pf = phi_matrix(random_state, 0, Side::forward);
  const CMat pb = phi_matrix(random_state, 0, Side::backward);
  for (int m = 0; m < 4; ++m)
    CHECK(std::norm(pf(m, m)) + std::norm(pb(m, m)) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("combined channel masks and reduces") {
  Fixture f;
  ChannelParams params;
  Rng rng(33);
  const ChannelRealization ch = sample_channels(f.layout, f.adj, params, rng);
  const StarRisState state = StarRisState::neutral(2, 10);

  AdjacencyIndicators none = f.adj;
  for (auto& v : none.ap_mu) v = 0;
  for (auto& v : none.ap_surface) v = 0;
  const CMat zero = combined_channel(ch, none, state, 0);
  CHECK(frobenius_norm(zero) == 0.0);

  AdjacencyIndicators direct_only = f.adj;
  for (auto& v : direct_only.ap_surface) v = 0;
  const CMat direct = combined_channel(ch, direct_only, state, 0);
  for (int n = 0; n < 4; ++n) CHECK(direct(n, 0) == ch.ap_mu[0](n, 0));
}

TEST_CASE("combined channel matches the scalar-expansion oracle") {
  Fixture f;
  ChannelParams params;
  Rng rng(34);
  const ChannelRealization ch = sample_channels(f.layout, f.adj, params, rng);

  StarRisState state = StarRisState::neutral(2, 10);
  for (int l = 0; l < 2; ++l)
    for (int m = 0; m < 10; ++m) {
      state.beta_f[l][m] = rng.uniform();
      state.beta_b[l][m] = 1.0 - state.beta_f[l][m];
      state.theta_f[l][m] = rng.uniform(0, kTwoPi);
      state.theta_b[l][m] = rng.uniform(0, kTwoPi);
    }

  for (int u = 0; u < f.layout.user_count(); ++u) {
    const CMat got = combined_channel(ch, f.adj, state, u);
    // Explicit per-element sum with no matrix machinery.
    std::vector<cplx> want(4, cplx{0, 0});
    if (f.adj.ap_mu[u])
      for (int n = 0; n < 4; ++n) want[n] += ch.ap_mu[u](n, 0);
    for (int l = 0; l < 2; ++l) {
      if (!f.adj.ap_surface[l]) continue;
      for (int m = 0; m < 10; ++m) {
        cplx phi{0, 0};
        if (f.adj.surface_mu_f[l][u])
          phi += std::polar(std::sqrt(state.beta_f[l][m]), state.theta_f[l][m]);
        if (f.adj.surface_mu_b[l][u])
          phi += std::polar(std::sqrt(state.beta_b[l][m]), state.theta_b[l][m]);
        for (int n = 0; n < 4; ++n)
          want[n] += ch.ap_surface[l](n, m) * phi * ch.surface_mu[l][u](m, 0);
      }
    }
    for (int n = 0; n < 4; ++n)
      CHECK(std::abs(got(n, 0) - want[n]) <=
            1e-10 * std::max(1.0, std::abs(want[n])));
  }
}

TEST_CASE("combined channel is linear in the surface operator") {
  Fixture f;
  ChannelParams params;
  Rng rng(35);
  const ChannelRealization ch = sample_channels(f.layout, f.adj, params, rng);

  // States with small amplitudes so the entrywise sum stays representable.
  const auto random_small_state = [&rng]() {
    StarRisState s = StarRisState::neutral(2, 10);
    for (int l = 0; l < 2; ++l)
      for (int m = 0; m < 10; ++m) {
        s.beta_f[l][m] = rng.uniform(0.0, 0.25);
        s.beta_b[l][m] = rng.uniform(0.0, 0.25);
        s.theta_f[l][m] = rng.uniform(0, kTwoPi);
        s.theta_b[l][m] = rng.uniform(0, kTwoPi);
      }
    return s;
  };
  const StarRisState a = random_small_state();
  const StarRisState b = random_small_state();
  StarRisState sum = StarRisState::neutral(2, 10);
  for (int l = 0; l < 2; ++l)
    for (int m = 0; m < 10; ++m) {
      for (Side side : {Side::forward, Side::backward}) {
        const bool fwd = side == Side::forward;
        const auto& ba = fwd ? a.beta_f[l][m] : a.beta_b[l][m];
        const auto& bb = fwd ? b.beta_f[l][m] : b.beta_b[l][m];
        const auto& ta = fwd ? a.theta_f[l][m] : a.theta_b[l][m];
        const auto& tb = fwd ? b.theta_f[l][m] : b.theta_b[l][m];
        const cplx combined = std::polar(std::sqrt(ba), ta) + std::polar(std::sqrt(bb), tb);
        auto& beta = fwd ? sum.beta_f[l][m] : sum.beta_b[l][m];
        auto& theta = fwd ? sum.theta_f[l][m] : sum.theta_b[l][m];
        beta = std::norm(combined);
        theta = wrap_phase(std::arg(combined));
      }
    }

  StarRisState zero = StarRisState::neutral(2, 10);
  for (int l = 0; l < 2; ++l)
    for (int m = 0; m < 10; ++m) {
      zero.beta_f[l][m] = 0.0;
      zero.beta_b[l][m] = 0.0;
    }

  for (int u : {0, 6, 8}) {
    const CMat ha = combined_channel(ch, f.adj, a, u);
    const CMat hb = combined_channel(ch, f.adj, b, u);
    const CMat hsum = combined_channel(ch, f.adj, sum, u);
    const CMat h0 = combined_channel(ch, f.adj, zero, u);
    for (int n = 0; n < 4; ++n) {
      const cplx lhs = hsum(n, 0) - h0(n, 0);
      const cplx rhs = ha(n, 0) + hb(n, 0) - 2.0 * h0(n, 0);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("realization dump/load round trip is exact") {
  Fixture f;
  ChannelParams params;
  Rng rng(36);
  const ChannelRealization ch = sample_channels(f.layout, f.adj, params, rng);
  std::stringstream ss;
  dump_realization(ss, ch);
  const ChannelRealization back = load_realization(ss);
  CHECK(back.rician_kappa == ch.rician_kappa);
  REQUIRE(back.ap_mu.size() == ch.ap_mu.size());
  for (size_t u = 0; u < ch.ap_mu.size(); ++u)
    for (size_t i = 0; i < ch.ap_mu[u].size(); ++i) CHECK(back.ap_mu[u][i] == ch.ap_mu[u][i]);
  for (size_t l = 0; l < ch.ap_surface.size(); ++l)
    for (size_t i = 0; i < ch.ap_surface[l].size(); ++i)
      CHECK(back.ap_surface[l][i] == ch.ap_surface[l][i]);
  for (size_t l = 0; l < ch.surface_mu.size(); ++l)
    for (size_t u = 0; u < ch.surface_mu[l].size(); ++u)
      for (size_t i = 0; i < ch.surface_mu[l][u].size(); ++i)
        CHECK(back.surface_mu[l][u][i] == ch.surface_mu[l][u][i]);
}
