// Link-level channel stack: indoor-hotspot path loss, planar/linear array
// steering, Rician small-scale fading, the per-surface energy-splitting
// operator, and the end-to-end combined channel.
#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "starnoma/geometry.hpp"
#include "starnoma/linalg.hpp"
#include "starnoma/rng.hpp"

namespace starnoma {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct PathLossParams {
  double carrier_freq_ghz = 6.0;
  double offset_db = 32.4;
  double los_slope = 17.3;
  double nlos_slope = 31.9;
  double freq_slope = 20.0;

  double wavelength_m() const { return kSpeedOfLight / (carrier_freq_ghz * 1e9); }
};

enum class LinkKind { los, nlos };

inline double path_loss_db(LinkKind kind, double distance_m, const PathLossParams& p) {
  if (!(distance_m > 0.0)) throw std::domain_error("path_loss_db: distance must be positive");
  const double slope = kind == LinkKind::los ? p.los_slope : p.nlos_slope;
  return p.offset_db + slope * std::log10(distance_m) + p.freq_slope * std::log10(p.carrier_freq_ghz);
}

inline double path_gain_amplitude(LinkKind kind, double distance_m, const PathLossParams& p) {
  return std::pow(10.0, -path_loss_db(kind, distance_m, p) / 20.0);
}

enum class Side { forward, backward };

inline double wrap_phase(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

// Per-surface energy-splitting coefficients: amplitudes pair to one per
// element, phases live in [0, 2*pi).
struct StarRisState {
  std::vector<std::vector<double>> beta_f, beta_b;    // [l][m]
  std::vector<std::vector<double>> theta_f, theta_b;  // [l][m]

  static StarRisState neutral(int surfaces, int elements) {
    StarRisState s;
    s.beta_f.assign(surfaces, std::vector<double>(elements, 0.5));
    s.beta_b.assign(surfaces, std::vector<double>(elements, 0.5));
    s.theta_f.assign(surfaces, std::vector<double>(elements, 0.0));
    s.theta_b.assign(surfaces, std::vector<double>(elements, 0.0));
    return s;
  }

  int surface_count() const { return static_cast<int>(beta_f.size()); }
};

struct ChannelParams {
  PathLossParams path_loss;
  double rician_kappa = 3.0;
  int ap_antennas = 4;

  double ap_spacing_m() const { return path_loss.wavelength_m() / 2.0; }
};

// One fading draw for every link in the layout. Entries exist for all links
// regardless of adjacency; masking happens in combined_channel.
struct ChannelRealization {
  std::vector<CMat> ap_mu;                          // h_u, each N_b x 1
  std::vector<CMat> ap_surface;                     // g_l, each N_b x M
  std::vector<std::vector<CMat>> surface_mu;        // g_{l,u}, each M x 1
  double rician_kappa = 0.0;
};

// Unit-modulus array response: entry phase 2*pi/lambda * <offset, direction>.
inline CMat steering_vector(const std::vector<Vec3>& element_offsets, Vec3 unit_direction,
                            double wavelength_m) {
  CMat a(static_cast<int>(element_offsets.size()), 1);
  for (size_t m = 0; m < element_offsets.size(); ++m) {
    const double phase = kTwoPi / wavelength_m * dot(element_offsets[m], unit_direction);
    a[m] = std::polar(1.0, phase);
  }
  return a;
}

// AP is a half-wavelength uniform linear array along the x axis.
inline std::vector<Vec3> ap_element_offsets(const ChannelParams& params) {
  std::vector<Vec3> offsets(params.ap_antennas);
  const double d = params.ap_spacing_m();
  for (int n = 0; n < params.ap_antennas; ++n)
    offsets[n] = {(n - (params.ap_antennas - 1) / 2.0) * d, 0.0, 0.0};
  return offsets;
}

// Planar grid in the wall plane: rows along the wall direction, columns
// along the vertical, row-major element order m = iv * m_h + ih.
inline std::vector<Vec3> surface_element_offsets(const Layout& layout, int l) {
  const Surface& s = layout.surfaces[l];
  const Wall& w = layout.walls[s.wall];
  Vec2 dir2 = w.b - w.a;
  const double len = norm(dir2);
  if (len == 0.0) throw std::domain_error("surface_element_offsets: degenerate wall");
  dir2 = {dir2.x / len, dir2.y / len};
  std::vector<Vec3> offsets;
  offsets.reserve(static_cast<size_t>(s.element_count()));
  for (int iv = 0; iv < s.m_v; ++iv)
    for (int ih = 0; ih < s.m_h; ++ih) {
      const double along = (ih - (s.m_h - 1) / 2.0) * s.spacing_h;
      const double up = (iv - (s.m_v - 1) / 2.0) * s.spacing_v;
      offsets.push_back({along * dir2.x, along * dir2.y, up});
    }
  return offsets;
}

namespace detail {

inline CMat rician_mix(const CMat& los, const CMat& nlos, double kappa, double amplitude) {
  const double w_los = std::sqrt(kappa / (kappa + 1.0));
  const double w_nlos = std::sqrt(1.0 / (kappa + 1.0));
  CMat out(los.rows(), los.cols());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = amplitude * (w_los * los[i] + w_nlos * nlos[i]);
  return out;
}

}  // namespace detail

// Draws every link in a fixed order (direct links, then AP->surface, then
// surface->MU) so a given rng seed always yields the same realization.
// Direct links use the LoS exponent when visible and the NLoS exponent when
// blocked; surface legs always use the LoS exponent.
inline ChannelRealization sample_channels(const Layout& layout, const AdjacencyIndicators& adj,
                                          const ChannelParams& params, Rng& rng) {
  const int U = layout.user_count();
  const int L = layout.surface_count();
  const double lambda = params.path_loss.wavelength_m();
  const double kappa = params.rician_kappa;
  const auto ap_offsets = ap_element_offsets(params);

  ChannelRealization ch;
  ch.rician_kappa = kappa;
  ch.ap_mu.reserve(U);
  ch.ap_surface.reserve(L);
  ch.surface_mu.assign(L, {});

  for (int u = 0; u < U; ++u) {
    const Vec3 mu{layout.mus[u].x, layout.mus[u].y, 0.0};
    const Vec3 delta = mu - layout.ap;
    const double dist = norm(delta);
    const LinkKind kind = adj.ap_mu[u] ? LinkKind::los : LinkKind::nlos;
    const double amp = path_gain_amplitude(kind, dist, params.path_loss);
    const CMat los = steering_vector(ap_offsets, normalized(delta), lambda);
    const CMat nlos = sample_cn01(rng, params.ap_antennas, 1);
    ch.ap_mu.push_back(detail::rician_mix(los, nlos, kappa, amp));
  }

  std::vector<std::vector<Vec3>> surf_offsets(L);
  for (int l = 0; l < L; ++l) {
    surf_offsets[l] = surface_element_offsets(layout, l);
    const int M = layout.surfaces[l].element_count();
    const Vec3 delta = layout.surfaces[l].center - layout.ap;
    const double dist = norm(delta);
    const Vec3 dir = normalized(delta);
    const double amp = path_gain_amplitude(LinkKind::los, dist, params.path_loss);
    const CMat a_ap = steering_vector(ap_offsets, dir, lambda);
    const CMat a_surf = steering_vector(surf_offsets[l], dir, lambda);
    const CMat los = matmul(a_ap, hermitian(a_surf));  // N_b x M, rank one
    const CMat nlos = sample_cn01(rng, params.ap_antennas, M);
    ch.ap_surface.push_back(detail::rician_mix(los, nlos, kappa, amp));
  }

  for (int l = 0; l < L; ++l) {
    const int M = layout.surfaces[l].element_count();
    ch.surface_mu[l].reserve(U);
    for (int u = 0; u < U; ++u) {
      const Vec3 mu{layout.mus[u].x, layout.mus[u].y, 0.0};
      const Vec3 delta = mu - layout.surfaces[l].center;
      const double dist = norm(delta);
      const double amp = path_gain_amplitude(LinkKind::los, dist, params.path_loss);
      const CMat los = steering_vector(surf_offsets[l], normalized(delta), lambda);
      const CMat nlos = sample_cn01(rng, M, 1);
      ch.surface_mu[l].push_back(detail::rician_mix(los, nlos, kappa, amp));
    }
  }
  return ch;
}

// Diagonal operator sqrt(beta_m) * exp(j theta_m) for one side of surface l.
inline CMat phi_matrix(const StarRisState& state, int l, Side side) {
  const auto& beta = side == Side::forward ? state.beta_f[l] : state.beta_b[l];
  const auto& theta = side == Side::forward ? state.theta_f[l] : state.theta_b[l];
  std::vector<cplx> diag(beta.size());
  for (size_t m = 0; m < beta.size(); ++m)
    diag[m] = std::polar(std::sqrt(beta[m]), theta[m]);
  return diag_from_vector(diag);
}

// hat(h)_u: the direct link plus every surface path admitted by the
// adjacency indicators.
inline CMat combined_channel(const ChannelRealization& ch, const AdjacencyIndicators& adj,
                             const StarRisState& state, int u) {
  const int n_b = ch.ap_mu[u].rows();
  CMat h(n_b, 1);
  if (adj.ap_mu[u]) h += ch.ap_mu[u];
  for (int l = 0; l < static_cast<int>(ch.ap_surface.size()); ++l) {
    if (!adj.ap_surface[l]) continue;
    if (adj.surface_mu_f[l][u])
      h += matmul(ch.ap_surface[l], matmul(phi_matrix(state, l, Side::forward), ch.surface_mu[l][u]));
    if (adj.surface_mu_b[l][u])
      h += matmul(ch.ap_surface[l], matmul(phi_matrix(state, l, Side::backward), ch.surface_mu[l][u]));
  }
  return h;
}

inline std::vector<CMat> combined_channels(const ChannelRealization& ch,
                                           const AdjacencyIndicators& adj,
                                           const StarRisState& state) {
  std::vector<CMat> out;
  out.reserve(ch.ap_mu.size());
  for (int u = 0; u < static_cast<int>(ch.ap_mu.size()); ++u)
    out.push_back(combined_channel(ch, adj, state, u));
  return out;
}

namespace detail {

// Hexfloat text round-trips doubles exactly; parsing goes through strtod
// because stream extraction does not accept the 0x prefix.
inline void put_double(std::ostream& os, double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", v);
  os << buf;
}

inline double get_double(std::istream& is) {
  std::string token;
  if (!(is >> token)) throw std::runtime_error("channel dump: truncated value");
  return std::strtod(token.c_str(), nullptr);
}

}  // namespace detail

// Round-trip-exact text dump (hexfloat entries) for regression fixtures.
inline void dump_realization(std::ostream& os, const ChannelRealization& ch) {
  const auto put_mat = [&os](const CMat& m) {
    os << m.rows() << ' ' << m.cols();
    for (cplx z : m.entries()) {
      os << ' ';
      detail::put_double(os, z.real());
      os << ' ';
      detail::put_double(os, z.imag());
    }
    os << '\n';
  };
  os << "channel_realization v1\n";
  detail::put_double(os, ch.rician_kappa);
  os << '\n' << ch.ap_mu.size() << ' ' << ch.ap_surface.size() << '\n';
  for (const CMat& m : ch.ap_mu) put_mat(m);
  for (const CMat& m : ch.ap_surface) put_mat(m);
  for (const auto& row : ch.surface_mu) {
    os << row.size() << '\n';
    for (const CMat& m : row) put_mat(m);
  }
}

inline ChannelRealization load_realization(std::istream& is) {
  const auto get_mat = [&is]() {
    int rows = 0, cols = 0;
    if (!(is >> rows >> cols)) throw std::runtime_error("load_realization: truncated matrix header");
    CMat m(rows, cols);
    for (size_t i = 0; i < m.size(); ++i) {
      const double re = detail::get_double(is);
      const double im = detail::get_double(is);
      m[i] = cplx{re, im};
    }
    return m;
  };
  std::string tag, version;
  is >> tag >> version;
  if (tag != "channel_realization" || version != "v1")
    throw std::runtime_error("load_realization: unrecognized header");
  ChannelRealization ch;
  ch.rician_kappa = detail::get_double(is);
  size_t users = 0, surfaces = 0;
  is >> users >> surfaces;
  for (size_t u = 0; u < users; ++u) ch.ap_mu.push_back(get_mat());
  for (size_t l = 0; l < surfaces; ++l) ch.ap_surface.push_back(get_mat());
  ch.surface_mu.resize(surfaces);
  for (size_t l = 0; l < surfaces; ++l) {
    size_t count = 0;
    is >> count;
    for (size_t u = 0; u < count; ++u) ch.surface_mu[l].push_back(get_mat());
  }
  return ch;
}

}  // namespace starnoma
