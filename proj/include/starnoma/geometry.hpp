// Indoor geometry: rectangular region, wall segments (opaque or surface-bearing),
// device positions, and the binary visibility indicators derived from them.
//
// Occlusion is 2-D: walls are infinitely thin segments, heights enter only
// through 3-D distances. A path is blocked by a wall only on a proper
// (strict interior) crossing, so segments that merely touch a wall endpoint
// or start on their own surface's wall are not self-blocking.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "starnoma/rng.hpp"

namespace starnoma {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(Vec3 a) {
  const double n = norm(a);
  if (n == 0.0) throw std::domain_error("normalized: zero vector");
  return {a.x / n, a.y / n, a.z / n};
}

enum class WallKind { opaque, star_ris };

struct Wall {
  Vec2 a;
  Vec2 b;
  WallKind kind = WallKind::opaque;
  int surface = -1;  // index into Layout::surfaces when kind == star_ris
};

struct Surface {
  Vec3 center;          // p_l
  Vec2 forward_normal;  // unit 2-vector; the forward side is where dot(n, p - center) > 0
  int m_h = 1;          // elements along the wall
  int m_v = 1;          // elements along the vertical
  double spacing_h = 0.2;
  double spacing_v = 0.1;
  int wall = -1;  // index into Layout::walls

  int element_count() const { return m_h * m_v; }
};

struct Layout {
  double width = 0.0;  // region extent in x
  double depth = 0.0;  // region extent in y
  Vec3 ap;             // p_0
  std::vector<Wall> walls;
  std::vector<Surface> surfaces;
  std::vector<Vec2> mus;  // p_u, ground level

  int surface_count() const { return static_cast<int>(surfaces.size()); }
  int user_count() const { return static_cast<int>(mus.size()); }
};

struct AdjacencyIndicators {
  std::vector<int> ap_mu;                       // c^b_u
  std::vector<int> ap_surface;                  // c^b_l
  std::vector<std::vector<int>> surface_mu_f;   // c^{l_F}_u, [l][u]
  std::vector<std::vector<int>> surface_mu_b;   // c^{l_B}_u, [l][u]
};

namespace detail {

inline constexpr double kGeomEps = 1e-9;

inline int orientation_sign(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  if (v > kGeomEps) return 1;
  if (v < -kGeomEps) return -1;
  return 0;
}

// Strict interior crossing of segments pq and wall ab.
inline bool segments_cross(Vec2 p, Vec2 q, Vec2 a, Vec2 b) {
  const int o1 = orientation_sign(p, q, a);
  const int o2 = orientation_sign(p, q, b);
  const int o3 = orientation_sign(a, b, p);
  const int o4 = orientation_sign(a, b, q);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::fmin(1.0, std::fmax(0.0, t));
  const Vec2 proj{a.x + t * ab.x, a.y + t * ab.y};
  return norm(p - proj);
}

}  // namespace detail

inline Vec2 xy(Vec3 p) { return {p.x, p.y}; }

// True if any wall satisfying `pred` properly blocks the 2-D path p -> q.
template <typename Pred>
bool path_blocked(const Layout& layout, Vec2 p, Vec2 q, Pred pred) {
  for (const Wall& w : layout.walls)
    if (pred(w) && detail::segments_cross(p, q, w.a, w.b)) return true;
  return false;
}

inline AdjacencyIndicators compute_adjacency(const Layout& layout) {
  const int L = layout.surface_count();
  const int U = layout.user_count();
  const Vec2 ap = xy(layout.ap);

  const auto any_wall = [](const Wall&) { return true; };
  const auto opaque_only = [](const Wall& w) { return w.kind == WallKind::opaque; };

  for (int u = 0; u < U; ++u)
    for (const Wall& w : layout.walls)
      if (detail::point_segment_distance(layout.mus[u], w.a, w.b) < detail::kGeomEps)
        throw std::domain_error("compute_adjacency: MU " + std::to_string(u) +
                                " lies on a wall segment");

  AdjacencyIndicators adj;
  adj.ap_mu.resize(U);
  adj.ap_surface.resize(L);
  adj.surface_mu_f.assign(L, std::vector<int>(U, 0));
  adj.surface_mu_b.assign(L, std::vector<int>(U, 0));

  for (int u = 0; u < U; ++u)
    adj.ap_mu[u] = path_blocked(layout, ap, layout.mus[u], any_wall) ? 0 : 1;

  for (int l = 0; l < L; ++l) {
    const Vec2 center = xy(layout.surfaces[l].center);
    adj.ap_surface[l] = path_blocked(layout, ap, center, opaque_only) ? 0 : 1;
    for (int u = 0; u < U; ++u) {
      const double side = dot(layout.surfaces[l].forward_normal, layout.mus[u] - center);
      if (std::abs(side) < detail::kGeomEps)
        throw std::domain_error("compute_adjacency: MU " + std::to_string(u) +
                                " lies in the plane of surface " + std::to_string(l));
      if (path_blocked(layout, center, layout.mus[u], opaque_only)) continue;
      if (side > 0.0)
        adj.surface_mu_f[l][u] = 1;
      else
        adj.surface_mu_b[l][u] = 1;
    }
  }
  return adj;
}

// Copies the template with MU positions redrawn uniformly over the region
// interior; positions falling onto a wall are redrawn.
inline Layout sample_deployment(Rng& rng, const Layout& tmpl) {
  Layout out = tmpl;
  for (Vec2& mu : out.mus) {
    for (;;) {
      mu = {rng.uniform(0.0, tmpl.width), rng.uniform(0.0, tmpl.depth)};
      bool on_wall = false;
      for (const Wall& w : tmpl.walls)
        on_wall |= detail::point_segment_distance(mu, w.a, w.b) < detail::kGeomEps;
      if (!on_wall) break;
    }
  }
  return out;
}

// The fixed verification deployment: a 20 m x 20 m region split into four
// equal rooms, the AP in the south-west room with one surface on each of
// that room's interior walls, and ten MUs at frozen coordinates.
//
// Forward normals follow a clockwise traversal of the AP room's polygon
// (rotate each wall direction by -90 degrees), which points them into the
// AP room: the forward side faces the AP, the backward side is the
// transmission side behind the wall.
//
// MU indices 0..5 have a direct AP path (two angular groups of three);
// indices 6..7 sit behind surface 0 and 8..9 behind surface 1, reachable
// only through the surfaces. The reference pairing groups them as clusters
// {0,1,2}, {3,4,5}, {6,7}, {8,9}.
inline Layout verification_layout(int m_h = 5, int m_v = 2) {
  Layout ly;
  ly.width = 20.0;
  ly.depth = 20.0;
  ly.ap = {5.0, 5.0, 2.5};

  // Outer boundary.
  ly.walls.push_back({{0, 0}, {20, 0}, WallKind::opaque, -1});
  ly.walls.push_back({{20, 0}, {20, 20}, WallKind::opaque, -1});
  ly.walls.push_back({{20, 20}, {0, 20}, WallKind::opaque, -1});
  ly.walls.push_back({{0, 20}, {0, 0}, WallKind::opaque, -1});
  // Interior cross; the AP room's two interior walls carry the surfaces.
  ly.walls.push_back({{10, 0}, {10, 10}, WallKind::star_ris, 0});
  ly.walls.push_back({{10, 10}, {10, 20}, WallKind::opaque, -1});
  ly.walls.push_back({{0, 10}, {10, 10}, WallKind::star_ris, 1});
  ly.walls.push_back({{10, 10}, {20, 10}, WallKind::opaque, -1});

  ly.surfaces.push_back({{10.0, 5.0, 1.5}, {-1.0, 0.0}, m_h, m_v, 0.2, 0.1, 4});
  ly.surfaces.push_back({{5.0, 10.0, 1.5}, {0.0, -1.0}, m_h, m_v, 0.2, 0.1, 6});

  ly.mus = {
      {2.5, 8.0}, {2.2, 8.4}, {2.8, 7.6},  // direct, north-west group
      {7.5, 2.0}, {7.8, 1.6}, {7.2, 2.4},  // direct, south-east group
      {15.0, 4.0}, {16.5, 6.0},            // behind surface 0
      {4.0, 15.5}, {6.0, 16.5},            // behind surface 1
  };
  return ly;
}

}  // namespace starnoma
