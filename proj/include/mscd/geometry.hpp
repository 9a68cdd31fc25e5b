#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mscd/errors.hpp"
#include "mscd/union_find.hpp"

namespace mscd {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;
};

inline double dist(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline bool is_finite(const Point& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Tolerance used when checking geometric properties of computed structures.
inline constexpr double kGeoEpsilon = 1e-9;

// ---------------------------------------------------------------------------
// Predicates. A floating-point filter decides the sign whenever the error bound
// allows it; otherwise the determinant is evaluated exactly over rationals.
// ---------------------------------------------------------------------------

namespace detail {

using ExactRational = boost::multiprecision::cpp_rational;

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

inline int orient_exact(const Point& a, const Point& b, const Point& c) {
  using R = ExactRational;
  const R det = (R(b.x) - R(a.x)) * (R(c.y) - R(a.y)) - (R(b.y) - R(a.y)) * (R(c.x) - R(a.x));
  return det.sign();
}

inline int incircle_exact(const Point& a, const Point& b, const Point& c, const Point& d) {
  using R = ExactRational;
  const R adx = R(a.x) - R(d.x), ady = R(a.y) - R(d.y);
  const R bdx = R(b.x) - R(d.x), bdy = R(b.y) - R(d.y);
  const R cdx = R(c.x) - R(d.x), cdy = R(c.y) - R(d.y);
  const R alift = adx * adx + ady * ady;
  const R blift = bdx * bdx + bdy * bdy;
  const R clift = cdx * cdx + cdy * cdy;
  const R det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                clift * (adx * bdy - bdx * ady);
  return det.sign();
}

}  // namespace detail

// +1 if c lies left of the directed line a->b, -1 if right, 0 if collinear.
inline int orient(const Point& a, const Point& b, const Point& c) {
  const double l = (b.x - a.x) * (c.y - a.y);
  const double r = (b.y - a.y) * (c.x - a.x);
  const double det = l - r;
  const double bound = 3.3306690738754716e-16 * (std::abs(l) + std::abs(r));
  if (det > bound || -det > bound) return detail::sign_of(det);
  if ((b.x == a.x || c.y == a.y) && (b.y == a.y || c.x == a.x)) return 0;
  return detail::orient_exact(a, b, c);
}

// +1 if d lies strictly inside the circumcircle of the counter-clockwise
// triangle (a, b, c), -1 if strictly outside, 0 if cocircular.
inline int incircle(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double det =
      alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                           (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                           (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  const double bound = 1.1102230246251577e-15 * permanent;
  if (det > bound || -det > bound) return detail::sign_of(det);
  return detail::incircle_exact(a, b, c, d);
}

// ---------------------------------------------------------------------------
// Deduplication
// ---------------------------------------------------------------------------

struct DedupResult {
  std::vector<Point> unique;         // first-occurrence order
  std::vector<int> representative;   // unique index -> first original index
  std::vector<int> to_unique;        // original index -> unique index
};

inline DedupResult dedupe_points(std::span<const Point> pts) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return pts[a] < pts[b]; });
  std::vector<int> first_of(n);
  for (int k = 0; k < n; ++k) {
    const bool dup = k > 0 && pts[order[k]] == pts[order[k - 1]];
    first_of[order[k]] = dup ? first_of[order[k - 1]] : order[k];
  }
  DedupResult out;
  out.to_unique.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (first_of[i] == i) {
      out.to_unique[i] = static_cast<int>(out.unique.size());
      out.unique.push_back(pts[i]);
      out.representative.push_back(i);
    } else {
      out.to_unique[i] = out.to_unique[first_of[i]];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Delaunay triangulation
// ---------------------------------------------------------------------------

struct Triangulation {
  std::vector<Point> points;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise vertex triples
  // neighbors[t][i] is the triangle across the edge opposite triangles[t][i],
  // or -1 when that edge lies on the convex hull.
  std::vector<std::array<int, 3>> neighbors;
  std::vector<std::vector<int>> adjacency;    // sorted, symmetric
  std::vector<int> hull;                      // counter-clockwise cycle
  std::vector<int> hull_triangles;            // triangle on edge hull[i] -> hull[i+1]
  std::vector<int> vertex_triangle;           // one incident triangle per point

  int size() const { return static_cast<int>(points.size()); }
};

namespace detail {

inline std::uint64_t hilbert_index(std::uint32_t x, std::uint32_t y) {
  constexpr std::uint32_t n = 1u << 16;
  std::uint64_t d = 0;
  for (std::uint32_t s = n / 2; s > 0; s /= 2) {
    const std::uint32_t rx = (x & s) > 0 ? 1 : 0;
    const std::uint32_t ry = (y & s) > 0 ? 1 : 0;
    d += static_cast<std::uint64_t>(s) * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = n - 1 - x;
        y = n - 1 - y;
      }
      std::swap(x, y);
    }
  }
  return d;
}

inline std::vector<int> hilbert_order(std::span<const Point> pts) {
  double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
  double max_x = -min_x, max_y = -min_x;
  for (const Point& p : pts) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-300});
  const double scale = 65535.0 / span;
  std::vector<std::pair<std::uint64_t, int>> keyed;
  keyed.reserve(pts.size());
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    const auto hx = static_cast<std::uint32_t>((pts[i].x - min_x) * scale);
    const auto hy = static_cast<std::uint32_t>((pts[i].y - min_y) * scale);
    keyed.emplace_back(hilbert_index(hx, hy), i);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<int> order;
  order.reserve(keyed.size());
  for (const auto& [key, i] : keyed) order.push_back(i);
  return order;
}

// Incremental Bowyer-Watson. The unbounded face is represented by ghost
// triangles that share one symbolic vertex at infinity, so the hull comes out
// exact without a finite bounding triangle.
class DelaunayBuilder {
 public:
  explicit DelaunayBuilder(std::span<const Point> pts) : pts_(pts.begin(), pts.end()) {}

  Triangulation build() {
    const int n = static_cast<int>(pts_.size());
    if (n < 3) throw DegenerateInput("delaunay: fewer than 3 points");
    {
      std::vector<Point> sorted = pts_;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw InvalidParam("delaunay: duplicate points must be removed by the caller");
    }
    const std::vector<int> order = hilbert_order(pts_);
    const int a = order[0];
    const int b = order[1];
    int c = -1;
    for (int k = 2; k < n; ++k) {
      if (orient(pts_[a], pts_[b], pts_[order[k]]) != 0) {
        c = order[k];
        break;
      }
    }
    if (c < 0) throw DegenerateInput("delaunay: all points collinear");
    seed(a, b, c);

    start_of_.assign(n + 1, -1);
    end_of_.assign(n + 1, -1);
    for (int k = 0; k < n; ++k) {
      const int v = order[k];
      if (v == a || v == b || v == c) continue;
      insert(v);
    }
    return finish();
  }

 private:
  static constexpr int kInf = -1;

  struct Tri {
    std::array<int, 3> v{};
    std::array<int, 3> nb{};
    bool alive = true;
  };

  bool is_ghost(int t) const { return tris_[t].v[2] == kInf; }

  bool in_conflict(int t, const Point& p) const {
    const Tri& tri = tris_[t];
    if (tri.v[2] == kInf) {
      const Point& u = pts_[tri.v[0]];
      const Point& w = pts_[tri.v[1]];
      const int o = orient(u, w, p);
      if (o > 0) return true;
      if (o < 0) return false;
      // Collinear: in conflict only on the open hull segment.
      return std::min(u, w) < p && p < std::max(u, w);
    }
    return incircle(pts_[tri.v[0]], pts_[tri.v[1]], pts_[tri.v[2]], p) > 0;
  }

  int alloc(const std::array<int, 3>& v, const std::array<int, 3>& nb) {
    int t;
    if (!free_.empty()) {
      t = free_.back();
      free_.pop_back();
      tris_[t] = Tri{v, nb, true};
    } else {
      t = static_cast<int>(tris_.size());
      tris_.push_back(Tri{v, nb, true});
      mark_.push_back(0);
    }
    return t;
  }

  void seed(int a, int b, int c) {
    if (orient(pts_[a], pts_[b], pts_[c]) < 0) std::swap(b, c);
    const int t0 = alloc({a, b, c}, {-1, -1, -1});
    const int g_a = alloc({c, b, kInf}, {-1, -1, -1});
    const int g_b = alloc({a, c, kInf}, {-1, -1, -1});
    const int g_c = alloc({b, a, kInf}, {-1, -1, -1});
    std::map<std::pair<int, int>, int> edge_owner;
    for (int t : {t0, g_a, g_b, g_c}) {
      for (int i = 0; i < 3; ++i) {
        edge_owner[{tris_[t].v[(i + 1) % 3], tris_[t].v[(i + 2) % 3]}] = t;
      }
    }
    for (int t : {t0, g_a, g_b, g_c}) {
      for (int i = 0; i < 3; ++i) {
        tris_[t].nb[i] = edge_owner.at({tris_[t].v[(i + 2) % 3], tris_[t].v[(i + 1) % 3]});
      }
    }
    hint_ = t0;
  }

  int locate(const Point& p) const {
    int t = hint_;
    if (is_ghost(t)) t = tris_[t].nb[2];
    const std::size_t limit = 4 * tris_.size() + 16;
    for (std::size_t step = 0; step < limit; ++step) {
      if (is_ghost(t)) return t;
      const Tri& tri = tris_[t];
      bool moved = false;
      for (int k = 0; k < 3; ++k) {
        const int i = static_cast<int>((k + step) % 3);
        if (orient(pts_[tri.v[(i + 1) % 3]], pts_[tri.v[(i + 2) % 3]], p) < 0) {
          t = tri.nb[i];
          moved = true;
          break;
        }
      }
      if (!moved) return t;
    }
    for (int u = 0; u < static_cast<int>(tris_.size()); ++u) {
      if (tris_[u].alive && in_conflict(u, p)) return u;
    }
    throw InvariantViolation("delaunay: point location failed");
  }

  void insert(int q) {
    const Point& p = pts_[q];
    const int start = locate(p);
    ++stamp_;
    const int in_stamp = 2 * stamp_;
    const int out_stamp = 2 * stamp_ + 1;
    cavity_.clear();
    boundary_.clear();
    cavity_.push_back(start);
    mark_[start] = in_stamp;
    for (std::size_t k = 0; k < cavity_.size(); ++k) {
      const int t = cavity_[k];
      for (int i = 0; i < 3; ++i) {
        const int nb = tris_[t].nb[i];
        if (mark_[nb] == in_stamp) continue;
        if (mark_[nb] != out_stamp && in_conflict(nb, p)) {
          mark_[nb] = in_stamp;
          cavity_.push_back(nb);
        } else {
          mark_[nb] = out_stamp;
          boundary_.emplace_back(t, i);
        }
      }
    }

    created_.clear();
    for (const auto& [t, i] : boundary_) {
      const int a = tris_[t].v[(i + 1) % 3];
      const int b = tris_[t].v[(i + 2) % 3];
      const int outer = tris_[t].nb[i];
      const int fresh = alloc({a, b, q}, {-1, -1, outer});
      for (int j = 0; j < 3; ++j) {
        if (tris_[outer].nb[j] == t) tris_[outer].nb[j] = fresh;
      }
      start_of_[a + 1] = fresh;
      end_of_[b + 1] = fresh;
      created_.push_back(fresh);
    }
    for (int t : cavity_) {
      tris_[t].alive = false;
      free_.push_back(t);
    }
    for (int fresh : created_) {
      Tri& tri = tris_[fresh];
      tri.nb[0] = start_of_[tri.v[1] + 1];
      tri.nb[1] = end_of_[tri.v[0] + 1];
    }
    for (int fresh : created_) {
      Tri& tri = tris_[fresh];
      if (tri.v[0] == kInf) {
        tri.v = {tri.v[1], tri.v[2], tri.v[0]};
        tri.nb = {tri.nb[1], tri.nb[2], tri.nb[0]};
      } else if (tri.v[1] == kInf) {
        tri.v = {tri.v[2], tri.v[0], tri.v[1]};
        tri.nb = {tri.nb[2], tri.nb[0], tri.nb[1]};
      }
      if (!is_ghost(fresh)) hint_ = fresh;
    }
    if (is_ghost(hint_) || !tris_[hint_].alive) hint_ = created_.front();
  }

  Triangulation finish() const {
    const int n = static_cast<int>(pts_.size());
    Triangulation out;
    out.points = pts_;
    std::vector<int> compact(tris_.size(), -1);
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (tris_[t].alive && !is_ghost(t)) {
        compact[t] = static_cast<int>(out.triangles.size());
        out.triangles.push_back(tris_[t].v);
      }
    }
    out.neighbors.resize(out.triangles.size());
    out.vertex_triangle.assign(n, -1);
    std::vector<int> hull_next(n, -1);
    std::vector<int> hull_tri_of(n, -1);
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (!tris_[t].alive) continue;
      if (is_ghost(t)) {
        // Ghost (u, w, inf) borders hull edge w -> u of the counter-clockwise hull.
        hull_next[tris_[t].v[1]] = tris_[t].v[0];
        hull_tri_of[tris_[t].v[1]] = compact[tris_[t].nb[2]];
        continue;
      }
      const int ct = compact[t];
      for (int i = 0; i < 3; ++i) {
        const int nb = tris_[t].nb[i];
        out.neighbors[ct][i] = is_ghost(nb) ? -1 : compact[nb];
        out.vertex_triangle[tris_[t].v[i]] = ct;
      }
    }
    out.adjacency.assign(n, {});
    {
      std::vector<int> degree(n, 0);
      for (const auto& tri : out.triangles) {
        for (int v : tri) degree[v] += 2;
      }
      for (int v = 0; v < n; ++v) out.adjacency[v].reserve(degree[v]);
    }
    for (const auto& tri : out.triangles) {
      for (int i = 0; i < 3; ++i) {
        out.adjacency[tri[i]].push_back(tri[(i + 1) % 3]);
        out.adjacency[tri[(i + 1) % 3]].push_back(tri[i]);
      }
    }
    for (auto& adj : out.adjacency) {
      std::sort(adj.begin(), adj.end());
      adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
    int first = -1;
    for (int v = 0; v < n; ++v) {
      if (hull_next[v] >= 0) {
        first = v;
        break;
      }
    }
    for (int v = first;;) {
      out.hull.push_back(v);
      out.hull_triangles.push_back(hull_tri_of[v]);
      v = hull_next[v];
      if (v == first) break;
    }
    return out;
  }

  std::vector<Point> pts_;
  std::vector<Tri> tris_;
  std::vector<int> mark_;
  std::vector<int> free_;
  std::vector<int> start_of_;
  std::vector<int> end_of_;
  std::vector<int> cavity_;
  std::vector<std::pair<int, int>> boundary_;
  std::vector<int> created_;
  int stamp_ = 0;
  int hint_ = 0;
};

}  // namespace detail

// Delaunay triangulation of distinct points. Throws DegenerateInput for fewer
// than three points or collinear input.
inline Triangulation delaunay(std::span<const Point> points) {
  for (const Point& p : points) {
    if (!is_finite(p)) throw InvalidParam("delaunay: non-finite coordinate");
  }
  return detail::DelaunayBuilder(points).build();
}

inline std::optional<Triangulation> try_delaunay(std::span<const Point> points) {
  try {
    return delaunay(points);
  } catch (const DegenerateInput&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Euclidean minimum spanning tree
// ---------------------------------------------------------------------------

struct Edge {
  int u = 0;
  int v = 0;
  double length = 0.0;
};
using EdgeList = std::vector<Edge>;

inline double total_length(const EdgeList& edges) {
  double sum = 0.0;
  for (const Edge& e : edges) sum += e.length;
  return sum;
}

// Neighbour pairs over distinct points: Delaunay edges, or the sorted chain when
// the points are collinear or fewer than three.
inline EdgeList proximity_edges(std::span<const Point> unique_points) {
  const int n = static_cast<int>(unique_points.size());
  EdgeList edges;
  if (n < 2) return edges;
  if (auto tri = try_delaunay(unique_points)) {
    for (int u = 0; u < n; ++u) {
      for (int v : tri->adjacency[u]) {
        if (u < v) edges.push_back({u, v, dist(unique_points[u], unique_points[v])});
      }
    }
    return edges;
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return unique_points[a] < unique_points[b]; });
  for (int k = 0; k + 1 < n; ++k) {
    const int u = std::min(order[k], order[k + 1]);
    const int v = std::max(order[k], order[k + 1]);
    edges.push_back({u, v, dist(unique_points[u], unique_points[v])});
  }
  return edges;
}

// Kruskal over a candidate edge list; ties broken by (length, u, v).
inline EdgeList kruskal(int n, EdgeList candidates) {
  std::sort(candidates.begin(), candidates.end(), [](const Edge& a, const Edge& b) {
    if (a.length != b.length) return a.length < b.length;
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
  });
  DisjointSets sets(n);
  EdgeList tree;
  for (const Edge& e : candidates) {
    if (sets.unite(e.u, e.v)) tree.push_back(e);
    if (static_cast<int>(tree.size()) + 1 == n) break;
  }
  return tree;
}

// Minimum spanning tree of the complete Euclidean graph, using only Delaunay
// edges as candidates. Coincident points are joined by zero-length edges.
inline EdgeList euclidean_mst(std::span<const Point> points) {
  if (points.size() <= 1) return {};
  const DedupResult dd = dedupe_points(points);
  const int u_count = static_cast<int>(dd.unique.size());
  EdgeList out;
  for (const Edge& e : kruskal(u_count, proximity_edges(dd.unique))) {
    out.push_back({dd.representative[e.u], dd.representative[e.v], e.length});
  }
  for (int i = 0; i < static_cast<int>(points.size()); ++i) {
    const int rep = dd.representative[dd.to_unique[i]];
    if (rep != i) out.push_back({rep, i, 0.0});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Queries on a triangulation
// ---------------------------------------------------------------------------

namespace detail {

// Walks from `hint` towards p. Returns the index of a triangle containing p
// (boundary included) or -1 when p is outside the convex hull.
inline int locate(const Triangulation& tri, const Point& p, int hint) {
  if (tri.triangles.empty()) return -1;
  int t = (hint >= 0 && hint < static_cast<int>(tri.triangles.size())) ? hint : 0;
  const std::size_t limit = 4 * tri.triangles.size() + 16;
  for (std::size_t step = 0; step < limit; ++step) {
    const auto& v = tri.triangles[t];
    bool moved = false;
    for (int k = 0; k < 3; ++k) {
      const int i = static_cast<int>((k + step) % 3);
      if (orient(tri.points[v[(i + 1) % 3]], tri.points[v[(i + 2) % 3]], p) < 0) {
        t = tri.neighbors[t][i];
        moved = true;
        break;
      }
    }
    if (t < 0) return -1;
    if (!moved) return t;
  }
  for (int u = 0; u < static_cast<int>(tri.triangles.size()); ++u) {
    const auto& v = tri.triangles[u];
    if (orient(tri.points[v[0]], tri.points[v[1]], p) >= 0 &&
        orient(tri.points[v[1]], tri.points[v[2]], p) >= 0 &&
        orient(tri.points[v[2]], tri.points[v[0]], p) >= 0)
      return u;
  }
  return -1;
}

inline bool circumcircle_contains(const Triangulation& tri, int t, const Point& p) {
  const auto& v = tri.triangles[t];
  return incircle(tri.points[v[0]], tri.points[v[1]], tri.points[v[2]], p) > 0;
}

}  // namespace detail

// Reusable buffers for repeated conflict and candidate queries.
struct ConflictScratch {
  std::vector<int> seeds;
  std::vector<int> seen;
  std::vector<int> stack;
  std::vector<int> found;
  std::vector<int> result;
  int located = -1;  // triangle holding the last query point, -1 outside the hull
};

namespace detail {

inline void conflicting_triangles_into(const Triangulation& tri, const Point& p, int hint,
                                       ConflictScratch& ws) {
  ws.seeds.clear();
  ws.seen.clear();
  ws.stack.clear();
  ws.found.clear();
  ws.located = locate(tri, p, hint);
  if (ws.located >= 0) {
    ws.seeds.push_back(ws.located);
  } else {
    const int h = static_cast<int>(tri.hull.size());
    for (int i = 0; i < h; ++i) {
      const Point& a = tri.points[tri.hull[i]];
      const Point& b = tri.points[tri.hull[(i + 1) % h]];
      if (orient(a, b, p) < 0 && circumcircle_contains(tri, tri.hull_triangles[i], p)) {
        ws.seeds.push_back(tri.hull_triangles[i]);
      }
    }
  }
  // Conflict regions are small, so a linear scan of the visited list beats a
  // per-query mark array over all triangles.
  auto mark = [&](int t) {
    if (std::find(ws.seen.begin(), ws.seen.end(), t) != ws.seen.end()) return false;
    ws.seen.push_back(t);
    return true;
  };
  for (int s : ws.seeds) {
    if (!mark(s)) continue;
    if (!circumcircle_contains(tri, s, p)) continue;
    ws.stack.push_back(s);
    while (!ws.stack.empty()) {
      const int t = ws.stack.back();
      ws.stack.pop_back();
      ws.found.push_back(t);
      for (int nb : tri.neighbors[t]) {
        if (nb < 0 || !mark(nb)) continue;
        if (circumcircle_contains(tri, nb, p)) ws.stack.push_back(nb);
      }
    }
  }
  std::sort(ws.found.begin(), ws.found.end());
}

inline void visible_hull_chain_into(const Triangulation& tri, const Point& p, std::vector<int>& chain) {
  chain.clear();
  const int h = static_cast<int>(tri.hull.size());
  for (int i = 0; i < h; ++i) {
    const int a = tri.hull[i];
    const int b = tri.hull[(i + 1) % h];
    if (orient(tri.points[a], tri.points[b], p) < 0) {
      chain.push_back(a);
      chain.push_back(b);
    }
  }
  std::sort(chain.begin(), chain.end());
  chain.erase(std::unique(chain.begin(), chain.end()), chain.end());
}

inline void candidate_sources_into(const Triangulation& tri, const Point& target, int paired_source,
                                   int hint, ConflictScratch& ws) {
  conflicting_triangles_into(tri, target, hint, ws);
  std::vector<int>& result = ws.result;
  result.clear();
  if (!ws.found.empty()) {
    for (int t : ws.found) {
      for (int v : tri.triangles[t]) result.push_back(v);
    }
    std::sort(result.begin(), result.end());
    result.erase(std::unique(result.begin(), result.end()), result.end());
  } else {
    visible_hull_chain_into(tri, target, result);
  }
  if (std::binary_search(result.begin(), result.end(), paired_source)) {
    const auto& adj = tri.adjacency[paired_source];
    result.insert(result.end(), adj.begin(), adj.end());
    std::sort(result.begin(), result.end());
    result.erase(std::unique(result.begin(), result.end()), result.end());
  }
}

}  // namespace detail

// Indices of every triangle whose circumcircle strictly contains p.
inline std::vector<int> conflicting_triangles(const Triangulation& tri, const Point& p,
                                              int hint = 0) {
  ConflictScratch ws;
  detail::conflicting_triangles_into(tri, p, hint, ws);
  return std::move(ws.found);
}

// Hull vertices between the two tangent points seen from an exterior point p.
inline std::vector<int> visible_hull_chain(const Triangulation& tri, const Point& p) {
  std::vector<int> chain;
  detail::visible_hull_chain_into(tri, p, chain);
  return chain;
}

// Sources near a target: vertices of every triangle whose circumcircle
// contains the target, otherwise the visible hull chain; when the paired
// source is among them its Delaunay neighbours are added.
// `hint` is a triangle to start the point location from; by default the walk
// starts at the paired source.
inline std::vector<int> candidate_sources(const Triangulation& tri, const Point& target,
                                          int paired_source, int hint = -1) {
  if (paired_source < 0 || paired_source >= tri.size())
    throw InvalidParam("candidate_sources: paired source out of range");
  ConflictScratch ws;
  detail::candidate_sources_into(tri, target, paired_source,
                                 hint >= 0 ? hint : tri.vertex_triangle[paired_source], ws);
  return std::move(ws.result);
}

// ---------------------------------------------------------------------------
// Nearest-neighbour queries
// ---------------------------------------------------------------------------

class KdTree {
 public:
  struct Hit {
    int index = -1;
    double distance = std::numeric_limits<double>::infinity();
  };

  explicit KdTree(std::vector<Point> points) : pts_(std::move(points)), order_(pts_.size()) {
    for (int i = 0; i < static_cast<int>(order_.size()); ++i) order_[i] = i;
    build(0, static_cast<int>(order_.size()), 0);
  }

  bool empty() const { return pts_.empty(); }

  // Closest point to q; among equidistant points the smallest index wins.
  Hit nearest(const Point& q) const {
    double best_d2 = std::numeric_limits<double>::infinity();
    int best = -1;
    search(q, 0, static_cast<int>(order_.size()), 0, best_d2, best);
    if (best < 0) return {};
    return {best, std::sqrt(best_d2)};
  }

 private:
  void build(int lo, int hi, int depth) {
    if (hi - lo <= 1) return;
    const int mid = (lo + hi) / 2;
    const bool by_x = depth % 2 == 0;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](int a, int b) {
                       return by_x ? pts_[a].x < pts_[b].x : pts_[a].y < pts_[b].y;
                     });
    build(lo, mid, depth + 1);
    build(mid + 1, hi, depth + 1);
  }

  void search(const Point& q, int lo, int hi, int depth, double& best_d2, int& best) const {
    if (lo >= hi) return;
    const int mid = (lo + hi) / 2;
    const int idx = order_[mid];
    const double dx = pts_[idx].x - q.x;
    const double dy = pts_[idx].y - q.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
      best_d2 = d2;
      best = idx;
    }
    const double diff = depth % 2 == 0 ? q.x - pts_[idx].x : q.y - pts_[idx].y;
    const bool left_first = diff < 0;
    if (left_first) {
      search(q, lo, mid, depth + 1, best_d2, best);
      if (diff * diff <= best_d2) search(q, mid + 1, hi, depth + 1, best_d2, best);
    } else {
      search(q, mid + 1, hi, depth + 1, best_d2, best);
      if (diff * diff <= best_d2) search(q, lo, mid, depth + 1, best_d2, best);
    }
  }

  std::vector<Point> pts_;
  std::vector<int> order_;
};

}  // namespace mscd
