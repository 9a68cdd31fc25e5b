#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "mscd/geometry.hpp"
#include "mscd/instance.hpp"
#include "mscd/union_find.hpp"

namespace mscd {

// A node of an original tree: a depot, or the source or target of a request.
// Ordered by (kind, index).
struct NodeRef {
  enum class Kind : std::uint8_t { kDepot = 0, kSource = 1, kTarget = 2 };
  Kind kind = Kind::kDepot;
  int index = 0;

  static NodeRef depot(int j) { return {Kind::kDepot, j}; }
  static NodeRef source(int i) { return {Kind::kSource, i}; }
  static NodeRef target(int i) { return {Kind::kTarget, i}; }

  friend bool operator==(const NodeRef&, const NodeRef&) = default;
  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

inline std::string to_string(const NodeRef& n) {
  const char tag = n.kind == NodeRef::Kind::kDepot ? 'd' : n.kind == NodeRef::Kind::kSource ? 's' : 't';
  return tag + std::to_string(n.index);
}

inline const Point& point_of(const Instance& inst, const NodeRef& n) {
  switch (n.kind) {
    case NodeRef::Kind::kDepot:
      return inst.depots[n.index].location;
    case NodeRef::Kind::kSource:
      return inst.requests[n.index].source;
    case NodeRef::Kind::kTarget:
      break;
  }
  return inst.requests[n.index].target;
}

struct TreeEdge {
  NodeRef a;
  NodeRef b;
  double length = 0.0;
};

struct OriginalTree {
  int depot = 0;                 // depot index
  std::vector<NodeRef> nodes;    // sorted
  std::vector<TreeEdge> edges;
  double weight = 0.0;
  std::vector<int> requests;     // request indices in attachment order

  bool empty() const { return requests.empty(); }
};

struct Forest {
  std::vector<OriginalTree> trees;  // one per depot, indexed like Instance::depots
  std::vector<int> owner;           // request index -> depot index

  double total_weight() const {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.weight;
    return sum;
  }
};

namespace detail {

// Nearest depot per point; ties go to the lowest (fastest) depot index.
inline std::vector<KdTree::Hit> nearest_depots(const Instance& inst,
                                               const std::vector<Point>& pts) {
  std::vector<Point> locs;
  for (const Depot& d : inst.depots) locs.push_back(d.location);
  const KdTree kd(std::move(locs));
  std::vector<KdTree::Hit> out;
  out.reserve(pts.size());
  for (const Point& p : pts) out.push_back(kd.nearest(p));
  return out;
}

inline std::vector<Point> source_points(const Instance& inst) {
  std::vector<Point> pts;
  pts.reserve(inst.requests.size());
  for (const Request& r : inst.requests) pts.push_back(r.source);
  return pts;
}

// Builds the forest from per-request parents. `parent[i]` is the node the
// source of request i hangs from; depot parents must be the nearest depot.
// `order` lists requests in attachment order (parents before children).
inline Forest assemble_forest(const Instance& inst, const std::vector<NodeRef>& parent,
                              const std::vector<double>& parent_len,
                              const std::vector<int>& order) {
  Forest f;
  f.trees.resize(inst.k());
  for (int j = 0; j < inst.k(); ++j) f.trees[j].depot = j;
  f.owner.assign(inst.m(), -1);
  for (int i : order) {
    const NodeRef& p = parent[i];
    const int owner = p.kind == NodeRef::Kind::kDepot ? p.index : f.owner[p.index];
    f.owner[i] = owner;
    OriginalTree& t = f.trees[owner];
    const Request& r = inst.requests[i];
    const double st = dist(r.source, r.target);
    t.requests.push_back(i);
    t.edges.push_back({p, NodeRef::source(i), parent_len[i]});
    t.edges.push_back({NodeRef::source(i), NodeRef::target(i), st});
    t.weight += parent_len[i] + st;
  }
  // Sorted node list: the depot, then sources, then targets.
  std::vector<int> ids;
  for (auto& t : f.trees) {
    ids.assign(t.requests.begin(), t.requests.end());
    std::sort(ids.begin(), ids.end());
    t.nodes.reserve(1 + 2 * ids.size());
    t.nodes.push_back(NodeRef::depot(t.depot));
    for (int i : ids) t.nodes.push_back(NodeRef::source(i));
    for (int i : ids) t.nodes.push_back(NodeRef::target(i));
  }
  return f;
}

}  // namespace detail

// Contract all depots into one super-depot, take the MST over it and the
// sources (Delaunay edges plus one edge per source to its nearest depot), map
// super-depot edges back to the nearest depot, then hang each target off its
// source.
inline Forest build_trees_mst(const Instance& inst) {
  const int m = inst.m();
  const std::vector<Point> sources = detail::source_points(inst);
  const auto near = detail::nearest_depots(inst, sources);
  const DedupResult dd = dedupe_points(sources);
  const int u_count = static_cast<int>(dd.unique.size());
  const int super = u_count;

  EdgeList candidates = proximity_edges(dd.unique);
  for (int q = 0; q < u_count; ++q) {
    candidates.push_back({q, super, near[dd.representative[q]].distance});
  }
  const EdgeList mst = kruskal(u_count + 1, std::move(candidates));

  std::vector<std::vector<std::pair<int, double>>> adj(u_count + 1);
  for (const Edge& e : mst) {
    adj[e.u].emplace_back(e.v, e.length);
    adj[e.v].emplace_back(e.u, e.length);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());

  // Duplicate sources hang off their representative with zero-length edges.
  std::vector<std::vector<int>> duplicates(u_count);
  for (int i = 0; i < m; ++i) {
    const int q = dd.to_unique[i];
    if (dd.representative[q] != i) duplicates[q].push_back(i);
  }

  std::vector<NodeRef> parent(m);
  std::vector<double> parent_len(m, 0.0);
  std::vector<int> order;
  order.reserve(m);
  std::vector<char> seen(u_count + 1, 0);
  std::queue<int> bfs;
  bfs.push(super);
  seen[super] = 1;
  while (!bfs.empty()) {
    const int u = bfs.front();
    bfs.pop();
    for (const auto& [v, len] : adj[u]) {
      if (seen[v]) continue;
      seen[v] = 1;
      const int rep = dd.representative[v];
      if (u == super) {
        parent[rep] = NodeRef::depot(near[rep].index);
      } else {
        parent[rep] = NodeRef::source(dd.representative[u]);
      }
      parent_len[rep] = len;
      order.push_back(rep);
      for (int dup : duplicates[v]) {
        parent[dup] = NodeRef::source(rep);
        parent_len[dup] = 0.0;
        order.push_back(dup);
      }
      bfs.push(v);
    }
  }
  return detail::assemble_forest(inst, parent, parent_len, order);
}

inline constexpr double kDefaultMstK = 7.0;

// Prim-like growth from the super-depot where a source may also hang off the
// target of a request already in the tree. Only the candidate sources of the
// newly attached target are re-prioritised. With `mst_k`, Delaunay neighbours
// of the attached source are offered a source-to-source connection too, and a
// target-to-source connection is taken only if it is at most mst_k times the
// source-to-source alternative.
inline Forest build_trees_prim(const Instance& inst, std::optional<double> mst_k = std::nullopt) {
  if (mst_k && !(*mst_k >= 1.0)) throw InvalidParam("mst_k must be at least 1");
  const int m = inst.m();
  const std::vector<Point> sources = detail::source_points(inst);
  const auto near = detail::nearest_depots(inst, sources);
  const DedupResult dd = dedupe_points(sources);
  const int u_count = static_cast<int>(dd.unique.size());

  // Requests per unique source, flattened.
  std::vector<int> group_start(u_count + 1, 0), group_items(m);
  for (int i = 0; i < m; ++i) ++group_start[dd.to_unique[i] + 1];
  for (int q = 0; q < u_count; ++q) group_start[q + 1] += group_start[q];
  {
    std::vector<int> fill(group_start.begin(), group_start.end() - 1);
    for (int i = 0; i < m; ++i) group_items[fill[dd.to_unique[i]]++] = i;
  }

  // Candidate sources per target, as unique-source indices: request i owns
  // cand[cand_begin[i] .. cand_end[i]).
  std::vector<int> cand, cand_begin(m, 0), cand_end(m, 0);
  cand.reserve(8 * static_cast<std::size_t>(m));
  std::vector<std::vector<int>> chain_neighbours;
  const std::vector<std::vector<int>>* neighbours = &chain_neighbours;
  const auto tri = u_count >= 3 ? try_delaunay(dd.unique) : std::nullopt;
  if (tri) {
    neighbours = &tri->adjacency;
    // Targets are visited along a space-filling curve so that each point
    // location walk starts from the previous target's triangle.
    std::vector<Point> targets(m);
    for (int i = 0; i < m; ++i) targets[i] = inst.requests[i].target;
    ConflictScratch ws;
    int hint = -1;
    for (int i : detail::hilbert_order(targets)) {
      if (hint < 0) hint = tri->vertex_triangle[dd.to_unique[i]];
      detail::candidate_sources_into(*tri, targets[i], dd.to_unique[i], hint, ws);
      if (ws.located >= 0) hint = ws.located;
      cand_begin[i] = static_cast<int>(cand.size());
      cand.insert(cand.end(), ws.result.begin(), ws.result.end());
      cand_end[i] = static_cast<int>(cand.size());
    }
  } else {
    chain_neighbours.assign(u_count, {});
    std::vector<int> by_coord(u_count);
    for (int q = 0; q < u_count; ++q) by_coord[q] = q;
    std::sort(by_coord.begin(), by_coord.end(),
              [&](int a, int b) { return dd.unique[a] < dd.unique[b]; });
    for (int k = 0; k + 1 < u_count; ++k) {
      chain_neighbours[by_coord[k]].push_back(by_coord[k + 1]);
      chain_neighbours[by_coord[k + 1]].push_back(by_coord[k]);
    }
    // Neighbours of a target in the triangulation of the sources plus the
    // target: the adjacent sources along the line when the target lies on it,
    // every source otherwise.
    const bool on_line_possible = u_count >= 2;
    std::vector<int> c;
    for (int i = 0; i < m; ++i) {
      const Point& t = inst.requests[i].target;
      c.clear();
      if (!on_line_possible || orient(dd.unique[by_coord.front()], dd.unique[by_coord.back()], t) != 0) {
        for (int q = 0; q < u_count; ++q) c.push_back(q);
      } else {
        const auto lo = std::lower_bound(by_coord.begin(), by_coord.end(), t,
                                         [&](int q, const Point& p) { return dd.unique[q] < p; });
        auto hi = lo;
        while (hi != by_coord.end() && dd.unique[*hi] == t) ++hi;
        if (lo != by_coord.begin()) c.push_back(*(lo - 1));
        c.insert(c.end(), lo, hi);
        if (hi != by_coord.end()) c.push_back(*hi);
        std::sort(c.begin(), c.end());
      }
      cand_begin[i] = static_cast<int>(cand.size());
      cand.insert(cand.end(), c.begin(), c.end());
      cand_end[i] = static_cast<int>(cand.size());
    }
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> p_st(m), p_ss(m, kInf);
  std::vector<NodeRef> via_st(m), via_ss(m);
  for (int i = 0; i < m; ++i) {
    p_st[i] = near[i].distance;
    via_st[i] = NodeRef::depot(near[i].index);
  }
  const double k_factor = mst_k.value_or(kInf);
  auto key_of = [&](int i) {
    return mst_k ? std::min(p_st[i], k_factor * p_ss[i]) : p_st[i];
  };

  using Entry = std::tuple<double, int, int>;  // (key, request id, request index)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (int i = 0; i < m; ++i) heap.emplace(key_of(i), inst.requests[i].id, i);

  std::vector<char> in_tree(m, 0);
  std::vector<NodeRef> parent(m);
  std::vector<double> parent_len(m, 0.0);
  std::vector<int> order;
  order.reserve(m);
  while (!heap.empty()) {
    const auto [key, id, i] = heap.top();
    heap.pop();
    if (in_tree[i] || key != key_of(i)) continue;
    in_tree[i] = 1;
    order.push_back(i);
    if (p_st[i] <= k_factor * p_ss[i]) {
      parent[i] = via_st[i];
      parent_len[i] = p_st[i];
    } else {
      parent[i] = via_ss[i];
      parent_len[i] = p_ss[i];
    }
    const Point& t = inst.requests[i].target;
    for (int c = cand_begin[i]; c < cand_end[i]; ++c) {
      const int q = cand[c];
      for (int g = group_start[q]; g < group_start[q + 1]; ++g) {
        const int j = group_items[g];
        if (in_tree[j]) continue;
        const double d = dist(t, inst.requests[j].source);
        if (d < p_st[j]) {
          p_st[j] = d;
          via_st[j] = NodeRef::target(i);
          heap.emplace(key_of(j), inst.requests[j].id, j);
        }
      }
    }
    if (mst_k) {
      const Point& s = inst.requests[i].source;
      const int qi = dd.to_unique[i];
      auto offer = [&](int q) {
        for (int g = group_start[q]; g < group_start[q + 1]; ++g) {
          const int j = group_items[g];
          if (in_tree[j]) continue;
          const double d = dist(s, inst.requests[j].source);
          if (d < p_ss[j]) {
            p_ss[j] = d;
            via_ss[j] = NodeRef::source(i);
            heap.emplace(key_of(j), inst.requests[j].id, j);
          }
        }
      };
      offer(qi);
      for (int q : (*neighbours)[qi]) offer(q);
    }
  }
  return detail::assemble_forest(inst, parent, parent_len, order);
}

enum class TreeVariant { kMst, kPrim, kPrimMstK };

inline TreeVariant parse_tree_variant(const std::string& name) {
  if (name == "mst") return TreeVariant::kMst;
  if (name == "prim") return TreeVariant::kPrim;
  if (name == "prim-mst-k" || name == "prim-mst-7") return TreeVariant::kPrimMstK;
  throw InvalidParam("unknown tree variant: " + name);
}

inline std::string to_string(TreeVariant v) {
  switch (v) {
    case TreeVariant::kMst:
      return "mst";
    case TreeVariant::kPrim:
      return "prim";
    case TreeVariant::kPrimMstK:
      break;
  }
  return "prim-mst-k";
}

inline Forest build_trees(const Instance& inst, TreeVariant variant, double mst_k = kDefaultMstK) {
  switch (variant) {
    case TreeVariant::kMst:
      return build_trees_mst(inst);
    case TreeVariant::kPrim:
      return build_trees_prim(inst);
    case TreeVariant::kPrimMstK:
      break;
  }
  return build_trees_prim(inst, mst_k);
}

// Structural problems with a forest; empty when it is valid.
inline std::vector<std::string> check_forest(const Instance& inst, const Forest& f,
                                             double tol = 1e-9) {
  std::vector<std::string> issues;
  if (static_cast<int>(f.trees.size()) != inst.k()) issues.push_back("tree count != depot count");
  std::vector<int> seen(inst.m(), 0);
  for (const OriginalTree& t : f.trees) {
    for (int i : t.requests) {
      if (i < 0 || i >= inst.m()) {
        issues.push_back("request index out of range");
        continue;
      }
      ++seen[i];
      if (f.owner[i] != t.depot) issues.push_back("owner mismatch for request " + std::to_string(i));
    }
    if (!std::binary_search(t.nodes.begin(), t.nodes.end(), NodeRef::depot(t.depot)))
      issues.push_back("tree missing its depot");
    if (t.edges.size() + 1 != t.nodes.size())
      issues.push_back("tree of depot " + std::to_string(t.depot) + " has wrong edge count");
    auto pos = [&](const NodeRef& n) {
      const auto it = std::lower_bound(t.nodes.begin(), t.nodes.end(), n);
      return (it != t.nodes.end() && *it == n) ? static_cast<int>(it - t.nodes.begin()) : -1;
    };
    DisjointSets sets(static_cast<int>(t.nodes.size()));
    double weight = 0.0;
    for (const TreeEdge& e : t.edges) {
      const int a = pos(e.a), b = pos(e.b);
      if (a < 0 || b < 0) {
        issues.push_back("edge endpoint not in tree");
        continue;
      }
      if (!sets.unite(a, b)) issues.push_back("cycle in tree of depot " + std::to_string(t.depot));
      const double d = dist(point_of(inst, e.a), point_of(inst, e.b));
      if (std::abs(d - e.length) > tol * std::max(1.0, d)) issues.push_back("edge length mismatch");
      weight += e.length;
    }
    if (std::abs(weight - t.weight) > tol * std::max(1.0, weight)) issues.push_back("weight mismatch");
    for (int i : t.requests) {
      const bool has_st = std::any_of(t.edges.begin(), t.edges.end(), [&](const TreeEdge& e) {
        return (e.a == NodeRef::source(i) && e.b == NodeRef::target(i)) ||
               (e.b == NodeRef::source(i) && e.a == NodeRef::target(i));
      });
      if (!has_st) issues.push_back("missing source-target edge for request " + std::to_string(i));
    }
  }
  for (int i = 0; i < inst.m(); ++i) {
    if (seen[i] != 1) issues.push_back("request " + std::to_string(i) + " covered " +
                                       std::to_string(seen[i]) + " times");
  }
  return issues;
}

inline nlohmann::json forest_to_json(const Instance& inst, const Forest& f) {
  nlohmann::json out;
  out["trees"] = nlohmann::json::array();
  for (const OriginalTree& t : f.trees) {
    nlohmann::json jt;
    jt["depot_id"] = inst.depots[t.depot].id;
    jt["weight"] = t.weight;
    jt["request_ids"] = nlohmann::json::array();
    for (int i : t.requests) jt["request_ids"].push_back(inst.requests[i].id);
    jt["nodes"] = nlohmann::json::array();
    for (const NodeRef& n : t.nodes) jt["nodes"].push_back(to_string(n));
    jt["edges"] = nlohmann::json::array();
    for (const TreeEdge& e : t.edges) {
      jt["edges"].push_back({to_string(e.a), to_string(e.b), e.length});
    }
    out["trees"].push_back(std::move(jt));
  }
  return out;
}

}  // namespace mscd
