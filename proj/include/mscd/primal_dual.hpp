#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mscd/errors.hpp"
#include "mscd/geometry.hpp"
#include "mscd/instance.hpp"
#include "mscd/trees.hpp"
#include "mscd/union_find.hpp"

namespace mscd {

// ---------------------------------------------------------------------------
// Level graph: one vertex per original tree. Levels are 0-based, level 0 is
// the fastest.
// ---------------------------------------------------------------------------

struct LevelGraph {
  std::vector<double> speeds;             // per level, strictly decreasing
  std::vector<int> level;                 // per vertex
  std::vector<double> weight;             // per vertex, w(v)
  std::vector<int> depot;                 // per vertex, depot index or -1
  std::vector<std::vector<double>> ell;   // symmetric min node distance
  // realizer[u][v] = (node of u, node of v) at distance ell[u][v]; empty for
  // graphs built directly from a matrix.
  std::vector<std::vector<std::pair<NodeRef, NodeRef>>> realizer;

  int size() const { return static_cast<int>(level.size()); }
  int h() const { return static_cast<int>(speeds.size()); }

  double cost(int l, int u, int v) const { return ell[u][v] / speeds[l]; }

  // Extra cost of serving v at level l+1 instead of level l.
  double penalty(int l, int v) const {
    return weight[v] * (1.0 / speeds[l + 1] - 1.0 / speeds[l]);
  }

  template <typename Range>
  double penalty(int l, const Range& vertices) const {
    double sum = 0.0;
    for (int v : vertices) sum += penalty(l, v);
    return sum;
  }

  int count_at_level(int l) const {
    return static_cast<int>(std::count(level.begin(), level.end(), l));
  }
};

// Builds a level graph from explicit data; used for synthetic graphs.
inline LevelGraph make_level_graph(std::vector<double> speeds, std::vector<int> level,
                                   std::vector<double> weight,
                                   std::vector<std::vector<double>> ell) {
  LevelGraph g;
  g.speeds = std::move(speeds);
  g.level = std::move(level);
  g.weight = std::move(weight);
  g.ell = std::move(ell);
  g.depot.assign(g.level.size(), -1);
  const int n = g.size();
  if (g.h() < 1) throw InvalidParam("level graph needs at least one level");
  for (int l = 1; l < g.h(); ++l) {
    if (!(g.speeds[l] < g.speeds[l - 1])) throw InvalidParam("level speeds must decrease");
  }
  if (static_cast<int>(g.weight.size()) != n || static_cast<int>(g.ell.size()) != n)
    throw InvalidParam("level graph size mismatch");
  std::vector<int> seen(g.h(), 0);
  for (int v = 0; v < n; ++v) {
    if (g.level[v] < 0 || g.level[v] >= g.h()) throw InvalidParam("vertex level out of range");
    seen[g.level[v]] = 1;
    if (static_cast<int>(g.ell[v].size()) != n) throw InvalidParam("ell must be square");
    if (g.weight[v] < 0.0) throw InvalidParam("negative vertex weight");
  }
  for (int l = 0; l < g.h(); ++l) {
    if (!seen[l]) throw InvalidParam("every level needs at least one vertex");
  }
  return g;
}

// One vertex per depot that is not co-located with a faster one. Depots
// without requests stay in as weight-0 vertices located at the depot, so a
// fast idle drone can still take over a slow depot's work.
inline LevelGraph build_level_graph(const Instance& inst, const Forest& forest,
                                    const LevelPartition& levels) {
  LevelGraph g;
  g.speeds = levels.speeds;
  for (int j = 0; j < inst.k(); ++j) {
    if (levels.level_of[j] < 0) continue;
    g.level.push_back(levels.level_of[j]);
    g.weight.push_back(forest.trees[j].weight);
    g.depot.push_back(j);
  }
  const int n = g.size();
  std::vector<std::vector<Point>> pts(n);
  std::vector<const std::vector<NodeRef>*> refs(n);
  for (int v = 0; v < n; ++v) {
    refs[v] = &forest.trees[g.depot[v]].nodes;
    for (const NodeRef& r : *refs[v]) pts[v].push_back(point_of(inst, r));
  }
  std::vector<KdTree> kd;
  kd.reserve(n);
  for (int v = 0; v < n; ++v) kd.emplace_back(pts[v]);

  g.ell.assign(n, std::vector<double>(n, 0.0));
  g.realizer.assign(n, std::vector<std::pair<NodeRef, NodeRef>>(n));
  for (int u = 0; u < n; ++u) {
    g.realizer[u][u] = {refs[u]->front(), refs[u]->front()};
    for (int v = u + 1; v < n; ++v) {
      // Query the smaller node set against the tree of the larger one.
      const bool query_u = pts[u].size() <= pts[v].size();
      const int q = query_u ? u : v;
      const int o = query_u ? v : u;
      double best = std::numeric_limits<double>::infinity();
      NodeRef best_u, best_v;
      for (int a = 0; a < static_cast<int>(pts[q].size()); ++a) {
        const KdTree::Hit hit = kd[o].nearest(pts[q][a]);
        const NodeRef nu = query_u ? (*refs[u])[a] : (*refs[u])[hit.index];
        const NodeRef nv = query_u ? (*refs[v])[hit.index] : (*refs[v])[a];
        if (hit.distance < best ||
            (hit.distance == best && std::tie(nu, nv) < std::tie(best_u, best_v))) {
          best = hit.distance;
          best_u = nu;
          best_v = nv;
        }
      }
      g.ell[u][v] = g.ell[v][u] = best;
      g.realizer[u][v] = {best_u, best_v};
      g.realizer[v][u] = {best_v, best_u};
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Moat growing
// ---------------------------------------------------------------------------

namespace detail {

using Bits = std::vector<std::uint64_t>;

inline Bits make_bits(int n) { return Bits((n + 63) / 64, 0); }
inline void set_bit(Bits& b, int i) { b[i / 64] |= std::uint64_t{1} << (i % 64); }
inline bool test_bit(const Bits& b, int i) { return (b[i / 64] >> (i % 64)) & 1u; }
inline bool is_subset(const Bits& a, const Bits& b) {
  for (std::size_t w = 0; w < a.size(); ++w) {
    if (a[w] & ~b[w]) return false;
  }
  return true;
}

}  // namespace detail

enum class MoatState { kActive, kInactive, kFrozen };

inline const char* to_string(MoatState s) {
  switch (s) {
    case MoatState::kActive:
      return "active";
    case MoatState::kInactive:
      return "inactive";
    case MoatState::kFrozen:
      break;
  }
  return "frozen";
}

// A component that existed at some point during growth, together with its
// dual value Y_l(S).
struct Moat {
  int level = 0;
  std::vector<int> members;  // sorted vertex ids
  detail::Bits bits;
  double y = 0.0;
  double potential = 0.0;    // incrementally maintained remaining potential
  MoatState state = MoatState::kActive;
  bool has_root = false;     // contains a vertex of its own level
  bool ever_frozen = false;
  bool current = true;       // still a component of its level's forest
};

struct GrowthEvent {
  enum class Kind { kMerge, kFreeze };
  int iteration = 0;
  double delta = 0.0;
  double time = 0.0;
  Kind kind = Kind::kMerge;
  int level = 0;
  int u = -1;   // merge: edge endpoints (u < v)
  int v = -1;
  int moat = -1;  // merge: resulting moat; freeze: frozen moat
  MoatState state = MoatState::kActive;  // state of `moat` right after the event
};

struct GrowthState {
  int n = 0;
  int h = 0;
  std::vector<Moat> moats;
  std::vector<std::vector<std::pair<int, int>>> forest_edges;  // per growing level
  std::vector<GrowthEvent> events;
  int iterations = 0;
  double time = 0.0;
  // Worst violations observed while running, measured from the definitions.
  double max_potential_violation = 0.0;
  int containment_violations = 0;

  std::vector<int> moat_of;  // level * n + vertex -> current moat id
  std::vector<DisjointSets> sets;

  int growing_levels() const { return std::max(0, h - 1); }
  int current_moat(int l, int v) const { return moat_of[static_cast<std::size_t>(l) * n + v]; }
};

struct GrowthOptions {
  double tolerance = 1e-9;
  bool check_each_event = true;
  std::function<void(const GrowthState&, const GrowthEvent&)> on_event;
};

// Iteration bound sum_l |V_l| (2l - 1) with 1-based levels over all levels.
inline long long iteration_bound(const LevelGraph& g) {
  long long bound = 0;
  for (int v = 0; v < g.size(); ++v) bound += 2LL * (g.level[v] + 1) - 1;
  return bound;
}

// The same sum restricted to levels 1..h-1 (1-based), as printed in the
// running-time lemma; it undercounts when the slowest level is populated.
inline long long iteration_bound_first_levels(const LevelGraph& g) {
  long long bound = 0;
  for (int v = 0; v < g.size(); ++v) {
    if (g.level[v] + 1 < g.h()) bound += 2LL * (g.level[v] + 1) - 1;
  }
  return bound;
}

// Remaining potential of moat `id`, evaluated from the dual ledger.
inline double remaining_potential(const GrowthState& s, const LevelGraph& g, int id) {
  const Moat& u = s.moats[id];
  const int l = u.level;
  double p = g.penalty(l, u.members);
  for (const Moat& m : s.moats) {
    if (m.y == 0.0 || !detail::is_subset(m.bits, u.bits)) continue;
    if (m.level == l) p -= m.y;
    if (m.level == l + 1) p += m.y;
  }
  return p;
}

namespace detail {

class MoatGrower {
 public:
  MoatGrower(const LevelGraph& g, const GrowthOptions& opt) : g_(g), opt_(opt) {}

  GrowthState run() {
    s_.n = g_.size();
    s_.h = g_.h();
    const int levels = s_.growing_levels();
    s_.forest_edges.assign(levels, {});
    s_.moat_of.assign(static_cast<std::size_t>(levels) * s_.n, -1);
    s_.sets.assign(levels, DisjointSets(s_.n));
    load_.assign(levels, std::vector<double>(s_.n, 0.0));
    for (int l = 0; l < levels; ++l) {
      for (int v = 0; v < s_.n; ++v) {
        if (g_.level[v] < l) continue;
        Moat m;
        m.level = l;
        m.members = {v};
        m.bits = make_bits(s_.n);
        set_bit(m.bits, v);
        m.has_root = g_.level[v] == l;
        m.state = m.has_root ? MoatState::kInactive : MoatState::kActive;
        m.potential = m.has_root ? 0.0 : g_.penalty(l, v);
        s_.moat_of[static_cast<std::size_t>(l) * s_.n + v] = add_moat(std::move(m));
      }
    }
    const long long bound = iteration_bound(g_);
    while (any_active()) {
      if (s_.iterations >= bound)
        throw InvariantViolation("moat growing exceeded its iteration bound");
      step();
    }
    return std::move(s_);
  }

 private:
  struct Candidate {
    double delta = std::numeric_limits<double>::infinity();
    int kind = 2;  // 0 edge, 1 freeze
    int level = 0;
    int a = 0;
    int b = 0;
    int moat = -1;

    auto key() const { return std::tie(kind, level, a, b); }
  };

  int add_moat(Moat m) {
    s_.moats.push_back(std::move(m));
    return static_cast<int>(s_.moats.size()) - 1;
  }

  bool any_active() const {
    for (const Moat& m : s_.moats) {
      if (m.current && m.state == MoatState::kActive) return true;
    }
    return false;
  }

  int moat_at(int l, int v) { return s_.moat_of[static_cast<std::size_t>(l) * s_.n + s_.sets[l].find(v)]; }

  void set_moat(int l, int v, int id) {
    s_.moat_of[static_cast<std::size_t>(l) * s_.n + s_.sets[l].find(v)] = id;
  }

  // Number of active level-(l+1) moats inside each current moat.
  std::vector<int> active_descendants() {
    std::vector<int> a(s_.moats.size(), 0);
    for (const Moat& m : s_.moats) {
      if (!m.current || m.state != MoatState::kActive || m.level == 0) continue;
      ++a[moat_at(m.level - 1, m.members.front())];
    }
    return a;
  }

  void step() {
    const int levels = s_.growing_levels();
    const std::vector<int> desc = active_descendants();
    std::vector<Candidate> cands;
    for (int l = 0; l < levels; ++l) {
      for (int u = 0; u < s_.n; ++u) {
        if (g_.level[u] < l) continue;
        const int mu = moat_at(l, u);
        const bool au = s_.moats[mu].state == MoatState::kActive;
        for (int v = u + 1; v < s_.n; ++v) {
          if (g_.level[v] < l) continue;
          const int mv = moat_at(l, v);
          if (mu == mv) continue;
          const int rate = au + (s_.moats[mv].state == MoatState::kActive);
          if (rate == 0) continue;
          const double slack = std::max(0.0, g_.cost(l, u, v) - load_[l][u] - load_[l][v]);
          cands.push_back({slack / rate, 0, l, u, v, -1});
        }
      }
      for (int id = 0; id < static_cast<int>(s_.moats.size()); ++id) {
        const Moat& m = s_.moats[id];
        if (!m.current || m.level != l || m.state != MoatState::kActive) continue;
        const int rate = 1 - desc[id];
        if (rate <= 0) continue;
        cands.push_back({std::max(0.0, m.potential) / rate, 1, l, m.members.front(), 0, id});
      }
    }
    if (cands.empty()) throw InvariantViolation("active moats but no pending event");
    double delta = std::numeric_limits<double>::infinity();
    for (const Candidate& c : cands) delta = std::min(delta, c.delta);
    const Candidate* pick = nullptr;
    for (const Candidate& c : cands) {
      if (c.delta > delta + opt_.tolerance) continue;
      if (!pick || c.key() < pick->key()) pick = &c;
    }
    const Candidate chosen = *pick;

    for (int id = 0; id < static_cast<int>(s_.moats.size()); ++id) {
      Moat& m = s_.moats[id];
      if (!m.current) continue;
      const bool active = m.state == MoatState::kActive;
      if (active) {
        m.y += delta;
        for (int v : m.members) load_[m.level][v] += delta;
      }
      if (m.level + 1 < s_.h) m.potential += delta * (desc[id] - (active ? 1 : 0));
    }
    s_.time += delta;

    GrowthEvent ev;
    ev.iteration = ++s_.iterations;
    ev.delta = delta;
    ev.time = s_.time;
    ev.level = chosen.level;
    if (chosen.kind == 0) {
      ev.kind = GrowthEvent::Kind::kMerge;
      ev.u = chosen.a;
      ev.v = chosen.b;
      ev.moat = merge(chosen.level, chosen.a, chosen.b);
    } else {
      ev.kind = GrowthEvent::Kind::kFreeze;
      ev.moat = chosen.moat;
      Moat& m = s_.moats[chosen.moat];
      m.state = MoatState::kFrozen;
      m.ever_frozen = true;
      m.potential = 0.0;
    }
    ev.state = s_.moats[ev.moat].state;
    s_.events.push_back(ev);
    if (opt_.check_each_event) audit();
    if (opt_.on_event) opt_.on_event(s_, ev);
  }

  int merge(int l, int u, int v) {
    const int a = moat_at(l, u);
    const int b = moat_at(l, v);
    Moat m;
    m.level = l;
    std::merge(s_.moats[a].members.begin(), s_.moats[a].members.end(),
               s_.moats[b].members.begin(), s_.moats[b].members.end(),
               std::back_inserter(m.members));
    m.bits = s_.moats[a].bits;
    for (std::size_t w = 0; w < m.bits.size(); ++w) m.bits[w] |= s_.moats[b].bits[w];
    m.has_root = s_.moats[a].has_root || s_.moats[b].has_root;
    m.potential = s_.moats[a].potential + s_.moats[b].potential;
    const bool inactive_part = s_.moats[a].state == MoatState::kInactive ||
                               s_.moats[b].state == MoatState::kInactive;
    bool ancestor_inactive = false;
    if (l > 0) {
      ancestor_inactive = s_.moats[moat_at(l - 1, u)].state == MoatState::kInactive;
    }
    m.state = (m.has_root || inactive_part || ancestor_inactive) ? MoatState::kInactive
                                                                 : MoatState::kActive;
    s_.moats[a].current = false;
    s_.moats[b].current = false;
    s_.sets[l].unite(u, v);
    s_.forest_edges[l].emplace_back(u, v);
    const int id = add_moat(std::move(m));
    set_moat(l, u, id);
    if (s_.moats[id].state == MoatState::kInactive) {
      const detail::Bits& bits = s_.moats[id].bits;
      for (Moat& d : s_.moats) {
        if (d.current && d.level > l && d.state == MoatState::kActive &&
            detail::is_subset(d.bits, bits))
          d.state = MoatState::kInactive;
      }
    }
    return id;
  }

  // Checks the potential constraints from the ledger and containment across
  // levels; results are accumulated in the state.
  void audit() {
    for (int id = 0; id < static_cast<int>(s_.moats.size()); ++id) {
      const Moat& m = s_.moats[id];
      if (m.has_root) continue;
      const double p = remaining_potential(s_, g_, id);
      const double scale = std::max(1.0, g_.penalty(m.level, m.members));
      s_.max_potential_violation = std::max(s_.max_potential_violation, -p / scale);
    }
    for (const Moat& m : s_.moats) {
      if (!m.current || m.level == 0) continue;
      const Moat& up = s_.moats[moat_at(m.level - 1, m.members.front())];
      if (!detail::is_subset(m.bits, up.bits)) ++s_.containment_violations;
    }
  }

  const LevelGraph& g_;
  const GrowthOptions& opt_;
  GrowthState s_;
  std::vector<std::vector<double>> load_;  // per level, sum of Y over moats holding v
};

}  // namespace detail

// Synchronised moat growing across all levels. Every iteration raises the
// dual of each active moat by the largest common amount that keeps all edge
// and potential constraints satisfied, then processes one tight constraint.
inline GrowthState run_moat_growing(const LevelGraph& g, const GrowthOptions& opt = {}) {
  detail::MoatGrower grower(g, opt);
  return grower.run();
}

// ---------------------------------------------------------------------------
// Pruning and assembly
// ---------------------------------------------------------------------------

struct PrunedTree {
  int level = 0;
  int root = 0;                           // vertex of that level
  std::vector<int> vertices;              // sorted
  std::vector<std::pair<int, int>> edges; // level-graph edges
};

struct PrunedForests {
  std::vector<std::vector<PrunedTree>> levels;
  // discarded[l]: vertices not spanned by the forests of levels 0..l, i.e.
  // the set U_l whose penalty is paid at level l.
  std::vector<std::vector<int>> discarded;
};

inline PrunedForests prune(const GrowthState& s, const LevelGraph& g) {
  const int n = g.size();
  const int h = g.h();
  PrunedForests out;
  out.levels.assign(h, {});
  out.discarded.assign(h, {});
  std::vector<char> pending(n, 1);
  for (int l = 0; l < h; ++l) {
    if (l == h - 1) {
      for (int v = 0; v < n; ++v) {
        if (!pending[v]) continue;
        if (g.level[v] != l)
          throw InvariantViolation("vertex of a faster level reached the last pruning level");
        out.levels[l].push_back({l, v, {v}, {}});
      }
      break;
    }
    std::vector<std::vector<int>> adj(n);
    for (const auto& [u, v] : s.forest_edges[l]) {
      if (pending[u] && pending[v]) {
        adj[u].push_back(v);
        adj[v].push_back(u);
      }
    }
    std::vector<const Moat*> frozen;
    for (const Moat& m : s.moats) {
      if (m.level == l && m.ever_frozen) frozen.push_back(&m);
    }
    std::stable_sort(frozen.begin(), frozen.end(), [](const Moat* a, const Moat* b) {
      return a->members.size() > b->members.size();
    });

    std::vector<char> next(n, 0);
    std::vector<char> seen(n, 0);
    for (int start = 0; start < n; ++start) {
      if (!pending[start] || seen[start]) continue;
      std::vector<int> comp{start};
      seen[start] = 1;
      for (std::size_t k = 0; k < comp.size(); ++k) {
        for (int w : adj[comp[k]]) {
          if (!seen[w]) {
            seen[w] = 1;
            comp.push_back(w);
          }
        }
      }
      std::vector<int> roots;
      for (int v : comp) {
        if (g.level[v] == l) roots.push_back(v);
      }
      if (roots.size() > 1) throw InvariantViolation("pruned tree with two roots");
      if (roots.empty()) {
        for (int v : comp) next[v] = 1;
        continue;
      }
      const int root = roots.front();
      std::vector<char> keep(n, 0);
      for (int v : comp) keep[v] = 1;
      // Strip pendent frozen subgraphs until none is left.
      for (bool changed = true; changed;) {
        changed = false;
        for (const Moat* m : frozen) {
          if (detail::test_bit(m->bits, root)) continue;
          std::vector<int> part;
          for (int v : m->members) {
            if (keep[v]) part.push_back(v);
          }
          if (part.empty()) continue;
          int degree = 0;
          for (int v : part) {
            for (int w : adj[v]) {
              if (keep[w] && !detail::test_bit(m->bits, w)) ++degree;
            }
          }
          if (degree <= 1) {
            for (int v : part) {
              keep[v] = 0;
              next[v] = 1;
            }
            changed = true;
          }
        }
      }
      PrunedTree t;
      t.level = l;
      t.root = root;
      for (int v : comp) {
        if (!keep[v]) continue;
        t.vertices.push_back(v);
        for (int w : adj[v]) {
          if (keep[w] && v < w) t.edges.emplace_back(v, w);
        }
      }
      std::sort(t.vertices.begin(), t.vertices.end());
      std::sort(t.edges.begin(), t.edges.end());
      out.levels[l].push_back(std::move(t));
    }
    for (int v = 0; v < n; ++v) {
      pending[v] = next[v];
      if (next[v]) out.discarded[l].push_back(v);
    }
  }
  return out;
}

struct Connector {
  int u = 0;  // level-graph vertices
  int v = 0;
  NodeRef a;  // node of u's tree
  NodeRef b;  // node of v's tree
  double length = 0.0;
};

struct LargeTree {
  int level = 0;
  int root = 0;                   // level-graph vertex
  int root_depot = -1;            // depot index, -1 for synthetic graphs
  std::vector<int> members;       // level-graph vertices, root first then ascending
  std::vector<Connector> connectors;

  double objective(const LevelGraph& g) const {
    double sum = 0.0;
    for (const Connector& c : connectors) sum += c.length;
    for (int v : members) sum += g.weight[v];
    return sum / g.speeds[level];
  }
};

inline std::vector<LargeTree> assemble_large_trees(const PrunedForests& pruned,
                                                   const LevelGraph& g) {
  std::vector<LargeTree> out;
  for (const auto& level_trees : pruned.levels) {
    for (const PrunedTree& t : level_trees) {
      LargeTree lt;
      lt.level = t.level;
      lt.root = t.root;
      lt.root_depot = g.depot[t.root];
      lt.members.push_back(t.root);
      for (int v : t.vertices) {
        if (v != t.root) lt.members.push_back(v);
      }
      for (const auto& [u, v] : t.edges) {
        Connector c{u, v, {}, {}, g.ell[u][v]};
        if (!g.realizer.empty()) {
          c.a = g.realizer[u][v].first;
          c.b = g.realizer[u][v].second;
        }
        lt.connectors.push_back(c);
      }
      out.push_back(std::move(lt));
    }
  }
  return out;
}

inline double total_objective(const std::vector<LargeTree>& trees, const LevelGraph& g) {
  double sum = 0.0;
  for (const LargeTree& t : trees) sum += t.objective(g);
  return sum;
}

// ---------------------------------------------------------------------------
// Certificate
// ---------------------------------------------------------------------------

struct VerificationReport {
  bool edge_constraints_ok = true;
  bool potential_constraints_ok = true;
  bool approximation_ok = true;
  bool iterations_ok = true;
  bool partition_ok = true;
  bool containment_ok = true;
  double max_edge_violation = 0.0;
  double max_potential_violation = 0.0;
  double primal = 0.0;  // edge costs plus penalties of the pruned solution
  double dual = 0.0;    // sum of level-0 duals
  long long iterations = 0;
  long long iteration_bound = 0;
  long long iteration_bound_first_levels = 0;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

// Re-derives every guarantee of the growth phase from the recorded duals.
// Edge loads only ever grow, so checking them at termination covers every
// earlier event; potential constraints are audited after each event during
// the run.
inline VerificationReport verify_dual(const GrowthState& s, const LevelGraph& g,
                                      const PrunedForests& pruned,
                                      const std::vector<LargeTree>& result,
                                      double tol = 1e-9) {
  VerificationReport r;
  const int n = g.size();
  const int levels = s.growing_levels();

  for (int l = 0; l < levels; ++l) {
    std::vector<std::vector<double>> load(n, std::vector<double>(n, 0.0));
    for (const Moat& m : s.moats) {
      if (m.level != l || m.y == 0.0) continue;
      for (int u : m.members) {
        for (int v = 0; v < n; ++v) {
          if (g.level[v] >= l && !detail::test_bit(m.bits, v)) {
            load[u][v] += m.y;
            load[v][u] += m.y;
          }
        }
      }
    }
    for (int u = 0; u < n; ++u) {
      if (g.level[u] < l) continue;
      for (int v = u + 1; v < n; ++v) {
        if (g.level[v] < l) continue;
        const double c = g.cost(l, u, v);
        const double excess = (load[u][v] - c) / std::max(1.0, c);
        r.max_edge_violation = std::max(r.max_edge_violation, excess);
      }
    }
  }
  double final_potential = 0.0;
  for (int id = 0; id < static_cast<int>(s.moats.size()); ++id) {
    const Moat& m = s.moats[id];
    if (m.has_root) continue;
    const double p = remaining_potential(s, g, id);
    final_potential =
        std::max(final_potential, -p / std::max(1.0, g.penalty(m.level, m.members)));
  }
  r.max_potential_violation = std::max(s.max_potential_violation, final_potential);
  r.edge_constraints_ok = r.max_edge_violation <= tol;
  r.potential_constraints_ok = r.max_potential_violation <= tol;
  if (!r.edge_constraints_ok) r.failures.push_back("edge constraint violated");
  if (!r.potential_constraints_ok) r.failures.push_back("potential constraint violated");

  for (const Moat& m : s.moats) {
    if (m.level == 0) r.dual += m.y;
  }
  for (int l = 0; l < levels; ++l) {
    for (const PrunedTree& t : pruned.levels[l]) {
      for (const auto& [u, v] : t.edges) r.primal += g.cost(l, u, v);
    }
    r.primal += g.penalty(l, pruned.discarded[l]);
  }
  r.approximation_ok = r.primal <= 2.0 * r.dual + tol * std::max(1.0, r.primal);
  if (!r.approximation_ok) r.failures.push_back("primal exceeds twice the dual");

  r.iterations = s.iterations;
  r.iteration_bound = iteration_bound(g);
  r.iteration_bound_first_levels = iteration_bound_first_levels(g);
  r.iterations_ok = r.iterations <= r.iteration_bound;
  if (!r.iterations_ok) r.failures.push_back("iteration bound exceeded");

  r.containment_ok = s.containment_violations == 0;
  if (!r.containment_ok) r.failures.push_back("component containment across levels violated");

  std::vector<int> covered(n, 0);
  for (const LargeTree& t : result) {
    for (int v : t.members) {
      ++covered[v];
      if (g.level[v] < t.level) r.partition_ok = false;
    }
    if (g.level[t.root] != t.level) r.partition_ok = false;
    for (int v : t.members) {
      if (v != t.root && g.level[v] == t.level) r.partition_ok = false;
    }
    DisjointSets sets(n);
    for (const Connector& c : t.connectors) sets.unite(c.u, c.v);
    for (int v : t.members) {
      if (!sets.same(v, t.root)) r.partition_ok = false;
    }
    if (t.connectors.size() + 1 != t.members.size()) r.partition_ok = false;
  }
  for (int v = 0; v < n; ++v) {
    if (covered[v] != 1) r.partition_ok = false;
  }
  if (!r.partition_ok) r.failures.push_back("large trees do not partition the vertices");
  return r;
}

inline nlohmann::json report_to_json(const VerificationReport& r) {
  return {{"ok", r.ok()},
          {"edge_constraints_ok", r.edge_constraints_ok},
          {"potential_constraints_ok", r.potential_constraints_ok},
          {"approximation_ok", r.approximation_ok},
          {"iterations_ok", r.iterations_ok},
          {"partition_ok", r.partition_ok},
          {"containment_ok", r.containment_ok},
          {"max_edge_violation", r.max_edge_violation},
          {"max_potential_violation", r.max_potential_violation},
          {"primal", r.primal},
          {"dual", r.dual},
          {"iterations", r.iterations},
          {"iteration_bound", r.iteration_bound},
          {"iteration_bound_first_levels", r.iteration_bound_first_levels},
          {"failures", r.failures}};
}

inline nlohmann::json event_to_json(const GrowthState& s, const GrowthEvent& e) {
  nlohmann::json j{{"iteration", e.iteration},
                   {"delta", e.delta},
                   {"time", e.time},
                   {"kind", e.kind == GrowthEvent::Kind::kMerge ? "merge" : "freeze"},
                   {"level", e.level}};
  nlohmann::json payload;
  if (e.kind == GrowthEvent::Kind::kMerge) {
    payload["u"] = e.u;
    payload["v"] = e.v;
  }
  payload["moat"] = s.moats[e.moat].members;
  payload["state"] = to_string(e.state);
  j["payload"] = std::move(payload);
  return j;
}

// One JSON object per line.
inline std::string event_log_jsonl(const GrowthState& s) {
  std::string out;
  for (const GrowthEvent& e : s.events) out += event_to_json(s, e).dump() + "\n";
  return out;
}

}  // namespace mscd
