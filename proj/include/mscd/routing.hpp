#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mscd/errors.hpp"
#include "mscd/geometry.hpp"
#include "mscd/instance.hpp"
#include "mscd/primal_dual.hpp"
#include "mscd/trees.hpp"

namespace mscd {

struct Route {
  int depot = 0;           // depot index
  std::vector<int> order;  // request indices, -1 marks an unknown id
  double length = 0.0;
  double cost = 0.0;
};

struct Solution {
  std::vector<Route> routes;  // sorted by depot index
  double total_cost = 0.0;
  std::string algorithm;
  nlohmann::json params = nlohmann::json::object();
};

// Travel distance of a route: depot to the first source, then every request
// source-to-target with target-to-source legs in between. No return leg.
inline double route_length(const Instance& inst, int depot, const std::vector<int>& order) {
  double len = 0.0;
  Point at = inst.depots[depot].location;
  for (int i : order) {
    const Request& r = inst.requests[i];
    len += dist(at, r.source) + dist(r.source, r.target);
    at = r.target;
  }
  return len;
}

inline Route make_route(const Instance& inst, int depot, std::vector<int> order) {
  Route r;
  r.depot = depot;
  r.order = std::move(order);
  r.length = route_length(inst, depot, r.order);
  r.cost = r.length / inst.depots[depot].speed;
  return r;
}

// Drops empty routes, sorts by depot and recomputes the total.
inline void finalize(Solution& sol) {
  std::erase_if(sol.routes, [](const Route& r) { return r.order.empty(); });
  std::stable_sort(sol.routes.begin(), sol.routes.end(),
                   [](const Route& a, const Route& b) { return a.depot < b.depot; });
  sol.total_cost = 0.0;
  for (const Route& r : sol.routes) sol.total_cost += r.cost;
}

struct Evaluation {
  double total_cost = 0.0;
  bool feasible = true;
  std::vector<std::string> violations;
};

inline Evaluation evaluate(const Solution& sol, const Instance& inst, double rel_tol = 1e-9) {
  Evaluation ev;
  auto close = [&](double a, double b) {
    return std::abs(a - b) <= rel_tol * std::max({1.0, std::abs(a), std::abs(b)});
  };
  std::vector<int> served(inst.m(), 0);
  std::vector<int> depot_routes(inst.k(), 0);
  for (const Route& r : sol.routes) {
    if (r.depot < 0 || r.depot >= inst.k()) {
      ev.violations.push_back("route with unknown depot");
      continue;
    }
    if (++depot_routes[r.depot] == 2)
      ev.violations.push_back("depot " + std::to_string(inst.depots[r.depot].id) +
                              " has more than one route");
    bool valid = true;
    for (int i : r.order) {
      if (i < 0 || i >= inst.m()) {
        ev.violations.push_back("route of depot " + std::to_string(inst.depots[r.depot].id) +
                                " references an unknown request");
        valid = false;
      } else {
        ++served[i];
      }
    }
    if (!valid) continue;
    const double len = route_length(inst, r.depot, r.order);
    const double cost = len / inst.depots[r.depot].speed;
    if (!close(len, r.length) || !close(cost, r.cost))
      ev.violations.push_back("stored length or cost of depot " +
                              std::to_string(inst.depots[r.depot].id) + " is wrong");
    ev.total_cost += cost;
  }
  for (int i = 0; i < inst.m(); ++i) {
    if (served[i] == 0) ev.violations.push_back("request " + std::to_string(inst.requests[i].id) + " not served");
    if (served[i] > 1) ev.violations.push_back("request " + std::to_string(inst.requests[i].id) + " served more than once");
  }
  if (!close(ev.total_cost, sol.total_cost)) ev.violations.push_back("stored total cost is wrong");
  ev.feasible = ev.violations.empty();
  return ev;
}

// ---------------------------------------------------------------------------
// Cheapest insertion
// ---------------------------------------------------------------------------

// A path from a fixed start point through a sequence of items. Each item is
// entered at `first`, left at `last` and costs `inner` in between; items are
// single requests or whole sub-paths. Items live in bounded blocks so that an
// insertion moves O(block) entries rather than the whole path.
class InsertionPath {
 public:
  struct Item {
    Point first;
    Point last;
    double inner = 0.0;
    int tag = 0;
  };
  struct Slot {
    double increase = std::numeric_limits<double>::infinity();
    int position = 0;
  };

  explicit InsertionPath(Point start) : start_(start) {}

  int size() const { return size_; }

  // Cheapest position for `item`; ties go to the earliest position.
  Slot best_slot(const Item& item) const {
    Slot best{dist(start_, item.first) + item.inner, 0};
    if (size_ > 0) best.increase += dist(item.last, blocks_.front().items.front().first) - blocks_.front().gap.front();
    int p = 0;
    for (const Block& b : blocks_) {
      const int n = static_cast<int>(b.items.size());
      for (int q = 0; q < n; ++q) {
        ++p;
        // Position p sits right after b.items[q].
        double inc = dist(b.items[q].last, item.first) + item.inner;
        if (q + 1 < n) {
          inc += dist(item.last, b.items[q + 1].first) - b.gap[q + 1];
        } else if (p < size_) {
          const Block& next = *(&b + 1);
          inc += dist(item.last, next.items.front().first) - next.gap.front();
        }
        if (inc < best.increase) best = {inc, p};
      }
    }
    return best;
  }

  void insert(const Item& item, int position) {
    if (position < 0 || position > size_) throw InvalidParam("insertion position out of range");
    if (blocks_.empty()) blocks_.emplace_back();
    std::size_t b = 0;
    int offset = position;
    while (b + 1 < blocks_.size() && offset > static_cast<int>(blocks_[b].items.size())) {
      offset -= static_cast<int>(blocks_[b].items.size());
      ++b;
    }
    Block& blk = blocks_[b];
    blk.items.insert(blk.items.begin() + offset, item);
    blk.gap.insert(blk.gap.begin() + offset, 0.0);
    ++size_;
    refresh(b, offset);
    if (offset + 1 < static_cast<int>(blk.items.size())) {
      refresh(b, offset + 1);
    } else if (b + 1 < blocks_.size()) {
      refresh(b + 1, 0);
    }
    if (blk.items.size() > 2 * kBlock) split(b);
  }

  void push(const Item& item) { insert(item, size_); }

  std::vector<Item> items() const {
    std::vector<Item> out;
    out.reserve(size_);
    for (const Block& b : blocks_) out.insert(out.end(), b.items.begin(), b.items.end());
    return out;
  }

  std::vector<int> tags() const {
    std::vector<int> out;
    out.reserve(size_);
    for (const Block& b : blocks_) {
      for (const Item& it : b.items) out.push_back(it.tag);
    }
    return out;
  }

  // Length from the start point through every item.
  double length() const {
    double len = 0.0;
    for (const Block& b : blocks_) {
      for (std::size_t q = 0; q < b.items.size(); ++q) len += b.gap[q] + b.items[q].inner;
    }
    return len;
  }

 private:
  static constexpr std::size_t kBlock = 256;

  struct Block {
    std::vector<Item> items;
    std::vector<double> gap;  // gap[q]: distance into items[q] from its predecessor
  };

  void refresh(std::size_t b, int q) {
    const Point* prev = &start_;
    if (q > 0) {
      prev = &blocks_[b].items[q - 1].last;
    } else if (b > 0) {
      prev = &blocks_[b - 1].items.back().last;
    }
    blocks_[b].gap[q] = dist(*prev, blocks_[b].items[q].first);
  }

  void split(std::size_t b) {
    Block tail;
    Block& head = blocks_[b];
    tail.items.assign(head.items.begin() + kBlock, head.items.end());
    tail.gap.assign(head.gap.begin() + kBlock, head.gap.end());
    head.items.resize(kBlock);
    head.gap.resize(kBlock);
    blocks_.insert(blocks_.begin() + b + 1, std::move(tail));
  }

  Point start_;
  std::vector<Block> blocks_;  // never holds an empty block once non-empty
  int size_ = 0;
};

inline InsertionPath::Item request_item(const Instance& inst, int i) {
  const Request& r = inst.requests[i];
  return {r.source, r.target, dist(r.source, r.target), i};
}

// Inserts requests one by one, in the given order, each at its cheapest
// position after the depot or after an already placed target.
inline Route route_cheapest_insertion(const Instance& inst, int depot,
                                      const std::vector<int>& seed_order) {
  InsertionPath path(inst.depots[depot].location);
  for (int i : seed_order) {
    const auto item = request_item(inst, i);
    path.insert(item, path.best_slot(item).position);
  }
  return make_route(inst, depot, path.tags());
}

// ---------------------------------------------------------------------------
// Large-tree routers
// ---------------------------------------------------------------------------

inline double large_tree_length(const LargeTree& t, const LevelGraph& g) {
  double sum = 0.0;
  for (const Connector& c : t.connectors) sum += c.length;
  for (int v : t.members) sum += g.weight[v];
  return sum;
}

// Depth-first traversal of the large tree from its root depot. Children are
// visited in ascending node order, except that a source's own target is
// entered first. A request is served when its source is first reached; if the
// target is the source's parent it is served when the traversal leaves the
// source instead, so the route stays a shortcut of the tree's Euler tour.
inline Route route_dfs(const LargeTree& tree, const LevelGraph& g, const Forest& forest,
                       const Instance& inst) {
  std::vector<NodeRef> nodes;
  std::vector<std::pair<NodeRef, NodeRef>> edges;
  for (int v : tree.members) {
    const OriginalTree& t = forest.trees[g.depot[v]];
    nodes.insert(nodes.end(), t.nodes.begin(), t.nodes.end());
    for (const TreeEdge& e : t.edges) edges.emplace_back(e.a, e.b);
  }
  for (const Connector& c : tree.connectors) edges.emplace_back(c.a, c.b);
  std::sort(nodes.begin(), nodes.end());
  const int n = static_cast<int>(nodes.size());
  auto index_of = [&](const NodeRef& r) {
    return static_cast<int>(std::lower_bound(nodes.begin(), nodes.end(), r) - nodes.begin());
  };
  std::vector<std::vector<int>> adj(n);
  for (const auto& [a, b] : edges) {
    const int ia = index_of(a), ib = index_of(b);
    adj[ia].push_back(ib);
    adj[ib].push_back(ia);
  }
  for (int x = 0; x < n; ++x) {
    auto& list = adj[x];
    std::sort(list.begin(), list.end());
    if (nodes[x].kind == NodeRef::Kind::kSource) {
      const int own = index_of(NodeRef::target(nodes[x].index));
      const auto it = std::find(list.begin(), list.end(), own);
      if (it != list.end()) std::rotate(list.begin(), it, it + 1);
    }
  }

  std::vector<int> order;
  std::vector<int> parent(n, -1);
  std::vector<std::size_t> next_child(n, 0);
  std::vector<char> visited(n, 0);
  const int root = index_of(NodeRef::depot(tree.root_depot));
  auto serves_on_exit = [&](int x) {
    return nodes[x].kind == NodeRef::Kind::kSource && parent[x] >= 0 &&
           nodes[parent[x]] == NodeRef::target(nodes[x].index);
  };
  std::vector<int> stack{root};
  visited[root] = 1;
  while (!stack.empty()) {
    const int x = stack.back();
    if (next_child[x] == 0 && nodes[x].kind == NodeRef::Kind::kSource && !serves_on_exit(x))
      order.push_back(nodes[x].index);
    bool descended = false;
    while (next_child[x] < adj[x].size()) {
      const int y = adj[x][next_child[x]++];
      if (visited[y]) continue;
      visited[y] = 1;
      parent[y] = x;
      stack.push_back(y);
      descended = true;
      break;
    }
    if (descended) continue;
    if (serves_on_exit(x)) order.push_back(nodes[x].index);
    stack.pop_back();
  }
  return make_route(inst, tree.root_depot, std::move(order));
}

inline std::vector<int> large_tree_requests(const LargeTree& tree, const LevelGraph& g,
                                            const Forest& forest) {
  std::vector<int> reqs;
  for (int v : tree.members) {
    const auto& r = forest.trees[g.depot[v]].requests;
    reqs.insert(reqs.end(), r.begin(), r.end());
  }
  std::sort(reqs.begin(), reqs.end());
  return reqs;
}

// Cheapest insertion of all requests of the large tree, in instance order,
// from the root depot.
inline Route route_greedy(const LargeTree& tree, const LevelGraph& g, const Forest& forest,
                          const Instance& inst) {
  return route_cheapest_insertion(inst, tree.root_depot, large_tree_requests(tree, g, forest));
}

// Two-stage cheapest insertion: one path per member tree from its own depot,
// then the member paths (without their depots) are inserted as blocks into the
// route that starts with the root member's path.
inline Route route_dgreedy(const LargeTree& tree, const LevelGraph& g, const Forest& forest,
                           const Instance& inst) {
  InsertionPath route(inst.depots[tree.root_depot].location);
  std::vector<std::vector<int>> blocks;
  for (int v : tree.members) {
    const int depot = g.depot[v];
    const OriginalTree& t = forest.trees[depot];
    if (t.requests.empty()) continue;
    const Route member = route_cheapest_insertion(inst, depot, t.requests);
    const Request& first = inst.requests[member.order.front()];
    const Request& last = inst.requests[member.order.back()];
    const double inner = member.length - dist(inst.depots[depot].location, first.source);
    const InsertionPath::Item block{first.source, last.target, inner,
                                    static_cast<int>(blocks.size())};
    blocks.push_back(member.order);
    if (v == tree.root) {
      route.push(block);
    } else {
      route.insert(block, route.best_slot(block).position);
    }
  }
  std::vector<int> order;
  for (int b : route.tags()) order.insert(order.end(), blocks[b].begin(), blocks[b].end());
  return make_route(inst, tree.root_depot, std::move(order));
}

enum class Router { kDfs, kGreedy, kDGreedy };

inline Router parse_router(const std::string& name) {
  if (name == "dfs") return Router::kDfs;
  if (name == "greedy") return Router::kGreedy;
  if (name == "dgreedy") return Router::kDGreedy;
  throw InvalidParam("unknown router: " + name);
}

inline std::string to_string(Router r) {
  switch (r) {
    case Router::kDfs:
      return "dfs";
    case Router::kGreedy:
      return "greedy";
    case Router::kDGreedy:
      break;
  }
  return "dgreedy";
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

struct StageTimes {
  double tree_s = 0.0;
  double pd_s = 0.0;
  double route_s = 0.0;
  double total_s = 0.0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace detail

struct PdOptions {
  TreeVariant tree = TreeVariant::kPrimMstK;
  Router router = Router::kDfs;
  double mst_k = kDefaultMstK;
  bool certify = true;  // audit each event and run verify_dual
};

struct PdRun {
  Solution solution;
  Forest forest;
  LevelPartition levels;
  LevelGraph graph;
  GrowthState growth;
  PrunedForests pruned;
  std::vector<LargeTree> large_trees;
  VerificationReport report;
  StageTimes times;
};

// Trees, level graph, moat growing, pruning, large trees, one route per large
// tree.
inline PdRun solve_pd_run(const Instance& inst, const PdOptions& opt = {}) {
  PdRun run;
  const auto t0 = detail::Clock::now();
  run.forest = build_trees(inst, opt.tree, opt.mst_k);
  run.times.tree_s = detail::seconds_since(t0);

  const auto t1 = detail::Clock::now();
  run.levels = level_partition(inst);
  run.graph = build_level_graph(inst, run.forest, run.levels);
  GrowthOptions gopt;
  gopt.check_each_event = opt.certify;
  run.growth = run_moat_growing(run.graph, gopt);
  run.pruned = prune(run.growth, run.graph);
  run.large_trees = assemble_large_trees(run.pruned, run.graph);
  run.times.pd_s = detail::seconds_since(t1);

  const auto t2 = detail::Clock::now();
  Solution& sol = run.solution;
  for (const LargeTree& t : run.large_trees) {
    switch (opt.router) {
      case Router::kDfs:
        sol.routes.push_back(route_dfs(t, run.graph, run.forest, inst));
        break;
      case Router::kGreedy:
        sol.routes.push_back(route_greedy(t, run.graph, run.forest, inst));
        break;
      case Router::kDGreedy:
        sol.routes.push_back(route_dgreedy(t, run.graph, run.forest, inst));
        break;
    }
  }
  finalize(sol);
  run.times.route_s = detail::seconds_since(t2);
  run.times.total_s = detail::seconds_since(t0);

  sol.algorithm = "pd-" + to_string(opt.router);
  sol.params = {{"tree", to_string(opt.tree)}, {"router", to_string(opt.router)}};
  if (opt.tree == TreeVariant::kPrimMstK) sol.params["mst_k"] = opt.mst_k;
  if (opt.certify) run.report = verify_dual(run.growth, run.graph, run.pruned, run.large_trees);
  return run;
}

inline Solution solve_pd(const Instance& inst, const PdOptions& opt = {}) {
  return solve_pd_run(inst, opt).solution;
}

// Requests in instance order; each goes to the vehicle and position with the
// smallest increase in that vehicle's travel time. Ties favour the lower depot
// index, then the earlier position.
inline Solution solve_baseline(const Instance& inst, StageTimes* times = nullptr) {
  const auto t0 = detail::Clock::now();
  std::vector<InsertionPath> paths;
  paths.reserve(inst.k());
  for (const Depot& d : inst.depots) paths.emplace_back(d.location);
  for (int i = 0; i < inst.m(); ++i) {
    const auto item = request_item(inst, i);
    double best = std::numeric_limits<double>::infinity();
    int best_depot = 0, best_pos = 0;
    for (int j = 0; j < inst.k(); ++j) {
      const auto slot = paths[j].best_slot(item);
      const double inc = slot.increase / inst.depots[j].speed;
      if (inc < best) {
        best = inc;
        best_depot = j;
        best_pos = slot.position;
      }
    }
    paths[best_depot].insert(item, best_pos);
  }
  Solution sol;
  for (int j = 0; j < inst.k(); ++j) sol.routes.push_back(make_route(inst, j, paths[j].tags()));
  finalize(sol);
  sol.algorithm = "baseline";
  sol.params = {{"order", "instance"}};
  if (times) {
    times->route_s = detail::seconds_since(t0);
    times->total_s = times->route_s;
  }
  return sol;
}

// Theorem-style single-depot tour: MST over the depot and the sources, walked
// depth-first; each source is served with a direct excursion to its target the
// first time it is reached. Only the fastest drone is used.
inline Solution solve_single_depot(const Instance& inst) {
  if (!depots_colocated(inst)) throw InvalidParam("single-depot solver needs co-located depots");
  std::vector<Point> pts{inst.depots.front().location};
  for (const Request& r : inst.requests) pts.push_back(r.source);
  const EdgeList mst = euclidean_mst(pts);
  const int n = static_cast<int>(pts.size());
  std::vector<std::vector<int>> adj(n);
  for (const Edge& e : mst) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  std::vector<int> order;
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    if (seen[x]) continue;
    seen[x] = 1;
    if (x > 0) order.push_back(x - 1);
    for (auto it = adj[x].rbegin(); it != adj[x].rend(); ++it) {
      if (!seen[*it]) stack.push_back(*it);
    }
  }
  Solution sol;
  sol.routes.push_back(make_route(inst, 0, std::move(order)));
  finalize(sol);
  sol.algorithm = "single-depot";
  return sol;
}

// ---------------------------------------------------------------------------
// Solution files
// ---------------------------------------------------------------------------

inline nlohmann::json solution_to_json(const Solution& sol, const Instance& inst) {
  nlohmann::json j;
  j["algorithm"] = sol.algorithm;
  j["params"] = sol.params;
  j["total_cost"] = sol.total_cost;
  j["routes"] = nlohmann::json::array();
  for (const Route& r : sol.routes) {
    nlohmann::json order = nlohmann::json::array();
    for (int i : r.order) order.push_back(inst.requests[i].id);
    j["routes"].push_back({{"depot_id", inst.depots[r.depot].id},
                           {"order", std::move(order)},
                           {"length", r.length},
                           {"cost", r.cost}});
  }
  return j;
}

// Unknown request ids become -1 so that evaluate() reports them; an unknown
// depot id is a parse error.
inline Solution solution_from_json(const nlohmann::json& j, const Instance& inst) {
  std::map<int, int> depot_index, request_index;
  for (int d = 0; d < inst.k(); ++d) depot_index[inst.depots[d].id] = d;
  for (int i = 0; i < inst.m(); ++i) request_index[inst.requests[i].id] = i;
  Solution sol;
  try {
    sol.algorithm = j.value("algorithm", "");
    if (j.contains("params")) sol.params = j.at("params");
    sol.total_cost = j.at("total_cost").get<double>();
    for (const auto& jr : j.at("routes")) {
      Route r;
      const int id = jr.at("depot_id").get<int>();
      const auto it = depot_index.find(id);
      if (it == depot_index.end()) throw ParseError("solution: unknown depot id " + std::to_string(id));
      r.depot = it->second;
      for (const auto& rid : jr.at("order")) {
        const auto rit = request_index.find(rid.get<int>());
        r.order.push_back(rit == request_index.end() ? -1 : rit->second);
      }
      r.length = jr.at("length").get<double>();
      r.cost = jr.at("cost").get<double>();
      sol.routes.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("solution: ") + e.what());
  }
  return sol;
}

}  // namespace mscd
