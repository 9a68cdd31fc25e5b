#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "mscd/errors.hpp"
#include "mscd/geometry.hpp"
#include "mscd/instance.hpp"
#include "mscd/primal_dual.hpp"
#include "mscd/routing.hpp"

namespace mscd {

struct OracleBudget {
  int max_requests = 5;
  int max_depots = 3;
  int max_tc_vertices = 8;
  double max_states = 1e7;
};

struct BruteForceResult {
  double cost = 0.0;
  Solution solution;  // one optimal schedule
  double states = 0.0;
};

// Enumeration size: every drone tries every ordering of every subset, then
// every assignment is combined.
inline double brute_force_cd_states(int m, int k) {
  double per_drone = 0.0;
  double choose = 1.0, fact = 1.0;
  for (int s = 0; s <= m; ++s) {
    if (s > 0) {
      choose = choose * (m - s + 1) / s;
      fact *= s;
    }
    per_drone += choose * fact;
  }
  return k * per_drone + std::pow(static_cast<double>(k), m);
}

// Exact non-preemptive optimum. Best orderings are tabulated per drone and
// subset, then every assignment of requests to drones is scored.
inline BruteForceResult brute_force_cd(const Instance& inst, const OracleBudget& budget = {}) {
  const int m = inst.m();
  const int k = inst.k();
  if (m > budget.max_requests) throw BudgetExceeded("brute force: too many requests");
  if (k > budget.max_depots) throw BudgetExceeded("brute force: too many depots");
  BruteForceResult res;
  res.states = brute_force_cd_states(m, k);
  if (res.states > budget.max_states) throw BudgetExceeded("brute force: state cap exceeded");

  const int subsets = 1 << m;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best(k, std::vector<double>(subsets, inf));
  std::vector<std::vector<std::vector<int>>> best_order(k, std::vector<std::vector<int>>(subsets));
  for (int j = 0; j < k; ++j) {
    for (int mask = 0; mask < subsets; ++mask) {
      std::vector<int> order;
      for (int i = 0; i < m; ++i) {
        if (mask >> i & 1) order.push_back(i);
      }
      do {
        const double c = route_length(inst, j, order) / inst.depots[j].speed;
        if (c < best[j][mask]) {
          best[j][mask] = c;
          best_order[j][mask] = order;
        }
      } while (std::next_permutation(order.begin(), order.end()));
    }
  }

  // Assignments as base-k counters.
  std::vector<int> assign(m, 0), best_assign(m, 0);
  double best_cost = inf;
  while (true) {
    std::vector<int> masks(k, 0);
    for (int i = 0; i < m; ++i) masks[assign[i]] |= 1 << i;
    double c = 0.0;
    for (int j = 0; j < k; ++j) c += best[j][masks[j]];
    if (c < best_cost) {
      best_cost = c;
      best_assign = assign;
    }
    int pos = 0;
    while (pos < m && ++assign[pos] == k) assign[pos++] = 0;
    if (pos == m) break;
  }

  std::vector<int> masks(k, 0);
  for (int i = 0; i < m; ++i) masks[best_assign[i]] |= 1 << i;
  for (int j = 0; j < k; ++j) res.solution.routes.push_back(make_route(inst, j, best_order[j][masks[j]]));
  finalize(res.solution);
  res.solution.algorithm = "brute-force";
  res.cost = m == 0 ? 0.0 : best_cost;
  return res;
}

struct TreeCombinationOptimum {
  double objective = 0.0;
  std::vector<std::vector<int>> groups;  // vertices, ascending
};

namespace detail {

// Prim on the ell submatrix of a group.
inline double group_mst_length(const LevelGraph& g, const std::vector<int>& group) {
  const int n = static_cast<int>(group.size());
  if (n <= 1) return 0.0;
  std::vector<double> key(n, std::numeric_limits<double>::infinity());
  std::vector<char> in(n, 0);
  key[0] = 0.0;
  double sum = 0.0;
  for (int it = 0; it < n; ++it) {
    int best = -1;
    for (int a = 0; a < n; ++a) {
      if (!in[a] && (best < 0 || key[a] < key[best])) best = a;
    }
    in[best] = 1;
    sum += key[best];
    for (int a = 0; a < n; ++a) {
      if (!in[a]) key[a] = std::min(key[a], g.ell[group[best]][group[a]]);
    }
  }
  return sum;
}

inline double group_cost(const LevelGraph& g, const std::vector<int>& group) {
  int fastest = g.h();
  double w = 0.0;
  for (int v : group) {
    fastest = std::min(fastest, g.level[v]);
    w += g.weight[v];
  }
  return (group_mst_length(g, group) + w) / g.speeds[fastest];
}

}  // namespace detail

// Exact tree combination: every set partition of the vertices, enumerated as
// restricted-growth strings.
inline TreeCombinationOptimum brute_force_tree_combination(const LevelGraph& g,
                                                          const OracleBudget& budget = {}) {
  const int n = g.size();
  if (n > budget.max_tc_vertices) throw BudgetExceeded("tree combination: too many vertices");
  TreeCombinationOptimum best;
  best.objective = std::numeric_limits<double>::infinity();
  if (n == 0) {
    best.objective = 0.0;
    return best;
  }
  std::vector<int> a(n, 0), prefix_max(n, 0);
  while (true) {
    const int blocks = *std::max_element(a.begin(), a.end()) + 1;
    std::vector<std::vector<int>> groups(blocks);
    for (int v = 0; v < n; ++v) groups[a[v]].push_back(v);
    double c = 0.0;
    for (const auto& grp : groups) c += detail::group_cost(g, grp);
    if (c < best.objective) {
      best.objective = c;
      best.groups = std::move(groups);
    }
    // Next string: a[0] = 0, a[i] <= 1 + max(a[0..i-1]).
    int i = n - 1;
    while (i > 0 && a[i] == prefix_max[i - 1] + 1) --i;
    if (i == 0) break;
    ++a[i];
    prefix_max[i] = std::max(prefix_max[i - 1], a[i]);
    for (int t = i + 1; t < n; ++t) {
      a[t] = 0;
      prefix_max[t] = prefix_max[i];
    }
  }
  return best;
}

struct LowerBounds {
  double sum_st_over_p1 = 0.0;
  double mst_over_p1 = 0.0;  // only when all depots share a location
  bool has_mst = false;

  double best() const { return std::max(sum_st_over_p1, mst_over_p1); }
};

inline LowerBounds lower_bounds(const Instance& inst) {
  LowerBounds lb;
  if (inst.k() == 0) return lb;
  const double p1 = inst.depots.front().speed;
  for (const Request& r : inst.requests) lb.sum_st_over_p1 += dist(r.source, r.target);
  lb.sum_st_over_p1 /= p1;
  if (depots_colocated(inst)) {
    std::vector<Point> pts{inst.depots.front().location};
    for (const Request& r : inst.requests) pts.push_back(r.source);
    lb.mst_over_p1 = total_length(euclidean_mst(pts)) / p1;
    lb.has_mst = true;
  }
  return lb;
}

}  // namespace mscd
