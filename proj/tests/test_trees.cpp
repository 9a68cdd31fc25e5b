#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "mscd/trees.hpp"

using namespace mscd;

namespace {

Instance make(std::vector<Depot> depots, std::vector<std::pair<Point, Point>> reqs) {
  Instance inst;
  inst.depots = std::move(depots);
  for (int i = 0; i < static_cast<int>(reqs.size()); ++i) inst.requests.push_back({i, reqs[i].first, reqs[i].second});
  normalize(inst);
  return inst;
}

// Dense Prim over the contracted graph: node 0 is the super-depot, whose
// distance to a source is the distance to its nearest depot.
double contracted_mst_oracle(const Instance& inst) {
  const int n = inst.m() + 1;
  auto d = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    const Point& pb = inst.requests[b - 1].source;
    if (a == 0) {
      double best = 1e300;
      for (const Depot& dep : inst.depots) best = std::min(best, dist(dep.location, pb));
      return best;
    }
    return dist(inst.requests[a - 1].source, pb);
  };
  std::vector<double> key(n, 1e300);
  std::vector<char> in(n, 0);
  key[0] = 0.0;
  double sum = 0.0;
  for (int it = 0; it < n; ++it) {
    int best = -1;
    for (int v = 0; v < n; ++v) {
      if (!in[v] && (best < 0 || key[v] < key[best])) best = v;
    }
    in[best] = 1;
    sum += key[best];
    for (int v = 0; v < n; ++v) {
      if (!in[v]) key[v] = std::min(key[v], d(best, v));
    }
  }
  return sum;
}

double st_sum(const Instance& inst) {
  double s = 0.0;
  for (const Request& r : inst.requests) s += dist(r.source, r.target);
  return s;
}

bool has_edge(const OriginalTree& t, NodeRef a, NodeRef b, double len) {
  return std::any_of(t.edges.begin(), t.edges.end(), [&](const TreeEdge& e) {
    return ((e.a == a && e.b == b) || (e.a == b && e.b == a)) && std::abs(e.length - len) < 1e-12;
  });
}

const std::vector<TreeVariant> kVariants{TreeVariant::kMst, TreeVariant::kPrim, TreeVariant::kPrimMstK};

}  // namespace

TEST(Trees, SingleRequestSingleDepot) {
  const Instance inst = make({{0, {0, 0}, 1.0}}, {{{1, 0}, {1, 1}}});
  for (TreeVariant v : kVariants) {
    const Forest f = build_trees(inst, v);
    EXPECT_TRUE(check_forest(inst, f).empty());
    const OriginalTree& t = f.trees[0];
    EXPECT_DOUBLE_EQ(t.weight, 2.0);
    EXPECT_TRUE(has_edge(t, NodeRef::depot(0), NodeRef::source(0), 1.0));
    EXPECT_TRUE(has_edge(t, NodeRef::source(0), NodeRef::target(0), 1.0));
  }
}

TEST(Trees, SourcesGoToTheirNearestDepot) {
  const Instance inst = make({{0, {0, 0}, 1.0}, {1, {10, 0}, 1.0}}, {{{1, 0}, {1, 0}}, {{9, 0}, {9, 0}}});
  for (TreeVariant v : kVariants) {
    const Forest f = build_trees(inst, v);
    EXPECT_TRUE(check_forest(inst, f).empty());
    EXPECT_EQ(inst.depots[f.owner[0]].id, 0) << to_string(v);
    EXPECT_EQ(inst.depots[f.owner[1]].id, 1) << to_string(v);
    EXPECT_DOUBLE_EQ(f.total_weight(), 2.0);
  }
}

TEST(Trees, NoRequestsGivesEmptyTrees) {
  const Instance inst = make({{0, {0, 0}, 1.0}, {1, {3, 3}, 0.5}}, {});
  for (TreeVariant v : kVariants) {
    const Forest f = build_trees(inst, v);
    ASSERT_EQ(f.trees.size(), 2u);
    for (const auto& t : f.trees) {
      EXPECT_TRUE(t.empty());
      EXPECT_EQ(t.weight, 0.0);
    }
  }
}

TEST(Trees, PrimHangsSourceOffTarget) {
  const Instance inst = make({{0, {0, 0}, 1.0}}, {{{1, 0}, {2, 0}}, {{2.1, 0}, {5, 0}}});
  for (TreeVariant v : {TreeVariant::kPrim, TreeVariant::kPrimMstK}) {
    const Forest f = build_trees(inst, v);
    EXPECT_TRUE(check_forest(inst, f).empty());
    EXPECT_TRUE(has_edge(f.trees[0], NodeRef::target(0), NodeRef::source(1), dist({2, 0}, {2.1, 0})));
  }
  // The source-only MST links the two sources instead.
  const Forest mst = build_trees_mst(inst);
  EXPECT_TRUE(has_edge(mst.trees[0], NodeRef::source(0), NodeRef::source(1), 1.1));
}

TEST(Trees, SingleRequestVariantsAgree) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 100);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<Depot> depots;
    for (int j = 0; j < 4; ++j) depots.push_back({j, {u(rng), u(rng)}, 1.0 / (1 + j % 2)});
    const Point s{u(rng), u(rng)}, t{u(rng), u(rng)};
    const Instance inst = make(depots, {{s, t}});
    const Forest a = build_trees_mst(inst);
    for (TreeVariant v : {TreeVariant::kPrim, TreeVariant::kPrimMstK}) {
      const Forest b = build_trees(inst, v);
      EXPECT_EQ(a.owner, b.owner);
      EXPECT_DOUBLE_EQ(a.total_weight(), b.total_weight());
    }
  }
}

TEST(Trees, MstMatchesContractedGraphOracle) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const int n = 10 + static_cast<int>(seed) * 15;
    Instance inst = gen_uniform(n, 1 + static_cast<int>(seed % 6), 1, 5.0, seed);
    if (seed % 3 == 0) inst.requests[2].source = inst.requests[5].source;  // duplicate sources
    const Forest f = build_trees_mst(inst);
    EXPECT_TRUE(check_forest(inst, f).empty());
    const double oracle = contracted_mst_oracle(inst);
    EXPECT_NEAR(f.total_weight() - st_sum(inst), oracle, 1e-9 * std::max(1.0, oracle)) << seed;
  }
}

TEST(Trees, MstGuardBoundsPrimLength) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Instance inst = seed % 2 ? gen_uniform(150, 6, 2, 5.0, seed) : gen_gmm(150, 6, 2, 3, 4.0, 5.0, seed);
    const double mst = build_trees_mst(inst).total_weight();
    const Forest p = build_trees_prim(inst, 7.0);
    EXPECT_TRUE(check_forest(inst, p).empty());
    EXPECT_LE(p.total_weight(), 7.0 * mst * (1 + 1e-12)) << seed;
  }
}

TEST(Trees, CollinearAndDuplicateInputs) {
  const Instance wc = gen_worst_case(50);
  for (TreeVariant v : kVariants) EXPECT_TRUE(check_forest(wc, build_trees(wc, v)).empty());
  const Instance dup = make({{0, {0, 0}, 1.0}, {1, {5, 5}, 0.5}},
                            {{{1, 1}, {2, 2}}, {{1, 1}, {3, 1}}, {{1, 1}, {1, 1}}, {{4, 4}, {0, 1}}});
  for (TreeVariant v : kVariants) EXPECT_TRUE(check_forest(dup, build_trees(dup, v)).empty());
}

TEST(Trees, Deterministic) {
  const Instance inst = gen_gmm(300, 9, 3, 4, 6.0, 5.0, 17);
  for (TreeVariant v : kVariants) {
    const Forest a = build_trees(inst, v);
    const Forest b = build_trees(inst, v);
    EXPECT_EQ(a.owner, b.owner);
    EXPECT_EQ(forest_to_json(inst, a), forest_to_json(inst, b));
  }
}

TEST(Trees, VariantNames) {
  EXPECT_EQ(parse_tree_variant("mst"), TreeVariant::kMst);
  EXPECT_EQ(parse_tree_variant("prim"), TreeVariant::kPrim);
  EXPECT_EQ(parse_tree_variant("prim-mst-7"), TreeVariant::kPrimMstK);
  EXPECT_EQ(to_string(TreeVariant::kPrimMstK), "prim-mst-k");
  EXPECT_THROW(parse_tree_variant("kruskal"), InvalidParam);
  EXPECT_THROW(build_trees_prim(gen_uniform(5, 1, 1, 5.0, 1), 0.5), InvalidParam);
}

TEST(Trees, CheckForestCatchesCorruption) {
  const Instance inst = gen_uniform(20, 3, 1, 5.0, 2);
  Forest f = build_trees_mst(inst);
  ASSERT_TRUE(check_forest(inst, f).empty());
  Forest broken = f;
  for (auto& t : broken.trees) {
    if (!t.edges.empty()) {
      t.edges.front().length += 1.0;
      break;
    }
  }
  EXPECT_FALSE(check_forest(inst, broken).empty());
  Forest missing = f;
  for (auto& t : missing.trees) {
    if (!t.requests.empty()) {
      t.requests.pop_back();
      break;
    }
  }
  EXPECT_FALSE(check_forest(inst, missing).empty());
}
