#include <gtest/gtest.h>

#include <sstream>

#include "mscd/bench.hpp"

using namespace mscd;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Config, ParsesEveryKey) {
  const ExperimentConfig cfg = parse_config(R"(# comment
kind = gmm
sweep = sigma
values = [1, 2.5, 4]
n = 500
k = 12
h = 2
c = 4
sigma = 2   # trailing comment
alpha = 50
epsilon = 0.05
decay = 3
seeds = 1, 2, 3
algorithms = ["baseline", "pd-greedy"]
trees = mst, prim
certify = true
out = "m.csv"
ratio_out = r.csv
)");
  EXPECT_EQ(cfg.kind, "gmm");
  EXPECT_EQ(cfg.sweep, "sigma");
  EXPECT_EQ(cfg.values, (std::vector<double>{1, 2.5, 4}));
  EXPECT_EQ(cfg.n, 500);
  EXPECT_EQ(cfg.k, 12);
  EXPECT_EQ(cfg.h, 2);
  EXPECT_EQ(cfg.c, 4);
  EXPECT_EQ(cfg.sigma, 2.0);
  EXPECT_EQ(cfg.alpha, 50.0);
  EXPECT_EQ(cfg.epsilon, 0.05);
  EXPECT_EQ(cfg.decay, 3.0);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(cfg.algorithms, (std::vector<std::string>{"baseline", "pd-greedy"}));
  EXPECT_EQ(cfg.trees, (std::vector<std::string>{"mst", "prim"}));
  EXPECT_TRUE(cfg.certify);
  EXPECT_EQ(cfg.out, "m.csv");
  EXPECT_EQ(cfg.ratio_out, "r.csv");
}

TEST(Config, Rejects) {
  EXPECT_THROW(parse_config("speed = 3\n"), ParseError);
  EXPECT_THROW(parse_config("n 3\n"), ParseError);
  EXPECT_THROW(parse_config("n = three\n"), ParseError);
  EXPECT_THROW(parse_config("certify = maybe\n"), ParseError);
  EXPECT_THROW(parse_config("kind = hexagonal\n"), InvalidParam);
  EXPECT_THROW(parse_config("sweep = depth\nvalues = 1\n"), InvalidParam);
  EXPECT_THROW(parse_config("algorithms = pd-tsp\n"), InvalidParam);
  EXPECT_THROW(parse_config("trees = kruskal\n"), InvalidParam);
  EXPECT_THROW(parse_config("seeds = []\n"), InvalidParam);
}

TEST(Csv, Headers) {
  EXPECT_EQ(lines(metrics_csv({})).front(),
            "kind,n,k,h,c,sigma,alpha,seed,algo,tree,router,cost,time_total_s,time_tree_s,time_pd_s,"
            "time_route_s,feasible");
  EXPECT_EQ(lines(ratio_csv({})).front(),
            "kind,n,k,h,c,sigma,alpha,seed,algo,tree,router,cost_ratio,time_ratio,baseline_over_pd");
}

TEST(Bench, SmallSweep) {
  ExperimentConfig cfg = parse_config("kind = uniform\nsweep = n\nvalues = 100, 200\nk = 6\nh = 2\nseeds = 1, 2\n"
                                      "certify = true\n");
  const BenchResult res = run_bench(cfg);
  // Two values, two seeds, baseline plus three routers.
  ASSERT_EQ(res.metrics.size(), 2u * 2u * 4u);
  ASSERT_EQ(res.ratios.size(), 2u * 2u * 3u);
  for (const auto& r : res.metrics) {
    EXPECT_TRUE(r.feasible);
    EXPECT_EQ(r.kind, "uniform");
    ASSERT_TRUE(r.seed.has_value());
  }
  EXPECT_EQ(res.metrics[0].n, 100);
  EXPECT_EQ(res.metrics.back().n, 200);
  EXPECT_EQ(*res.metrics.back().seed, 2u);
  const auto m = lines(metrics_csv(res.metrics));
  EXPECT_EQ(m.size(), res.metrics.size() + 1);
  const auto row = lines(metrics_csv({res.metrics[0]}))[1];
  EXPECT_EQ(row.rfind("uniform,100,6,2,,,,1,baseline,,,", 0), 0u) << row;
  for (const auto& r : res.ratios) EXPECT_NEAR(r.cost_ratio() * r.baseline_over_pd(), 1.0, 1e-12);
}

TEST(Bench, WorstCaseRunsOncePerValue) {
  const ExperimentConfig cfg = parse_config("kind = worst-case\nsweep = n\nvalues = 50\nseeds = 1, 2, 3\n"
                                            "algorithms = baseline, pd-dfs\n");
  const BenchResult res = run_bench(cfg);
  ASSERT_EQ(res.metrics.size(), 2u);
  ASSERT_EQ(res.ratios.size(), 1u);
  EXPECT_NEAR(res.metrics[0].cost, 2500.0, 1e-6);
  EXPECT_GT(res.ratios[0].baseline_over_pd(), 10.0);
  EXPECT_FALSE(res.metrics[0].seed.has_value());
}

TEST(Bench, Deterministic) {
  const ExperimentConfig cfg = parse_config("kind = gmm\nn = 150\nk = 5\nh = 2\nseeds = 7\n");
  const BenchResult a = run_bench(cfg);
  const BenchResult b = run_bench(cfg);
  ASSERT_EQ(a.metrics.size(), b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i) EXPECT_EQ(a.metrics[i].cost, b.metrics[i].cost);
}

TEST(Bench, InstanceFile) {
  ExperimentConfig cfg;
  cfg.instance = MSCD_FIXTURES_DIR "/courier";
  cfg.format = "courier-csv";
  cfg.algorithms = {"baseline", "pd-dgreedy"};
  const BenchResult res = run_bench(cfg);
  ASSERT_EQ(res.metrics.size(), 2u);
  EXPECT_EQ(res.metrics[0].kind, "courier-csv");
  EXPECT_EQ(res.metrics[0].n, 5);
  EXPECT_TRUE(res.metrics[1].feasible);
}
