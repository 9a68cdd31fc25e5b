// Generates a small clustered instance, solves it with the baseline and the
// three primal-dual routers, and prints costs and certificate status.

#include <cstdio>

#include "mscd/mscd.hpp"

int main() {
  using namespace mscd;
  const Instance inst = gen_gmm(2000, 12, 3, 3, 4.0, kDefaultDecay, 1);
  std::printf("instance: %d requests, %d depots, %d speed levels\n", inst.m(), inst.k(),
              level_partition(inst).h());

  const Solution base = solve_baseline(inst);
  std::printf("%-12s cost %12.2f\n", "baseline", base.total_cost);

  int status = evaluate(base, inst).feasible ? 0 : 1;
  for (Router r : {Router::kDfs, Router::kGreedy, Router::kDGreedy}) {
    PdOptions opt;
    opt.router = r;
    const PdRun run = solve_pd_run(inst, opt);
    const bool feasible = evaluate(run.solution, inst).feasible;
    std::printf("%-12s cost %12.2f  feasible %s  certificate %s  (%lld growth iterations)\n",
                run.solution.algorithm.c_str(), run.solution.total_cost, feasible ? "yes" : "no",
                run.report.ok() ? "ok" : "FAILED", run.report.iterations);
    if (!feasible || !run.report.ok()) status = 1;
  }
  return status;
}
