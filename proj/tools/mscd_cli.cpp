// mscd: generate, solve, verify and benchmark min-sum collaborative delivery
// instances.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mscd/mscd.hpp"

namespace {

namespace fs = std::filesystem;
using namespace mscd;

constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

struct GenArgs {
  std::string kind = "uniform";
  int n = 10000;
  int k = 30;
  int h = 3;
  int c = 3;
  double sigma = 3.0;
  double alpha = 1000.0;
  double epsilon = 0.01;
  double decay = kDefaultDecay;
  std::uint64_t seed = 1;
  std::string out;
};

struct SolveArgs {
  std::string instance;
  std::string format = "json";
  std::string algo = "pd";
  std::string tree = "prim-mst-k";
  std::string router = "dfs";
  double mst_k = kDefaultMstK;
  bool certify = false;
  std::string out;
  std::string metrics;
  std::string events;
};

struct VerifyArgs {
  std::string instance;
  std::string format = "json";
  std::string solution;
  std::string events;
  bool certify = false;
};

struct BenchArgs {
  std::string config;
  std::string out;
  std::string ratio_out;
  std::string instance;
};

Instance generate(const GenArgs& a) {
  if (a.kind == "worst-case") return gen_worst_case(a.n, 1.0, a.alpha, a.epsilon);
  if (a.kind == "uniform") return gen_uniform(a.n, a.k, a.h, a.decay, a.seed);
  if (a.kind == "gmm") return gen_gmm(a.n, a.k, a.h, a.c, a.sigma, a.decay, a.seed);
  throw InvalidParam("unknown kind " + a.kind);
}

int run_gen(const GenArgs& a) {
  const Instance inst = generate(a);
  if (a.out.empty()) {
    std::cout << instance_to_json(inst).dump(1) << "\n";
  } else {
    save_instance(inst, a.out);
  }
  return 0;
}

std::string default_metrics_path(const std::string& out) {
  fs::path p(out);
  p.replace_extension();
  return p.string() + "_metrics.csv";
}

int run_solve(const SolveArgs& a) {
  const Instance inst = load_instance(a.instance, parse_instance_format(a.format));
  MetricsRow row = describe_instance(inst);
  Solution sol;
  std::string events;
  if (a.algo == "baseline") {
    sol = solve_baseline(inst, &row.times);
    row.algo = "baseline";
  } else if (a.algo == "pd") {
    PdOptions opt;
    opt.tree = parse_tree_variant(a.tree);
    opt.router = parse_router(a.router);
    opt.mst_k = a.mst_k;
    opt.certify = a.certify;
    PdRun run = solve_pd_run(inst, opt);
    if (a.certify) {
      std::cerr << report_to_json(run.report).dump(1) << "\n";
      if (!run.report.ok()) throw InvariantViolation("certificate failed");
    }
    if (!a.events.empty()) events = event_log_jsonl(run.growth);
    row.algo = "pd-" + to_string(opt.router);
    row.tree = a.tree;
    row.router = to_string(opt.router);
    row.times = run.times;
    sol = std::move(run.solution);
  } else if (a.algo == "single-depot") {
    const auto t0 = detail::Clock::now();
    sol = solve_single_depot(inst);
    row.times.route_s = row.times.total_s = detail::seconds_since(t0);
    row.algo = "single-depot";
  } else {
    throw InvalidParam("unknown algorithm " + a.algo);
  }
  const Evaluation ev = evaluate(sol, inst);
  row.cost = ev.total_cost;
  row.feasible = ev.feasible;

  const std::string text = solution_to_json(sol, inst).dump(1) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(a.out, text);
  }
  const std::string metrics =
      !a.metrics.empty() ? a.metrics : (a.out.empty() ? std::string() : default_metrics_path(a.out));
  if (!metrics.empty()) write_text_file(metrics, metrics_csv({row}));
  if (!a.events.empty()) write_text_file(a.events, events);
  return 0;
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<nlohmann::json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    out.push_back(parse_json_text(line, path));
  }
  return out;
}

// Compares a recorded event log with a fresh run; kinds, levels and moats must
// agree exactly and times within a relative tolerance.
std::vector<std::string> compare_events(const std::vector<nlohmann::json>& recorded,
                                        const GrowthState& s) {
  std::vector<std::string> issues;
  if (recorded.size() != s.events.size()) {
    issues.push_back("event count differs: recorded " + std::to_string(recorded.size()) +
                     ", replayed " + std::to_string(s.events.size()));
    return issues;
  }
  for (std::size_t i = 0; i < recorded.size(); ++i) {
    const nlohmann::json fresh = event_to_json(s, s.events[i]);
    const auto& r = recorded[i];
    try {
      const double t0 = r.at("time").get<double>();
      const double t1 = fresh.at("time").get<double>();
      const bool same = r.at("kind") == fresh.at("kind") && r.at("level") == fresh.at("level") &&
                        r.at("payload") == fresh.at("payload") &&
                        std::abs(t0 - t1) <= 1e-9 * std::max({1.0, std::abs(t0), std::abs(t1)});
      if (!same) issues.push_back("event " + std::to_string(i) + " differs");
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("event log: ") + e.what());
    }
  }
  return issues;
}

int run_verify(const VerifyArgs& a) {
  const Instance inst = load_instance(a.instance, parse_instance_format(a.format));
  const Solution sol = solution_from_json(parse_json_text(read_text_file(a.solution), a.solution), inst);
  const Evaluation ev = evaluate(sol, inst);
  nlohmann::json out{{"feasible", ev.feasible},
                     {"total_cost", ev.total_cost},
                     {"violations", ev.violations}};
  bool ok = ev.feasible;
  if (a.certify || !a.events.empty()) {
    // Replay the primal-dual run that the solution records in its params.
    PdOptions opt;
    if (sol.params.contains("tree")) opt.tree = parse_tree_variant(sol.params.at("tree").get<std::string>());
    if (sol.params.contains("router")) opt.router = parse_router(sol.params.at("router").get<std::string>());
    if (sol.params.contains("mst_k")) opt.mst_k = sol.params.at("mst_k").get<double>();
    const PdRun run = solve_pd_run(inst, opt);
    out["report"] = report_to_json(run.report);
    ok = ok && run.report.ok();
    if (!a.events.empty()) {
      const auto issues = compare_events(read_jsonl(a.events), run.growth);
      out["event_log_issues"] = issues;
      ok = ok && issues.empty();
    }
  }
  std::cout << out.dump(1) << "\n";
  return ok ? 0 : kExitInfeasible;
}

int run_bench_cmd(const BenchArgs& a) {
  ExperimentConfig cfg = parse_config(read_text_file(a.config));
  if (!a.out.empty()) cfg.out = a.out;
  if (!a.ratio_out.empty()) cfg.ratio_out = a.ratio_out;
  if (!a.instance.empty()) cfg.instance = a.instance;
  const BenchResult res = run_bench(cfg);
  write_text_file(cfg.out, metrics_csv(res.metrics));
  write_text_file(cfg.ratio_out, ratio_csv(res.ratios));
  std::cerr << "wrote " << res.metrics.size() << " rows to " << cfg.out << " and "
            << res.ratios.size() << " rows to " << cfg.ratio_out << "\n";
  for (const auto& r : res.metrics) {
    if (!r.feasible) return kExitInfeasible;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Min-sum collaborative delivery with heterogeneous drones"};
  app.require_subcommand(1);
  // -h would clash with --h (speed levels); subcommands inherit this.
  app.set_help_flag("--help", "Print this help message and exit");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate an instance");
  gen_cmd->add_option("--kind", gen.kind, "worst-case | uniform | gmm")
      ->check(CLI::IsMember({"worst-case", "uniform", "gmm"}));
  gen_cmd->add_option("--n", gen.n, "Number of requests");
  gen_cmd->add_option("--k", gen.k, "Number of depots");
  gen_cmd->add_option("--h", gen.h, "Number of speed levels");
  gen_cmd->add_option("--c", gen.c, "Number of clusters (gmm)");
  gen_cmd->add_option("--sigma", gen.sigma, "Cluster spread (gmm)");
  gen_cmd->add_option("--alpha", gen.alpha, "Speed ratio (worst-case)");
  gen_cmd->add_option("--epsilon", gen.epsilon, "Depot offset (worst-case)");
  gen_cmd->add_option("--decay", gen.decay, "Speed ratio between consecutive levels");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("-o,--out", gen.out, "Output file (stdout if omitted)");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve an instance");
  solve_cmd->add_option("--instance", solve.instance, "Instance file or courier CSV directory")->required();
  solve_cmd->add_option("--format", solve.format, "json | courier-csv");
  solve_cmd->add_option("--algo", solve.algo, "baseline | pd | single-depot")
      ->check(CLI::IsMember({"baseline", "pd", "single-depot"}));
  solve_cmd->add_option("--tree", solve.tree, "mst | prim | prim-mst-k");
  solve_cmd->add_option("--router", solve.router, "dfs | greedy | dgreedy");
  solve_cmd->add_option("--mst-k", solve.mst_k, "Guard ratio for prim-mst-k");
  solve_cmd->add_flag("--certify", solve.certify, "Audit the primal-dual run and print its report");
  solve_cmd->add_option("-o,--out", solve.out, "Solution file (stdout if omitted)");
  solve_cmd->add_option("--metrics", solve.metrics, "Metrics CSV (default <out>_metrics.csv)");
  solve_cmd->add_option("--events", solve.events, "Write the growth event log as JSON lines");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Check a solution against its instance");
  verify_cmd->add_option("--instance", verify.instance, "Instance file")->required();
  verify_cmd->add_option("--format", verify.format, "json | courier-csv");
  verify_cmd->add_option("--solution", verify.solution, "Solution file")->required();
  verify_cmd->add_flag("--certify", verify.certify, "Replay the primal-dual run and check its certificate");
  verify_cmd->add_option("--events", verify.events, "Event log to compare with the replay");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a parameter sweep");
  bench_cmd->add_option("--config", bench.config, "Sweep configuration")->required();
  bench_cmd->add_option("-o,--out", bench.out, "Metrics CSV (overrides the config)");
  bench_cmd->add_option("--ratio-out", bench.ratio_out, "Ratio CSV (overrides the config)");
  bench_cmd->add_option("--instance", bench.instance, "Schema-compatible instance instead of a generator");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*solve_cmd) return run_solve(solve);
    if (*verify_cmd) return run_verify(verify);
    if (*bench_cmd) return run_bench_cmd(bench);
  } catch (const InfeasibleInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
