#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mscd/errors.hpp"
#include "mscd/instance.hpp"
#include "mscd/instance_io.hpp"
#include "mscd/routing.hpp"

namespace mscd {

// A sweep over one parameter axis with everything else fixed. Defaults are
// the bold values of the synthetic experiments.
struct ExperimentConfig {
  std::string kind = "uniform";  // worst-case | uniform | gmm
  std::string sweep;             // n | k | h | c | sigma | alpha, empty for a single point
  std::vector<double> values;
  int n = 10000;
  int k = 30;
  int h = 3;
  int c = 3;
  double sigma = 3.0;
  double alpha = 1000.0;
  double epsilon = 0.01;
  double decay = kDefaultDecay;
  std::vector<std::uint64_t> seeds{1};
  std::vector<std::string> algorithms{"baseline", "pd-dfs", "pd-greedy", "pd-dgreedy"};
  std::vector<std::string> trees{"prim-mst-7"};
  bool certify = false;
  std::string out = "metrics.csv";
  std::string ratio_out = "ratio.csv";
  std::string instance;  // schema-compatible data file or directory instead of a generator
  std::string format = "json";
};

namespace detail {

inline std::vector<std::string> config_list(std::string v) {
  v = trim(v);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw ParseError("config: unterminated list '" + v + "'");
    v = v.substr(1, v.size() - 2);
  }
  std::vector<std::string> out;
  for (auto& item : split_csv_line(v)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline bool config_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError("config: " + key + " must be true or false");
}

}  // namespace detail

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.kind != "worst-case" && cfg.kind != "uniform" && cfg.kind != "gmm")
    throw InvalidParam("config: unknown kind " + cfg.kind);
  static const std::vector<std::string> axes{"n", "k", "h", "c", "sigma", "alpha"};
  if (!cfg.sweep.empty()) {
    if (std::find(axes.begin(), axes.end(), cfg.sweep) == axes.end())
      throw InvalidParam("config: unknown sweep axis " + cfg.sweep);
    if (cfg.values.empty()) throw InvalidParam("config: sweep needs at least one value");
  }
  if (cfg.seeds.empty()) throw InvalidParam("config: at least one seed is required");
  if (cfg.algorithms.empty()) throw InvalidParam("config: at least one algorithm is required");
  for (const auto& a : cfg.algorithms) {
    if (a == "baseline") continue;
    if (a.rfind("pd-", 0) != 0) throw InvalidParam("config: unknown algorithm " + a);
    parse_router(a.substr(3));
  }
  if (cfg.trees.empty()) throw InvalidParam("config: at least one tree variant is required");
  for (const auto& t : cfg.trees) parse_tree_variant(t);
}

// Flat `key = value` lines; `#` starts a comment, lists are comma separated
// with optional brackets.
inline ExperimentConfig parse_config(const std::string& text) {
  using detail::parse_field;
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = "config:" + std::to_string(line_no);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key == "kind") {
      cfg.kind = value;
    } else if (key == "sweep") {
      cfg.sweep = value;
    } else if (key == "values") {
      cfg.values.clear();
      for (const auto& v : detail::config_list(value)) cfg.values.push_back(parse_field<double>(v, where));
    } else if (key == "n") {
      cfg.n = parse_field<int>(value, where);
    } else if (key == "k") {
      cfg.k = parse_field<int>(value, where);
    } else if (key == "h") {
      cfg.h = parse_field<int>(value, where);
    } else if (key == "c") {
      cfg.c = parse_field<int>(value, where);
    } else if (key == "sigma") {
      cfg.sigma = parse_field<double>(value, where);
    } else if (key == "alpha") {
      cfg.alpha = parse_field<double>(value, where);
    } else if (key == "epsilon") {
      cfg.epsilon = parse_field<double>(value, where);
    } else if (key == "decay") {
      cfg.decay = parse_field<double>(value, where);
    } else if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& v : detail::config_list(value)) cfg.seeds.push_back(parse_field<std::uint64_t>(v, where));
    } else if (key == "algorithms") {
      cfg.algorithms = detail::config_list(value);
    } else if (key == "trees") {
      cfg.trees = detail::config_list(value);
    } else if (key == "certify") {
      cfg.certify = detail::config_bool(value, key);
    } else if (key == "out") {
      cfg.out = value;
    } else if (key == "ratio_out") {
      cfg.ratio_out = value;
    } else if (key == "instance") {
      cfg.instance = value;
    } else if (key == "format") {
      cfg.format = value;
    } else {
      throw ParseError(where + ": unknown key '" + key + "'");
    }
  }
  validate(cfg);
  return cfg;
}

struct MetricsRow {
  std::string kind;
  int n = 0;
  int k = 0;
  int h = 0;
  std::optional<int> c;
  std::optional<double> sigma;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::string algo;
  std::string tree;    // empty for the baseline
  std::string router;  // empty for the baseline
  double cost = 0.0;
  StageTimes times;
  bool feasible = false;
};

struct RatioRow {
  MetricsRow pd;
  double baseline_cost = 0.0;
  double baseline_time_s = 0.0;

  double cost_ratio() const { return pd.cost / baseline_cost; }
  double time_ratio() const { return pd.times.total_s / baseline_time_s; }
  double baseline_over_pd() const { return baseline_cost / pd.cost; }
};

inline constexpr const char* kMetricsHeader =
    "kind,n,k,h,c,sigma,alpha,seed,algo,tree,router,cost,time_total_s,time_tree_s,time_pd_s,"
    "time_route_s,feasible";
inline constexpr const char* kRatioHeader =
    "kind,n,k,h,c,sigma,alpha,seed,algo,tree,router,cost_ratio,time_ratio,baseline_over_pd";

namespace detail {

inline std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

template <typename T>
std::string opt(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return num(*v);
  } else {
    return std::to_string(*v);
  }
}

inline std::string row_prefix(const MetricsRow& r) {
  return r.kind + "," + std::to_string(r.n) + "," + std::to_string(r.k) + "," + std::to_string(r.h) +
         "," + opt(r.c) + "," + opt(r.sigma) + "," + opt(r.alpha) + "," + opt(r.seed) + "," + r.algo +
         "," + r.tree + "," + r.router;
}

}  // namespace detail

inline std::string metrics_csv_line(const MetricsRow& r) {
  using detail::num;
  return detail::row_prefix(r) + "," + num(r.cost) + "," + num(r.times.total_s) + "," +
         num(r.times.tree_s) + "," + num(r.times.pd_s) + "," + num(r.times.route_s) + "," +
         (r.feasible ? "true" : "false");
}

inline std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows) out += metrics_csv_line(r) + "\n";
  return out;
}

inline std::string ratio_csv(const std::vector<RatioRow>& rows) {
  using detail::num;
  std::string out = std::string(kRatioHeader) + "\n";
  for (const auto& r : rows) {
    out += detail::row_prefix(r.pd) + "," + num(r.cost_ratio()) + "," + num(r.time_ratio()) + "," +
           num(r.baseline_over_pd()) + "\n";
  }
  return out;
}

// Metrics row skeleton for an instance: generator parameters from its meta
// block where present.
inline MetricsRow describe_instance(const Instance& inst) {
  MetricsRow r;
  const auto& meta = inst.meta;
  r.kind = meta.is_object() ? meta.value("generator", std::string("file")) : "file";
  r.n = inst.m();
  r.k = inst.k();
  r.h = level_partition(inst).h();
  if (!meta.is_object()) return r;
  if (meta.contains("c")) r.c = meta.at("c").get<int>();
  if (meta.contains("sigma")) r.sigma = meta.at("sigma").get<double>();
  if (meta.contains("alpha")) r.alpha = meta.at("alpha").get<double>();
  if (meta.contains("seed")) r.seed = meta.at("seed").get<std::uint64_t>();
  return r;
}

// Solves one instance with one algorithm id ("baseline" or "pd-<router>").
inline MetricsRow run_algorithm(const Instance& inst, const std::string& algo,
                                const std::string& tree, bool certify, Solution* out = nullptr) {
  MetricsRow row = describe_instance(inst);
  row.algo = algo;
  Solution sol;
  if (algo == "baseline") {
    sol = solve_baseline(inst, &row.times);
  } else {
    if (algo.rfind("pd-", 0) != 0) throw InvalidParam("unknown algorithm " + algo);
    PdOptions opt;
    opt.router = parse_router(algo.substr(3));
    opt.tree = parse_tree_variant(tree);
    opt.certify = certify;
    PdRun run = solve_pd_run(inst, opt);
    if (certify && !run.report.ok())
      throw InvariantViolation("certificate failed: " + run.report.failures.front());
    row.tree = tree;
    row.router = to_string(opt.router);
    row.times = run.times;
    sol = std::move(run.solution);
  }
  const Evaluation ev = evaluate(sol, inst);
  row.cost = ev.total_cost;
  row.feasible = ev.feasible;
  if (out) *out = std::move(sol);
  return row;
}

inline Instance generate_point(const ExperimentConfig& cfg, const std::string& axis, double value,
                               std::uint64_t seed) {
  int n = cfg.n, k = cfg.k, h = cfg.h, c = cfg.c;
  double sigma = cfg.sigma, alpha = cfg.alpha;
  if (axis == "n") n = static_cast<int>(value);
  if (axis == "k") k = static_cast<int>(value);
  if (axis == "h") h = static_cast<int>(value);
  if (axis == "c") c = static_cast<int>(value);
  if (axis == "sigma") sigma = value;
  if (axis == "alpha") alpha = value;
  if (cfg.kind == "worst-case") return gen_worst_case(n, 1.0, alpha, cfg.epsilon);
  if (cfg.kind == "gmm") return gen_gmm(n, k, h, c, sigma, cfg.decay, seed);
  return gen_uniform(n, k, h, cfg.decay, seed);
}

struct BenchResult {
  std::vector<MetricsRow> metrics;
  std::vector<RatioRow> ratios;
};

// Runs the sweep in config order: values, then seeds, then algorithms, then
// tree variants. The worst-case generator is deterministic, so it runs once
// per value.
inline BenchResult run_bench(const ExperimentConfig& cfg) {
  validate(cfg);
  BenchResult res;
  std::vector<std::pair<Instance, std::optional<std::uint64_t>>> points;
  if (!cfg.instance.empty()) {
    points.emplace_back(load_instance(cfg.instance, parse_instance_format(cfg.format)), std::nullopt);
  } else {
    const std::vector<double> values = cfg.sweep.empty() ? std::vector<double>{0.0} : cfg.values;
    for (double v : values) {
      if (cfg.kind == "worst-case") {
        points.emplace_back(generate_point(cfg, cfg.sweep, v, 0), std::nullopt);
        continue;
      }
      for (std::uint64_t seed : cfg.seeds) points.emplace_back(generate_point(cfg, cfg.sweep, v, seed), seed);
    }
  }
  for (const auto& [inst, seed] : points) {
    std::optional<MetricsRow> baseline;
    std::vector<MetricsRow> pd_rows;
    for (const auto& algo : cfg.algorithms) {
      if (algo == "baseline") {
        MetricsRow row = run_algorithm(inst, algo, "", false);
        row.seed = seed;
        baseline = row;
        res.metrics.push_back(row);
        continue;
      }
      for (const auto& tree : cfg.trees) {
        MetricsRow row = run_algorithm(inst, algo, tree, cfg.certify);
        row.seed = seed;
        pd_rows.push_back(row);
        res.metrics.push_back(row);
      }
    }
    if (!baseline) continue;
    for (const auto& row : pd_rows) res.ratios.push_back({row, baseline->cost, baseline->times.total_s});
  }
  return res;
}

}  // namespace mscd
