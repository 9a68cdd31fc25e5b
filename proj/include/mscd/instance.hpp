#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "mscd/errors.hpp"
#include "mscd/geometry.hpp"

namespace mscd {

struct Depot {
  int id = 0;
  Point location;
  double speed = 1.0;
};

struct Request {
  int id = 0;
  Point source;
  Point target;
};

// Depots are kept sorted by non-increasing speed; index 0 is the fastest.
struct Instance {
  std::vector<Depot> depots;
  std::vector<Request> requests;
  nlohmann::json meta = nlohmann::json::object();

  int k() const { return static_cast<int>(depots.size()); }
  int m() const { return static_cast<int>(requests.size()); }
};

// Stable sort by speed and structural validation. Throws InvalidParam.
inline void normalize(Instance& inst) {
  if (inst.depots.empty()) throw InvalidParam("instance has no depots");
  std::stable_sort(inst.depots.begin(), inst.depots.end(),
                   [](const Depot& a, const Depot& b) { return a.speed > b.speed; });
  std::vector<int> ids;
  for (const Depot& d : inst.depots) {
    if (!(d.speed > 0.0) || !std::isfinite(d.speed))
      throw InvalidParam("depot " + std::to_string(d.id) + " has non-positive speed");
    if (!is_finite(d.location))
      throw InvalidParam("depot " + std::to_string(d.id) + " has non-finite location");
    ids.push_back(d.id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw InvalidParam("duplicate depot id");
  ids.clear();
  for (const Request& r : inst.requests) {
    if (!is_finite(r.source) || !is_finite(r.target))
      throw InvalidParam("request " + std::to_string(r.id) + " has non-finite coordinates");
    ids.push_back(r.id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw InvalidParam("duplicate request id");
}

// ---------------------------------------------------------------------------
// Generators. Each entity class draws from its own stream so that changing,
// say, the number of depots leaves the request coordinates untouched.
// ---------------------------------------------------------------------------

enum class Stream : std::uint64_t { kDepots = 1, kRequests = 2, kClusters = 3 };

inline std::mt19937_64 make_stream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

inline constexpr double kGridSize = 100.0;
inline constexpr double kDefaultDecay = 5.0;

inline Instance gen_worst_case(int n, double v_slow = 1.0, double alpha = 1000.0,
                               double epsilon = 0.01) {
  if (n < 1) throw InvalidParam("worst-case: n must be at least 1");
  if (!(alpha > 1.0)) throw InvalidParam("worst-case: alpha must exceed 1");
  if (!(epsilon > 0.0)) throw InvalidParam("worst-case: epsilon must be positive");
  if (!(v_slow > 0.0)) throw InvalidParam("worst-case: v_slow must be positive");
  const double v1 = v_slow;
  const double v2 = alpha * v_slow;
  const double dn = static_cast<double>(n);
  Instance inst;
  inst.depots.push_back({0, {-dn * v1, 0.0}, v1});
  inst.depots.push_back({1, {-(dn + epsilon) * v2, 0.0}, v2});
  for (int i = 0; i < n; ++i) {
    const Point p{static_cast<double>(i) * dn * v1, 0.0};
    inst.requests.push_back({i, p, p});
  }
  inst.meta = {{"generator", "worst-case"}, {"n", n},       {"v_slow", v_slow},
               {"alpha", alpha},            {"epsilon", epsilon}};
  normalize(inst);
  return inst;
}

namespace detail {

inline void check_levels(int k, int h, double decay) {
  if (k < 1) throw InvalidParam("k must be at least 1");
  if (h < 1 || h > k) throw InvalidParam("h must satisfy 1 <= h <= k");
  if (!(decay > 1.0)) throw InvalidParam("decay must exceed 1");
}

// Uniform depots, assigned round-robin to h levels with speeds decay^-l.
inline std::vector<Depot> uniform_depots(int k, int h, double decay, std::uint64_t seed) {
  auto rng = make_stream(seed, Stream::kDepots);
  std::uniform_real_distribution<double> coord(0.0, kGridSize);
  std::vector<Depot> depots;
  for (int j = 0; j < k; ++j) {
    const double x = coord(rng);
    const double y = coord(rng);
    depots.push_back({j, {x, y}, std::pow(decay, -static_cast<double>(j % h))});
  }
  return depots;
}

}  // namespace detail

inline Instance gen_uniform(int n, int k, int h, double decay, std::uint64_t seed) {
  if (n < 0) throw InvalidParam("n must be non-negative");
  detail::check_levels(k, h, decay);
  Instance inst;
  inst.depots = detail::uniform_depots(k, h, decay, seed);
  auto rng = make_stream(seed, Stream::kRequests);
  std::uniform_real_distribution<double> coord(0.0, kGridSize);
  for (int i = 0; i < n; ++i) {
    Request r{i, {}, {}};
    r.source.x = coord(rng);
    r.source.y = coord(rng);
    r.target.x = coord(rng);
    r.target.y = coord(rng);
    inst.requests.push_back(r);
  }
  inst.meta = {{"generator", "uniform"}, {"n", n},         {"k", k},
               {"h", h},                 {"decay", decay}, {"seed", seed}};
  normalize(inst);
  return inst;
}

inline Instance gen_gmm(int n, int k, int h, int c, double sigma, double decay,
                        std::uint64_t seed) {
  if (n < 0) throw InvalidParam("n must be non-negative");
  if (c < 1) throw InvalidParam("gmm: c must be at least 1");
  if (!(sigma > 0.0)) throw InvalidParam("gmm: sigma must be positive");
  detail::check_levels(k, h, decay);
  Instance inst;
  inst.depots = detail::uniform_depots(k, h, decay, seed);

  auto crng = make_stream(seed, Stream::kClusters);
  std::uniform_real_distribution<double> coord(0.0, kGridSize);
  std::vector<Point> centers;
  for (int q = 0; q < c; ++q) {
    const double x = coord(crng);
    const double y = coord(crng);
    centers.push_back({x, y});
  }
  auto rng = make_stream(seed, Stream::kRequests);
  std::uniform_int_distribution<int> pick(0, c - 1);
  std::normal_distribution<double> noise(0.0, sigma);
  auto draw = [&] {
    const Point& mu = centers[pick(rng)];
    const double x = mu.x + noise(rng);
    const double y = mu.y + noise(rng);
    return Point{x, y};
  };
  for (int i = 0; i < n; ++i) {
    const Point s = draw();
    const Point t = draw();
    inst.requests.push_back({i, s, t});
  }
  inst.meta = {{"generator", "gmm"}, {"n", n},         {"k", k},        {"h", h},
               {"c", c},             {"sigma", sigma}, {"decay", decay}, {"seed", seed}};
  normalize(inst);
  return inst;
}

// ---------------------------------------------------------------------------
// Speed levels
// ---------------------------------------------------------------------------

struct LevelPartition {
  std::vector<std::vector<int>> levels;  // depot indices, fastest level first
  std::vector<double> speeds;            // strictly decreasing
  std::vector<int> unused;               // co-located with a faster depot
  std::vector<int> level_of;             // depot index -> level, -1 if unused

  int h() const { return static_cast<int>(levels.size()); }
};

// Groups depots by speed. Among depots sharing a location only the first
// (fastest) one is kept.
inline LevelPartition level_partition(const Instance& inst) {
  LevelPartition lp;
  lp.level_of.assign(inst.k(), -1);
  std::map<Point, int> first_at;
  for (int j = 0; j < inst.k(); ++j) {
    const auto [it, inserted] = first_at.emplace(inst.depots[j].location, j);
    if (!inserted) {
      lp.unused.push_back(j);
      continue;
    }
    const double p = inst.depots[j].speed;
    if (lp.speeds.empty() || p < lp.speeds.back()) {
      lp.speeds.push_back(p);
      lp.levels.emplace_back();
    }
    lp.levels.back().push_back(j);
    lp.level_of[j] = lp.h() - 1;
  }
  return lp;
}

inline bool depots_colocated(const Instance& inst) {
  for (const Depot& d : inst.depots) {
    if (d.location != inst.depots.front().location) return false;
  }
  return true;
}

}  // namespace mscd
