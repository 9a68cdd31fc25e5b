#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "mscd/errors.hpp"
#include "mscd/geometry.hpp"
#include "mscd/instance.hpp"
#include "mscd/routing.hpp"

namespace mscd {

// One carry: the drone picks up `request` at u at time t and drops it at w.
struct Triple {
  int request = 0;  // request index
  Point u;
  Point w;
  double t = 0.0;
};

// Per-drone triple lists, indexed like Instance::depots and ordered by time.
struct PreemptiveSchedule {
  std::vector<std::vector<Triple>> drones;
};

// Sum over drones of the finishing time of their last carry.
inline double schedule_cost(const PreemptiveSchedule& s, const Instance& inst) {
  double sum = 0.0;
  for (int j = 0; j < static_cast<int>(s.drones.size()); ++j) {
    if (s.drones[j].empty()) continue;
    const Triple& last = s.drones[j].back();
    sum += last.t + dist(last.u, last.w) / inst.depots[j].speed;
  }
  return sum;
}

// Problems with a schedule; empty when it is feasible.
inline std::vector<std::string> check_schedule(const PreemptiveSchedule& s, const Instance& inst,
                                               double slack = 1e-9) {
  std::vector<std::string> issues;
  if (static_cast<int>(s.drones.size()) != inst.k()) {
    issues.push_back("schedule must list one triple sequence per depot");
    return issues;
  }
  struct Carry {
    double pick;
    double drop;
    Point u;
    Point w;
  };
  std::vector<std::vector<Carry>> chains(inst.m());
  for (int j = 0; j < inst.k(); ++j) {
    const double p = inst.depots[j].speed;
    Point at = inst.depots[j].location;
    double ready = 0.0;
    for (const Triple& tr : s.drones[j]) {
      if (tr.request < 0 || tr.request >= inst.m()) {
        issues.push_back("triple references an unknown request");
        continue;
      }
      const double arrive = ready + dist(at, tr.u) / p;
      if (tr.t + slack * std::max(1.0, arrive) < arrive)
        issues.push_back("drone " + std::to_string(inst.depots[j].id) + " picks up too early");
      const double drop = tr.t + dist(tr.u, tr.w) / p;
      chains[tr.request].push_back({tr.t, drop, tr.u, tr.w});
      ready = drop;
      at = tr.w;
    }
  }
  for (int i = 0; i < inst.m(); ++i) {
    auto& c = chains[i];
    const std::string name = "package " + std::to_string(inst.requests[i].id);
    if (c.empty()) {
      issues.push_back(name + " is never carried");
      continue;
    }
    std::stable_sort(c.begin(), c.end(), [](const Carry& a, const Carry& b) { return a.pick < b.pick; });
    if (c.front().u != inst.requests[i].source) issues.push_back(name + " does not start at its source");
    if (c.back().w != inst.requests[i].target) issues.push_back(name + " does not end at its target");
    for (std::size_t k = 1; k < c.size(); ++k) {
      if (c[k].u != c[k - 1].w) issues.push_back(name + " is picked up where it was not dropped");
      if (c[k].pick + slack * std::max(1.0, c[k - 1].drop) < c[k - 1].drop)
        issues.push_back(name + " is picked up before it was dropped");
    }
  }
  return issues;
}

// Fastest drone first, each drone takes over every package it carries that no
// faster drone has taken, in the order of its first pickup, and delivers it
// directly. Drones left with no package get no route.
inline Solution preemptive_to_nonpreemptive(const PreemptiveSchedule& s, const Instance& inst) {
  const auto issues = check_schedule(s, inst);
  if (!issues.empty()) throw InfeasibleInput("preemptive schedule: " + issues.front());
  std::vector<char> adopted(inst.m(), 0);
  Solution sol;
  for (int j = 0; j < inst.k(); ++j) {
    std::vector<int> order;
    for (const Triple& tr : s.drones[j]) {
      if (adopted[tr.request]) continue;
      adopted[tr.request] = 1;
      order.push_back(tr.request);
    }
    sol.routes.push_back(make_route(inst, j, std::move(order)));
  }
  finalize(sol);
  sol.algorithm = "preemptive-transform";
  return sol;
}

// Random feasible schedule: every package travels a relay chain of up to
// `max_legs` carries through random waypoints, each carry by a random drone.
// Carries are timed greedily in a random global order that respects both the
// chains and each drone's sequence, so waiting occurs naturally.
template <typename Rng>
PreemptiveSchedule random_schedule(const Instance& inst, int max_legs, Rng& rng) {
  std::uniform_int_distribution<int> legs_dist(1, std::max(1, max_legs));
  std::uniform_int_distribution<int> drone_dist(0, inst.k() - 1);
  std::uniform_real_distribution<double> coord(0.0, kGridSize);
  struct Leg {
    int request;
    int drone;
    Point u;
    Point w;
  };
  std::vector<std::vector<Leg>> chains(inst.m());
  for (int i = 0; i < inst.m(); ++i) {
    const int legs = legs_dist(rng);
    std::vector<Point> stops{inst.requests[i].source};
    for (int k = 1; k < legs; ++k) {
      const double x = coord(rng);
      const double y = coord(rng);
      stops.push_back({x, y});
    }
    stops.push_back(inst.requests[i].target);
    for (int k = 0; k < legs; ++k) chains[i].push_back({i, drone_dist(rng), stops[k], stops[k + 1]});
  }
  std::vector<int> pool;
  for (int i = 0; i < inst.m(); ++i) {
    for (std::size_t k = 0; k < chains[i].size(); ++k) pool.push_back(i);
  }
  std::shuffle(pool.begin(), pool.end(), rng);

  PreemptiveSchedule s;
  s.drones.assign(inst.k(), {});
  std::vector<std::size_t> next_leg(inst.m(), 0);
  std::vector<double> package_ready(inst.m(), 0.0);
  std::vector<double> drone_ready(inst.k(), 0.0);
  std::vector<Point> drone_at;
  for (const Depot& d : inst.depots) drone_at.push_back(d.location);
  for (int i : pool) {
    const Leg& leg = chains[i][next_leg[i]++];
    const int j = leg.drone;
    const double p = inst.depots[j].speed;
    const double t = std::max(drone_ready[j] + dist(drone_at[j], leg.u) / p, package_ready[i]);
    s.drones[j].push_back({i, leg.u, leg.w, t});
    drone_ready[j] = t + dist(leg.u, leg.w) / p;
    drone_at[j] = leg.w;
    package_ready[i] = drone_ready[j];
  }
  return s;
}

inline nlohmann::json schedule_to_json(const PreemptiveSchedule& s, const Instance& inst) {
  nlohmann::json j;
  j["drones"] = nlohmann::json::array();
  for (int d = 0; d < static_cast<int>(s.drones.size()); ++d) {
    nlohmann::json triples = nlohmann::json::array();
    for (const Triple& tr : s.drones[d]) {
      triples.push_back({{"request_id", inst.requests[tr.request].id},
                         {"ux", tr.u.x},
                         {"uy", tr.u.y},
                         {"wx", tr.w.x},
                         {"wy", tr.w.y},
                         {"t", tr.t}});
    }
    j["drones"].push_back({{"depot_id", inst.depots[d].id}, {"triples", std::move(triples)}});
  }
  return j;
}

inline PreemptiveSchedule schedule_from_json(const nlohmann::json& j, const Instance& inst) {
  std::map<int, int> depot_index, request_index;
  for (int d = 0; d < inst.k(); ++d) depot_index[inst.depots[d].id] = d;
  for (int i = 0; i < inst.m(); ++i) request_index[inst.requests[i].id] = i;
  PreemptiveSchedule s;
  s.drones.assign(inst.k(), {});
  try {
    for (const auto& jd : j.at("drones")) {
      const auto it = depot_index.find(jd.at("depot_id").get<int>());
      if (it == depot_index.end()) throw ParseError("schedule: unknown depot id");
      for (const auto& jt : jd.at("triples")) {
        const auto rit = request_index.find(jt.at("request_id").get<int>());
        if (rit == request_index.end()) throw ParseError("schedule: unknown request id");
        s.drones[it->second].push_back({rit->second,
                                        {jt.at("ux").get<double>(), jt.at("uy").get<double>()},
                                        {jt.at("wx").get<double>(), jt.at("wy").get<double>()},
                                        jt.at("t").get<double>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schedule: ") + e.what());
  }
  for (auto& d : s.drones) {
    std::stable_sort(d.begin(), d.end(), [](const Triple& a, const Triple& b) { return a.t < b.t; });
  }
  return s;
}

}  // namespace mscd
