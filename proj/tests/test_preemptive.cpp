#include <gtest/gtest.h>

#include <random>

#include "mscd/preemptive.hpp"

using namespace mscd;

namespace {

Instance make(std::vector<Depot> depots, std::vector<std::pair<Point, Point>> reqs) {
  Instance inst;
  inst.depots = std::move(depots);
  for (int i = 0; i < static_cast<int>(reqs.size()); ++i) inst.requests.push_back({i, reqs[i].first, reqs[i].second});
  normalize(inst);
  return inst;
}

}  // namespace

TEST(Preemptive, TwoDroneRelay) {
  // Fast drone at (2,0), slow drone at the source (0,0).
  const Instance inst = make({{0, {2, 0}, 2.0}, {1, {0, 0}, 1.0}}, {{{0, 0}, {6, 0}}});
  PreemptiveSchedule s;
  s.drones = {{{0, {2, 0}, {6, 0}, 2.0}}, {{0, {0, 0}, {2, 0}, 0.0}}};
  ASSERT_TRUE(check_schedule(s, inst).empty());
  EXPECT_DOUBLE_EQ(schedule_cost(s, inst), 2.0 + 4.0);

  const Solution sol = preemptive_to_nonpreemptive(s, inst);
  EXPECT_TRUE(evaluate(sol, inst).feasible);
  ASSERT_EQ(sol.routes.size(), 1u);
  EXPECT_EQ(sol.routes[0].depot, 0);
  // (2,0) -> (0,0) -> (6,0) at speed 2.
  EXPECT_DOUBLE_EQ(sol.total_cost, 8.0 / 2.0);
  EXPECT_LE(sol.total_cost, 3.0 * schedule_cost(s, inst));
}

TEST(Preemptive, NonPreemptiveInputKeepsItsCost) {
  const Instance inst = make({{0, {0, 0}, 1.0}}, {{{1, 0}, {2, 0}}, {{3, 0}, {4, 0}}});
  PreemptiveSchedule s;
  s.drones = {{{0, {1, 0}, {2, 0}, 1.0}, {1, {3, 0}, {4, 0}, 3.0}}};
  ASSERT_TRUE(check_schedule(s, inst).empty());
  const Solution sol = preemptive_to_nonpreemptive(s, inst);
  EXPECT_DOUBLE_EQ(sol.total_cost, schedule_cost(s, inst));
}

TEST(Preemptive, ThreeDroneChain) {
  // Three drones pass one package along, and a second package is carried
  // by the slowest drone alone.
  const Instance inst = make({{0, {10, 0}, 4.0}, {1, {5, 0}, 2.0}, {2, {0, 0}, 1.0}},
                             {{{0, 0}, {15, 0}}, {{0, 5}, {0, 8}}});
  std::mt19937_64 rng(1);
  PreemptiveSchedule s;
  s.drones.assign(3, {});
  s.drones[2] = {{0, {0, 0}, {5, 0}, 0.0}, {1, {0, 5}, {0, 8}, 5.0 + dist({5, 0}, {0, 5})}};
  s.drones[1] = {{0, {5, 0}, {10, 0}, 5.0}};
  s.drones[0] = {{0, {10, 0}, {15, 0}, 7.5}};
  ASSERT_TRUE(check_schedule(s, inst).empty());
  const Solution sol = preemptive_to_nonpreemptive(s, inst);
  EXPECT_TRUE(evaluate(sol, inst).feasible);
  EXPECT_LE(sol.total_cost, 3.0 * schedule_cost(s, inst));
}

TEST(Preemptive, RandomSchedulesWithinThreeTimes) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 1 + rep % 3;
    const Instance inst = gen_uniform(1 + rep % 4, k, 1 + rep % k, 5.0, rep + 1);
    const PreemptiveSchedule s = random_schedule(inst, 3, rng);
    ASSERT_TRUE(check_schedule(s, inst).empty()) << rep;
    const Solution sol = preemptive_to_nonpreemptive(s, inst);
    EXPECT_TRUE(evaluate(sol, inst).feasible);
    EXPECT_LE(sol.total_cost, 3.0 * schedule_cost(s, inst) * (1 + 1e-12)) << rep;
  }
}

TEST(Preemptive, RejectsInfeasibleSchedules) {
  const Instance inst = make({{0, {0, 0}, 1.0}, {1, {9, 9}, 0.5}}, {{{1, 0}, {5, 0}}});
  PreemptiveSchedule early;
  early.drones = {{{0, {1, 0}, {5, 0}, 0.5}}, {}};
  EXPECT_FALSE(check_schedule(early, inst).empty());
  EXPECT_THROW(preemptive_to_nonpreemptive(early, inst), InfeasibleInput);

  PreemptiveSchedule gap;
  gap.drones = {{{0, {1, 0}, {3, 0}, 1.0}, {0, {4, 0}, {5, 0}, 4.0}}, {}};
  EXPECT_FALSE(check_schedule(gap, inst).empty());

  PreemptiveSchedule missing;
  missing.drones = {{}, {}};
  EXPECT_FALSE(check_schedule(missing, inst).empty());

  PreemptiveSchedule handoff_too_soon;
  handoff_too_soon.drones = {{{0, {3, 0}, {5, 0}, 3.0}}, {{0, {1, 0}, {3, 0}, dist({9, 9}, {1, 0}) / 0.5}}};
  EXPECT_FALSE(check_schedule(handoff_too_soon, inst).empty());

  PreemptiveSchedule wrong_size;
  wrong_size.drones = {{}};
  EXPECT_FALSE(check_schedule(wrong_size, inst).empty());
}

TEST(Preemptive, JsonRoundTrip) {
  std::mt19937_64 rng(4);
  const Instance inst = gen_uniform(4, 3, 2, 5.0, 8);
  const PreemptiveSchedule s = random_schedule(inst, 3, rng);
  const PreemptiveSchedule back = schedule_from_json(schedule_to_json(s, inst), inst);
  ASSERT_EQ(back.drones.size(), s.drones.size());
  for (std::size_t j = 0; j < s.drones.size(); ++j) {
    ASSERT_EQ(back.drones[j].size(), s.drones[j].size());
    for (std::size_t q = 0; q < s.drones[j].size(); ++q) {
      EXPECT_EQ(back.drones[j][q].request, s.drones[j][q].request);
      EXPECT_EQ(back.drones[j][q].u, s.drones[j][q].u);
      EXPECT_EQ(back.drones[j][q].t, s.drones[j][q].t);
    }
  }
}
