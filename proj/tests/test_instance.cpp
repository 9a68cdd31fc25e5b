#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "mscd/instance.hpp"
#include "mscd/instance_io.hpp"

using namespace mscd;
namespace fs = std::filesystem;

#ifndef MSCD_FIXTURES_DIR
#define MSCD_FIXTURES_DIR "tests/fixtures"
#endif

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mscd_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(WorstCase, PlacementsForTwoRequests) {
  const Instance inst = gen_worst_case(2, 1.0, 1000.0, 0.01);
  ASSERT_EQ(inst.k(), 2);
  // Fastest first after normalisation.
  EXPECT_EQ(inst.depots[0].id, 1);
  EXPECT_DOUBLE_EQ(inst.depots[0].speed, 1000.0);
  EXPECT_NEAR(inst.depots[0].location.x, -2010.0, 1e-9);
  EXPECT_EQ(inst.depots[1].id, 0);
  EXPECT_DOUBLE_EQ(inst.depots[1].speed, 1.0);
  EXPECT_EQ(inst.depots[1].location, (Point{-2.0, 0.0}));
  ASSERT_EQ(inst.m(), 2);
  EXPECT_EQ(inst.requests[0].source, (Point{0.0, 0.0}));
  EXPECT_EQ(inst.requests[1].source, (Point{2.0, 0.0}));
  for (const Request& r : inst.requests) EXPECT_EQ(r.source, r.target);
}

TEST(WorstCase, FormulasHoldCoordinateByCoordinate) {
  const int n = 37;
  const double v1 = 2.5, alpha = 40.0, eps = 0.3;
  const Instance inst = gen_worst_case(n, v1, alpha, eps);
  const double v2 = alpha * v1;
  EXPECT_DOUBLE_EQ(inst.depots[1].location.x, -n * v1);
  EXPECT_NEAR(inst.depots[0].location.x, -(n + eps) * v2, 1e-9);
  for (int i = 1; i <= n; ++i) {
    EXPECT_DOUBLE_EQ(inst.requests[i - 1].source.x, (i - 1) * n * v1);
    EXPECT_DOUBLE_EQ(inst.requests[i - 1].source.y, 0.0);
  }
}

TEST(WorstCase, InvalidParameters) {
  EXPECT_THROW(gen_worst_case(0), InvalidParam);
  EXPECT_THROW(gen_worst_case(5, 1.0, 1.0), InvalidParam);
  EXPECT_THROW(gen_worst_case(5, 1.0, 10.0, 0.0), InvalidParam);
}

TEST(Uniform, DeterministicAndInRange) {
  const Instance a = gen_uniform(500, 30, 3, 5.0, 42);
  const Instance b = gen_uniform(500, 30, 3, 5.0, 42);
  ASSERT_EQ(a.m(), 500);
  ASSERT_EQ(a.k(), 30);
  for (int i = 0; i < a.m(); ++i) {
    EXPECT_EQ(a.requests[i].source, b.requests[i].source);
    EXPECT_EQ(a.requests[i].target, b.requests[i].target);
    for (const Point& p : {a.requests[i].source, a.requests[i].target}) {
      EXPECT_GE(p.x, 0.0);
      EXPECT_LE(p.x, 100.0);
      EXPECT_GE(p.y, 0.0);
      EXPECT_LE(p.y, 100.0);
    }
  }
  const Instance c = gen_uniform(500, 30, 3, 5.0, 43);
  EXPECT_NE(a.requests[0].source, c.requests[0].source);
}

TEST(Uniform, TableDefaultsGiveThreeBalancedLevels) {
  const Instance inst = gen_uniform(10000, 30, 3, 5.0, 1);
  EXPECT_EQ(inst.m(), 10000);
  const LevelPartition lp = level_partition(inst);
  ASSERT_EQ(lp.h(), 3);
  EXPECT_DOUBLE_EQ(lp.speeds[0], 1.0);
  EXPECT_DOUBLE_EQ(lp.speeds[1], 0.2);
  EXPECT_DOUBLE_EQ(lp.speeds[2], 0.04);
  for (const auto& level : lp.levels) EXPECT_EQ(level.size(), 10u);
  for (int j = 1; j < inst.k(); ++j) EXPECT_GE(inst.depots[j - 1].speed, inst.depots[j].speed);
}

TEST(Uniform, DepotCountDoesNotMoveRequests) {
  const Instance a = gen_uniform(50, 3, 1, 5.0, 9);
  const Instance b = gen_uniform(50, 12, 4, 5.0, 9);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(a.requests[i].source, b.requests[i].source);
}

TEST(Uniform, InvalidLevels) {
  EXPECT_THROW(gen_uniform(10, 2, 3, 5.0, 1), InvalidParam);
  EXPECT_THROW(gen_uniform(10, 2, 0, 5.0, 1), InvalidParam);
  EXPECT_THROW(gen_uniform(10, 2, 1, 1.0, 1), InvalidParam);
}

TEST(Gmm, DeterministicAndCollapsesForTinySigma) {
  const Instance a = gen_gmm(100, 6, 2, 1, 1e-9, 5.0, 3);
  const Instance b = gen_gmm(100, 6, 2, 1, 1e-9, 5.0, 3);
  const Point c = a.requests[0].source;
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.requests[i].target, b.requests[i].target);
    EXPECT_LT(dist(a.requests[i].source, c), 1e-6);
    EXPECT_LT(dist(a.requests[i].target, c), 1e-6);
  }
}

TEST(Gmm, PerClusterSpreadMatchesSigma) {
  const double sigma = 2.0;
  const std::uint64_t seed = 7;
  const Instance inst = gen_gmm(300, 3, 1, 3, sigma, 5.0, seed);
  // Cluster centres follow the published stream discipline.
  auto rng = make_stream(seed, Stream::kClusters);
  std::uniform_real_distribution<double> coord(0.0, kGridSize);
  std::vector<Point> centers;
  for (int q = 0; q < 3; ++q) {
    const double x = coord(rng);
    const double y = coord(rng);
    centers.push_back({x, y});
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) ASSERT_GT(dist(centers[a], centers[b]), 10 * sigma);
  }
  std::vector<std::vector<Point>> members(3);
  for (const Request& r : inst.requests) {
    for (const Point& p : {r.source, r.target}) {
      int best = 0;
      for (int q = 1; q < 3; ++q) {
        if (dist(p, centers[q]) < dist(p, centers[best])) best = q;
      }
      members[best].push_back(p);
    }
  }
  for (int q = 0; q < 3; ++q) {
    ASSERT_GT(members[q].size(), 50u);
    double sx = 0, sy = 0;
    for (const Point& p : members[q]) {
      sx += (p.x - centers[q].x) * (p.x - centers[q].x);
      sy += (p.y - centers[q].y) * (p.y - centers[q].y);
    }
    const double n = static_cast<double>(members[q].size());
    EXPECT_NEAR(std::sqrt(sx / n), sigma, 0.25 * sigma);
    EXPECT_NEAR(std::sqrt(sy / n), sigma, 0.25 * sigma);
  }
}

TEST(Levels, GroupsBySpeed) {
  Instance inst;
  inst.depots = {{0, {0, 0}, 2.0}, {1, {1, 0}, 2.0}, {2, {2, 0}, 1.0}};
  normalize(inst);
  const LevelPartition lp = level_partition(inst);
  ASSERT_EQ(lp.h(), 2);
  EXPECT_EQ(lp.levels[0].size(), 2u);
  EXPECT_EQ(lp.levels[1].size(), 1u);
}

TEST(Levels, EqualSpeedsAreOneLevel) {
  Instance inst;
  inst.depots = {{0, {0, 0}, 1.0}, {1, {1, 0}, 1.0}, {2, {2, 0}, 1.0}};
  normalize(inst);
  EXPECT_EQ(level_partition(inst).h(), 1);
}

TEST(Levels, ColocatedSlowerDepotIsUnused) {
  Instance inst;
  inst.depots = {{0, {5, 5}, 1.0}, {1, {5, 5}, 3.0}};
  normalize(inst);
  const LevelPartition lp = level_partition(inst);
  EXPECT_EQ(lp.h(), 1);
  ASSERT_EQ(lp.unused.size(), 1u);
  EXPECT_EQ(inst.depots[lp.unused[0]].id, 0);
  EXPECT_EQ(lp.level_of[lp.unused[0]], -1);
}

TEST(Normalize, RejectsBrokenInstances) {
  Instance empty;
  EXPECT_THROW(normalize(empty), InvalidParam);
  Instance bad_speed;
  bad_speed.depots = {{0, {0, 0}, 0.0}};
  EXPECT_THROW(normalize(bad_speed), InvalidParam);
  Instance dup;
  dup.depots = {{0, {0, 0}, 1.0}, {0, {1, 1}, 1.0}};
  EXPECT_THROW(normalize(dup), InvalidParam);
  Instance dup_req;
  dup_req.depots = {{0, {0, 0}, 1.0}};
  dup_req.requests = {{4, {0, 0}, {1, 1}}, {4, {2, 2}, {1, 1}}};
  EXPECT_THROW(normalize(dup_req), InvalidParam);
}

TEST(JsonIo, RoundTripIsBitIdentical) {
  const Instance inst = gen_gmm(40, 5, 2, 2, 3.3, 5.0, 12);
  const fs::path dir = scratch_dir("json");
  save_instance(inst, dir / "i.json");
  const Instance back = load_instance(dir / "i.json");
  ASSERT_EQ(back.k(), inst.k());
  ASSERT_EQ(back.m(), inst.m());
  for (int j = 0; j < inst.k(); ++j) {
    EXPECT_EQ(back.depots[j].id, inst.depots[j].id);
    EXPECT_EQ(back.depots[j].location, inst.depots[j].location);
    EXPECT_EQ(back.depots[j].speed, inst.depots[j].speed);
  }
  for (int i = 0; i < inst.m(); ++i) {
    EXPECT_EQ(back.requests[i].source, inst.requests[i].source);
    EXPECT_EQ(back.requests[i].target, inst.requests[i].target);
  }
  EXPECT_EQ(back.meta, inst.meta);
}

TEST(JsonIo, TwoDepotsOneRequest) {
  const auto j = nlohmann::json::parse(R"({
    "depots": [{"id": 1, "x": 0, "y": 0, "speed": 1}, {"id": 2, "x": 3, "y": 1, "speed": 4}],
    "requests": [{"id": 5, "sx": 1, "sy": 2, "tx": 3, "ty": 4}],
    "meta": {}})");
  const Instance inst = instance_from_json(j);
  EXPECT_EQ(inst.k(), 2);
  EXPECT_EQ(inst.depots[0].id, 2);
  EXPECT_EQ(inst.m(), 1);
}

TEST(JsonIo, MalformedInputs) {
  EXPECT_THROW(instance_from_json(nlohmann::json::parse(R"({"depots": []})")), InvalidParam);
  EXPECT_THROW(instance_from_json(nlohmann::json::parse(R"({"requests": []})")), ParseError);
  EXPECT_THROW(instance_from_json(nlohmann::json::parse(R"({"depots": [{"id": 1}]})")), ParseError);
  EXPECT_THROW(instance_from_json(nlohmann::json::parse(R"([1, 2])")), ParseError);
  EXPECT_THROW(parse_json_text("{not json", "x"), ParseError);
  EXPECT_THROW(load_instance("/nonexistent/instance.json"), ParseError);
}

TEST(CourierCsv, FixtureLoads) {
  const Instance inst = load_instance(fs::path(MSCD_FIXTURES_DIR) / "courier", InstanceFormat::kCourierCsv);
  EXPECT_EQ(inst.k(), 3);
  EXPECT_EQ(inst.m(), 5);
  EXPECT_EQ(inst.depots[0].id, 3);  // fastest first
  // Latitude maps to y, longitude to x.
  EXPECT_DOUBLE_EQ(inst.depots[0].location.y, 45.20);
  EXPECT_DOUBLE_EQ(inst.depots[0].location.x, 126.60);
  EXPECT_DOUBLE_EQ(inst.requests[4].source.y, 45.14);  // quoted fields
  EXPECT_EQ(inst.requests[2].source, inst.requests[2].target);
}

TEST(CourierCsv, MalformedRowsAreParseErrors) {
  const fs::path dir = scratch_dir("csv");
  write_text_file(dir / "depots.csv", "id,lat,lng,speed\n1,45.0,126.0,1.0\n");
  write_text_file(dir / "orders.csv",
                  "id,pickup_lat,pickup_lng,dropoff_lat,dropoff_lng\n1,45.0,abc,45.1,126.1\n");
  EXPECT_THROW(load_courier_csv(dir), ParseError);
  write_text_file(dir / "orders.csv", "id,pickup_lat,pickup_lng,dropoff_lat,dropoff_lng\n1,45.0,126.0\n");
  EXPECT_THROW(load_courier_csv(dir), ParseError);
  write_text_file(dir / "orders.csv", "id,pickup_lat,dropoff_lat,dropoff_lng\n1,45.0,45.1,126.1\n");
  EXPECT_THROW(load_courier_csv(dir), ParseError);
  write_text_file(dir / "depots.csv", "id,lat,lng,speed\n");
  write_text_file(dir / "orders.csv", "id,pickup_lat,pickup_lng,dropoff_lat,dropoff_lng\n");
  EXPECT_THROW(load_courier_csv(dir), InvalidParam);
  EXPECT_THROW(parse_instance_format("xml"), InvalidParam);
}
