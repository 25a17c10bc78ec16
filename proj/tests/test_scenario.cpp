#include <string>

#include "doctest.h"
#include "mobiloc/harness.hpp"
#include "mobiloc/scenario.hpp"

using namespace mobiloc;

namespace {

const char* kMinimal = R"(
[field]
width = 100
height = 100

[[node]]
id = 1
x = 50
y = 50
)";

}  // namespace

TEST_CASE("minimal scenario parses to one node") {
  const ScenarioConfig sc = parse_scenario(kMinimal);
  REQUIRE(sc.nodes.size() == 1);
  CHECK(sc.nodes[0].id == 1);
  CHECK(sc.nodes[0].position == Point2D{50, 50});
  CHECK(sc.obstacles.empty());
  CHECK(sc.field_width == 100.0);
  // defaults resolved: two power levels, R2 = 2 R1
  REQUIRE(sc.radio.level_ranges.size() == 2);
  CHECK(sc.radio.level_ranges[0] == 15.0);
  CHECK(sc.radio.level_ranges[1] == 30.0);
  CHECK(sc.trajectory.step == 15.0);
  CHECK(sc.contention.relay_range == 15.0);
}

TEST_CASE("node inside an obstacle is rejected by name") {
  const std::string text = std::string(kMinimal) + R"(
[[obstacle]]
vertices = [[40,40],[60,40],[60,60],[40,60]]
)";
  try {
    parse_scenario(text);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("node 1") != std::string::npos);
  }
}

TEST_CASE("hundred-node random deployment materializes valid nodes") {
  const char* text = R"(
[field]
width = 100
height = 100
random_nodes = 100
seed = 9

[radio]
level_ranges = [15, 30]
)";
  const ScenarioConfig sc = materialize_scenario(parse_scenario(text));
  REQUIRE(sc.nodes.size() == 100);
  CHECK(sc.random_nodes == 0);
  for (const auto& n : sc.nodes) {
    CHECK(n.position.x >= 0.0);
    CHECK(n.position.x <= 100.0);
    CHECK(n.position.y >= 0.0);
    CHECK(n.position.y <= 100.0);
    CHECK(n.num_neighbors.has_value());
  }
}

TEST_CASE("materialization rejects nodes in obstacles and is idempotent") {
  const char* text = R"(
[field]
width = 50
height = 50
random_nodes = 60
seed = 3

[[obstacle]]
vertices = [[10,10],[40,10],[40,40],[10,40]]
)";
  const ScenarioConfig once = materialize_scenario(parse_scenario(text));
  for (const auto& n : once.nodes) {
    CHECK_FALSE(point_strictly_inside(n.position, once.obstacles[0]));
  }
  const ScenarioConfig twice = materialize_scenario(once);
  CHECK(once == twice);
}

TEST_CASE("scenario round-trips through its text form") {
  ScenarioConfig sc = parse_scenario(kMinimal);
  sc.radio.doi = 0.25;
  sc.radio.fading_f = 0.05;
  sc.trajectory.pattern = TrajectoryPattern::random_waypoint;
  sc.trajectory.step = 12.5;
  sc.contention.alpha = 0.25;
  sc.contention.beta = 0.75;
  sc.seed = 123456789;
  sc.nodes[0].is_boundary = true;
  sc.nodes[0].used_energy = 0.125;
  sc.nodes[0].num_neighbors = 4;
  sc.obstacles.push_back(ObstaclePolygon{{{1, 1}, {2, 1}, {2, 2}, {1, 2}}});
  validate_scenario(sc);

  const ScenarioConfig back = parse_scenario(write_scenario(sc));
  CHECK(back == sc);
}

TEST_CASE("parse errors carry the line number") {
  const std::string bad = "[field]\nwidth = 100\nheight = = 2\n";
  try {
    parse_scenario(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scenario("[field]\nwidth = abc\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario("[field]\nmystery_key = 1\n"), ParseError);
}

TEST_CASE("config invariants are enforced") {
  // descending level ranges
  CHECK_THROWS_AS(parse_scenario("[radio]\nlevel_ranges = [30, 15]\n"), ValidationError);
  // doi out of range
  CHECK_THROWS_AS(parse_scenario("[radio]\ndoi = 1.0\n"), ValidationError);
  // node outside the field
  CHECK_THROWS_AS(parse_scenario("[field]\nwidth = 10\nheight = 10\n\n[[node]]\nid = 1\nx = 11\ny = 5\n"),
                  ValidationError);
  // contention weights must sum to one
  CHECK_THROWS_AS(parse_scenario("[contention]\nalpha = 0.5\nbeta = 0.6\n"), ValidationError);
  // duplicate node ids
  CHECK_THROWS_AS(
      parse_scenario("[[node]]\nid = 1\nx = 1\ny = 1\n\n[[node]]\nid = 1\nx = 2\ny = 2\n"),
      ValidationError);
}

TEST_CASE("alpha and beta renormalize from near-one sums") {
  const ScenarioConfig sc = parse_scenario("[contention]\nalpha = 0.3\nbeta = 0.7\n");
  CHECK(sc.contention.alpha + sc.contention.beta == 1.0);
}
