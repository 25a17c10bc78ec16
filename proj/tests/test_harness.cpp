#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "mobiloc/harness.hpp"

using namespace mobiloc;

namespace {

AnnulusConstraint annulus(double cx, double cy, double lo, std::optional<double> up) {
  AnnulusConstraint c;
  c.center = {cx, cy};
  c.lower = lo;
  c.upper = up;
  return c;
}

ScenarioConfig small_ideal(int nodes, std::uint64_t seed, double step) {
  ScenarioConfig sc;
  sc.field_width = 100.0;
  sc.field_height = 100.0;
  sc.random_nodes = nodes;
  sc.seed = seed;
  sc.trajectory.pattern = TrajectoryPattern::grid_sweep;
  sc.trajectory.step = step;
  resolve_scenario_defaults(sc);
  return sc;
}

struct PairedStats {
  double z = 0.0;
  double mean_diff = 0.0;
};

// z-statistic of mean(errors_a - errors_b); negative means a is better
PairedStats paired_z(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() >= 2);
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(a.size());
  double var = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(a.size() - 1);
  const double se = std::sqrt(var / static_cast<double>(a.size()));
  PairedStats st;
  st.mean_diff = mean;
  st.z = se == 0.0 ? 0.0 : mean / se;
  return st;
}

const char* kExperimentText = R"(
[field]
width = 100
height = 100

[radio]
doi = 0.05
fading_f = 0.02

[trajectory]
pattern = grid_sweep
step = 20

[[node]]
id = 1
x = 50
y = 50

[experiment]
doi = [0, 0.1, 0.2]
fading_f = [0, 0.1]
relay = [on, off]
estimator = [convex, baseline]
step = [15, 7.5]
trials = 4
base_seed = 11
)";

}  // namespace

TEST_CASE("normalized error averages distances in radio ranges") {
  const std::vector<Point2D> truths = {{0, 0}, {10, 0}};
  const std::vector<Point2D> ests = {{3, 0}, {10, 1.5}};
  CHECK(normalized_error(truths, ests, 15.0) == doctest::Approx(0.15));
  CHECK(normalized_error(truths, truths, 15.0) == doctest::Approx(0.0));
  CHECK(normalized_error({{0, 0}}, {{15, 0}}, 15.0) == doctest::Approx(1.0));
  CHECK_FALSE(normalized_error({}, {}, 15.0).has_value());
  CHECK_THROWS_AS(normalized_error(truths, {{0, 0}}, 15.0), ValidationError);
  CHECK_THROWS_AS(normalized_error(truths, ests, 0.0), ValidationError);
}

TEST_CASE("baseline estimate is the feasible-region centroid") {
  SUBCASE("single disk centers on the anchor") {
    const Point2D est = baseline_estimate({annulus(20, 20, 0.0, 15.0)});
    CHECK(distance(est, {20, 20}) < 0.3);
  }

  SUBCASE("two overlapping disks center on the lens") {
    const Point2D est = baseline_estimate(
        {annulus(40, 50, 0.0, 10.0), annulus(52, 50, 0.0, 10.0)});
    CHECK(est.x == doctest::Approx(46.0).epsilon(0.01));
    CHECK(std::abs(est.y - 50.0) < 0.3);
  }

  SUBCASE("disjoint disks fall back to least violation") {
    // every point on the inter-disk segment ties, so the centroid is the middle
    const Point2D est = baseline_estimate(
        {annulus(0, 0, 0.0, 1.0), annulus(10, 0, 0.0, 1.0)});
    CHECK(est.x == doctest::Approx(5.0).epsilon(0.02));
    CHECK(std::abs(est.y) < 0.6);
  }
}

TEST_CASE("trials are deterministic in the scenario seed") {
  const ScenarioConfig sc = small_ideal(12, 3, 15.0);
  const TrialResult a = run_trial(sc);
  const TrialResult b = run_trial(sc);
  REQUIRE(a.nodes.size() == b.nodes.size());
  REQUIRE(a.error.has_value());
  CHECK(*a.error == *b.error);  // bitwise: same seeds, same arithmetic
  CHECK(a.localized_fraction == b.localized_fraction);
  CHECK(a.mean_constraints == b.mean_constraints);
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].node_id == b.nodes[i].node_id);
    CHECK(a.nodes[i].truth == b.nodes[i].truth);
    CHECK(a.nodes[i].estimate == b.nodes[i].estimate);
    CHECK(a.nodes[i].status == b.nodes[i].status);
  }

  ScenarioConfig other = sc;
  other.seed = 4;
  const TrialResult c = run_trial(other);
  REQUIRE(c.error.has_value());
  CHECK(*a.error != *c.error);
}

TEST_CASE("trial detail is internally consistent") {
  const ScenarioConfig sc = small_ideal(10, 7, 15.0);
  const TrialDetail detail = run_trial_detailed(sc);
  CHECK(detail.materialized.random_nodes == 0);
  CHECK(detail.materialized.nodes.size() == 10);
  CHECK_FALSE(detail.stops.empty());
  for (const auto& node : detail.result.nodes) {
    const auto it = detail.constraints.find(node.node_id);
    const int count = it == detail.constraints.end() ? 0 : static_cast<int>(it->second.size());
    CHECK(node.constraint_count == count);
    CHECK(node.estimate.has_value() == (count > 0));
    if (count == 0) CHECK(node.status == "not_localized");
  }
}

TEST_CASE("a dense ideal sweep localizes every node accurately") {
  const ScenarioConfig sc = small_ideal(20, 5, 7.5);
  const TrialResult res = run_trial(sc);
  CHECK(res.localized_fraction == doctest::Approx(1.0));
  REQUIRE(res.error.has_value());
  CHECK(*res.error < 0.5);
  CHECK(res.mean_constraints > 1.0);
}

TEST_CASE("nodes out of radio reach are reported, not estimated") {
  ScenarioConfig sc;
  sc.field_width = 200.0;
  sc.field_height = 200.0;
  SensorNode node;
  node.id = 1;
  node.position = {150, 150};
  sc.nodes = {node};
  sc.trajectory.pattern = TrajectoryPattern::explicit_points;
  sc.trajectory.explicit_points = {{0, 0}};
  resolve_scenario_defaults(sc);

  const TrialResult res = run_trial(sc);
  CHECK(res.localized_fraction == 0.0);
  CHECK_FALSE(res.error.has_value());
  REQUIRE(res.nodes.size() == 1);
  CHECK(res.nodes[0].status == "not_localized");
  CHECK(res.nodes[0].constraint_count == 0);
}

TEST_CASE("experiment parsing fills axes and defaults") {
  const ExperimentConfig cfg = parse_experiment(kExperimentText);
  CHECK(cfg.doi_values == std::vector<double>{0.0, 0.1, 0.2});
  CHECK(cfg.fading_values == std::vector<double>{0.0, 0.1});
  CHECK(cfg.relay_values == std::vector<bool>{true, false});
  REQUIRE(cfg.estimators.size() == 2);
  CHECK(cfg.estimators[0] == Estimator::convex);
  CHECK(cfg.estimators[1] == Estimator::baseline);
  CHECK(cfg.step_values == std::vector<double>{15.0, 7.5});
  CHECK(cfg.trials_per_point == 4);
  CHECK(cfg.base_seed == 11);

  // a bare scenario is a one-point experiment at its own settings
  const char* bare = R"(
[field]
width = 50
height = 50
seed = 6

[radio]
doi = 0.15

[trajectory]
step = 10

[[node]]
id = 1
x = 25
y = 25
)";
  const ExperimentConfig single = parse_experiment(bare);
  CHECK(single.doi_values == std::vector<double>{0.15});
  CHECK(single.fading_values == std::vector<double>{0.0});
  CHECK(single.relay_values == std::vector<bool>{true});
  CHECK(single.step_values == std::vector<double>{10.0});
  CHECK(single.trials_per_point == 1);
  CHECK(single.base_seed == 6);
  CHECK(enumerate_sweep_points(single).size() == 1);
}

TEST_CASE("experiment parsing rejects malformed input") {
  const std::string scenario = R"(
[field]
width = 50
height = 50

[[node]]
id = 1
x = 25
y = 25
)";
  auto with = [&](const std::string& line) {
    return scenario + "\n[experiment]\n" + line + "\n";
  };
  CHECK_THROWS_AS(parse_experiment(with("mystery = 1")), ParseError);
  CHECK_THROWS_AS(parse_experiment(with("relay = [sometimes]")), ParseError);
  CHECK_THROWS_AS(parse_experiment(with("doi = 0.1")), ParseError);  // lists are bracketed
  CHECK_THROWS_AS(parse_experiment(with("trials = 0")), ValidationError);
  CHECK_THROWS_AS(parse_experiment(with("doi = [1.0]")), ValidationError);
  CHECK_THROWS_AS(parse_experiment(with("step = [0]")), ValidationError);
}

TEST_CASE("sweep points enumerate the cartesian product with stable names") {
  const ExperimentConfig cfg = parse_experiment(kExperimentText);
  const auto points = enumerate_sweep_points(cfg);
  REQUIRE(points.size() == 3 * 2 * 2 * 2 * 2);
  CHECK(points.front().name == "doi0_f0_relay_on_convex_step15");
  CHECK(points.back().name == "doi0.2_f0.1_relay_off_baseline_step7.5");
  // doi is the slowest axis, step the fastest
  CHECK(points[0].step == 15.0);
  CHECK(points[1].step == 7.5);
  CHECK(points[0].estimator == Estimator::convex);
  CHECK(points[2].estimator == Estimator::baseline);
}

TEST_CASE("a singleton sweep point reproduces run_trial") {
  ExperimentConfig cfg;
  cfg.base = small_ideal(10, 0, 15.0);
  cfg.doi_values = {0.0};
  cfg.fading_values = {0.0};
  cfg.relay_values = {true};
  cfg.estimators = {Estimator::convex};
  cfg.step_values = {15.0};
  cfg.trials_per_point = 1;
  cfg.base_seed = 21;

  const SweepResult sweep = run_sweep(cfg, 1);
  REQUIRE(sweep.points.size() == 1);
  const SweepPointResult& pr = sweep.points.front();
  CHECK(pr.trials == 1);

  ScenarioConfig sc = cfg.base;
  sc.seed = 21;
  const TrialResult direct = run_trial(sc);
  REQUIRE(direct.error.has_value());
  CHECK(pr.mean_error == doctest::Approx(*direct.error));
  CHECK(pr.min_error == doctest::Approx(*direct.error));
  CHECK(pr.max_error == doctest::Approx(*direct.error));
  CHECK(pr.localized_fraction == doctest::Approx(direct.localized_fraction));
  CHECK(pr.first_trial.nodes.size() == direct.nodes.size());
}

TEST_CASE("fading degrades accuracy at matched seeds") {
  const int trials = 60;
  std::vector<double> faded, clean;
  for (int i = 0; i < trials; ++i) {
    ScenarioConfig sc = small_ideal(25, 0, 15.0);
    sc.seed = 1 + static_cast<std::uint64_t>(i);
    sc.radio.doi = 0.2;
    sc.radio.fading_f = 0.1;
    faded.push_back(run_trial(sc).error.value_or(1.0));
    sc.radio.fading_f = 0.0;
    clean.push_back(run_trial(sc).error.value_or(1.0));
  }
  const PairedStats st = paired_z(faded, clean);
  CHECK(st.z > 3.0);  // fading strictly removes receptions, never adds them
}

TEST_CASE("denser trajectories do not hurt the convex estimator") {
  const int trials = 40;
  std::vector<double> dense, sparse;
  for (int i = 0; i < trials; ++i) {
    ScenarioConfig sc = small_ideal(25, 0, 7.5);
    sc.seed = 100 + static_cast<std::uint64_t>(i);
    dense.push_back(run_trial(sc).error.value_or(1.0));
    sc.trajectory.step = 15.0;
    sparse.push_back(run_trial(sc).error.value_or(1.0));
  }
  const PairedStats st = paired_z(dense, sparse);
  CHECK(st.z < -3.0);
}

TEST_CASE("csv outputs have the pinned schemas") {
  ExperimentConfig cfg;
  cfg.base = small_ideal(6, 0, 25.0);
  cfg.doi_values = {0.0};
  cfg.fading_values = {0.0};
  cfg.relay_values = {true};
  cfg.estimators = {Estimator::convex};
  cfg.step_values = {25.0};
  cfg.trials_per_point = 2;
  cfg.base_seed = 1;
  const SweepResult sweep = run_sweep(cfg, 1);

  const std::string summary = summary_csv(sweep);
  CHECK(summary.rfind("sweep_point,doi,fading_f,relay,estimator,trials,mean_error,std_error,"
                      "min_error,max_error,localized_fraction,mean_runtime_ms\n",
                      0) == 0);
  CHECK(summary.find("doi0_f0_relay_on_convex_step25,0,0,on,convex,2,") != std::string::npos);

  const std::string scatter = scatter_csv(sweep.points.front().first_trial);
  CHECK(scatter.rfind("node_id,true_x,true_y,est_x,est_y,status\n", 0) == 0);
  // one row per node plus the header
  const auto lines = static_cast<std::size_t>(std::count(scatter.begin(), scatter.end(), '\n'));
  CHECK(lines == sweep.points.front().first_trial.nodes.size() + 1);

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mobiloc_harness_csv";
  fs::remove_all(dir);
  write_sweep_outputs(sweep, dir.string());
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "scatter_doi0_f0_relay_on_convex_step25.csv"));
  fs::remove_all(dir);
}
