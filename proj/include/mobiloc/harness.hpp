#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mobiloc/relay.hpp"
#include "mobiloc/solver.hpp"

namespace mobiloc {

enum class Estimator { convex, baseline };

std::string to_string(Estimator estimator);
Estimator estimator_from_word(const std::string& word);

struct TrialOptions {
  bool relay_on = true;
  Estimator estimator = Estimator::convex;
};

struct NodeResult {
  int node_id = 0;
  Point2D truth;
  std::optional<Point2D> estimate;
  std::string status;  // solver status, "baseline", or "not_localized"
  int constraint_count = 0;
};

struct TrialResult {
  std::vector<NodeResult> nodes;
  std::optional<double> error;  // normalized error over localized nodes
  double localized_fraction = 0.0;
  double mean_constraints = 0.0;
  double runtime_ms = 0.0;
};

// Everything a trial computed, for debugging dumps and tests.
struct TrialDetail {
  ScenarioConfig materialized;
  std::vector<Point2D> stops;
  std::map<int, ObservationLog> logs;
  std::vector<RelayEvent> relay_events;
  std::map<int, std::vector<AnnulusConstraint>> constraints;
  TrialResult result;
};

// Mean estimation distance over localized nodes divided by the radio range;
// nullopt when no node was localized (deliberately distinct from zero error).
std::optional<double> normalized_error(const std::vector<Point2D>& truths,
                                       const std::vector<Point2D>& estimates, double r);

// Deploys the requested random nodes (uniform, rejected out of obstacle
// interiors), fills unset neighbor counts from the smallest level range, and
// flags boundary nodes. Idempotent: the returned config has random_nodes = 0.
ScenarioConfig materialize_scenario(const ScenarioConfig& config);

// Centroid of the feasible region on a half-meter grid; when the sampled
// feasible set is empty, centroid of the grid cells tying for the least total
// constraint violation (linear distance overshoots).
Point2D baseline_estimate(const std::vector<AnnulusConstraint>& constraints);

TrialDetail run_trial_detailed(const ScenarioConfig& scenario, const TrialOptions& options = {});
TrialResult run_trial(const ScenarioConfig& scenario, const TrialOptions& options = {});

struct ExperimentConfig {
  ScenarioConfig base;
  std::vector<double> doi_values;
  std::vector<double> fading_values;
  std::vector<bool> relay_values;
  std::vector<Estimator> estimators;
  std::vector<double> step_values;
  int trials_per_point = 1;
  std::uint64_t base_seed = 0;
};

// Experiment files are scenario files with one extra [experiment] section
// (sweep axes, trials, base_seed). Missing axes default to the base scenario's
// values, so a bare scenario file is a one-point experiment.
ExperimentConfig load_experiment(const std::string& path);
ExperimentConfig parse_experiment(const std::string& text, const std::string& label = "experiment");

struct SweepPoint {
  std::string name;
  double doi = 0.0;
  double fading_f = 0.0;
  bool relay_on = true;
  Estimator estimator = Estimator::convex;
  double step = 0.0;
};

struct SweepPointResult {
  SweepPoint point;
  int trials = 0;
  // Statistics over trials with a defined error; nan when none had one.
  double mean_error = 0.0;
  double std_error = 0.0;
  double min_error = 0.0;
  double max_error = 0.0;
  double localized_fraction = 0.0;  // mean over trials
  double mean_runtime_ms = 0.0;
  TrialResult first_trial;            // scatter data source
  std::vector<std::string> trial_errors;
};

struct SweepResult {
  std::vector<SweepPointResult> points;
};

std::vector<SweepPoint> enumerate_sweep_points(const ExperimentConfig& config);

// Trials per point run on a small worker pool (workers <= 0 picks a default);
// trial seeds are base_seed + trial index, so sweep points are seed-paired.
// Output is independent of scheduling.
SweepResult run_sweep(const ExperimentConfig& config, int workers = 0);

std::string summary_csv(const SweepResult& result);
std::string scatter_csv(const TrialResult& trial);

// Writes summary.csv plus scatter_<point>.csv for each point's first trial.
void write_sweep_outputs(const SweepResult& result, const std::string& out_dir);

}  // namespace mobiloc
