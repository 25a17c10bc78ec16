#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mobiloc/scenario.hpp"

namespace mobiloc {

// One reception at one stop: a directly heard power level, or a level relayed
// by a boundary node (then the constraint radius grows by relay_range).
struct Observation {
  int level = 0;  // index into RadioConfig::level_ranges
  bool via_relay = false;
  double relay_range = 0.0;

  bool operator==(const Observation&) const = default;
};

struct StopRecord {
  int stop_index = 0;
  Point2D anchor;
  std::vector<Observation> heard;  // empty when the stop was silent for this sensor

  bool operator==(const StopRecord&) const = default;
};

// Per-sensor record covering every anchor stop, heard or not.
struct ObservationLog {
  std::vector<StopRecord> stops;

  bool operator==(const ObservationLog&) const = default;
};

// lower < upper whenever upper is present; upper absent for lower-only
// constraints from silent stops.
struct AnnulusConstraint {
  Point2D center;
  double lower = 0.0;
  std::optional<double> upper;
  bool via_relay = false;

  bool operator==(const AnnulusConstraint&) const = default;
};

// Anchor stops for the given pattern. grid_sweep walks a boustrophedon lattice
// with the given step (far edge included when the step does not divide the
// field); random_waypoint draws the same number of stops uniformly; explicit
// returns the configured points. Deterministic in (config, field, seed).
std::vector<Point2D> generate_trajectory(const TrajectoryConfig& config, double field_width,
                                         double field_height, std::uint64_t seed);

// Direct reception pass: per (stop, sensor) one fading draw shared by all
// power levels, then one reception test per level. Relay passes append to the
// returned logs afterwards.
std::map<int, ObservationLog> simulate_beaconing(const ScenarioConfig& scenario,
                                                 const std::vector<Point2D>& stops);

// Tightest annulus per stop. upper = smallest effective heard radius (direct
// range, or relayed range + relay radius); lower = largest unheard direct
// range strictly below upper, else 0. Relay-only stops keep lower = 0 unless
// options.relay_lower_from_unheard; silent stops emit a lower-only constraint
// only when options.lower_only.
std::vector<AnnulusConstraint> extract_constraints(const ObservationLog& log,
                                                   const RadioConfig& radio,
                                                   const ExtractionOptions& options = {});

// Line-oriented debug dump, one line per stop.
std::string dump_observation_log(int node_id, const ObservationLog& log);

}  // namespace mobiloc
