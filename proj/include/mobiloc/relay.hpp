#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mobiloc/beaconing.hpp"

namespace mobiloc {

struct RelayEvent {
  int anchor_stop_index = 0;
  int winner_node_id = 0;
  double delay = 0.0;  // seconds
  std::vector<int> suppressed_node_ids;  // ascending

  bool operator==(const RelayEvent&) const = default;
};

// (alpha * used/initial + beta/neighbors) * max_delay. nullopt marks an
// ineligible node: no neighbors (or unknown) or zero battery capacity.
std::optional<double> backoff_delay(const SensorNode& node, const ContentionConfig& cfg);

// One contention round among boundary nodes that heard the stop directly:
// minimum delay wins (ties to the smaller id); candidates within relay_range
// and line of sight of the winner hear the rebroadcast and stand down.
std::optional<RelayEvent> run_contention(const Point2D& stop, int stop_index,
                                         const std::vector<SensorNode>& candidates,
                                         const ContentionConfig& cfg,
                                         const std::vector<ObstaclePolygon>& obstacles);

// Rounds repeat on the unsuppressed remainder until nobody is left.
std::vector<RelayEvent> run_contention_rounds(const Point2D& stop, int stop_index,
                                              const std::vector<SensorNode>& candidates,
                                              const ContentionConfig& cfg,
                                              const std::vector<ObstaclePolygon>& obstacles);

// Annulus gained from a relayed beacon: the direct radius grows by the relay
// range. Throws ValidationError unless relay_range and level_upper are
// positive.
AnnulusConstraint relayed_constraint(const Point2D& stop, double direct_lower,
                                     double level_upper, const ContentionConfig& cfg);

// Full relay phase over all stops: contention per stop, then each winner
// rebroadcasts its tightest directly heard level through its own irregular
// radio; receptions are appended to the logs. Relays are never re-relayed.
std::vector<RelayEvent> relay_pass(const ScenarioConfig& scenario,
                                   const std::vector<Point2D>& stops,
                                   std::map<int, ObservationLog>& logs);

std::string dump_relay_events(const std::vector<RelayEvent>& events);

}  // namespace mobiloc
