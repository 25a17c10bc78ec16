#include "mobiloc/relay.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "mobiloc/radio.hpp"
#include "mobiloc/rng.hpp"

namespace mobiloc {

namespace {

std::uint64_t node_key(int id) {
  return static_cast<std::uint64_t>(static_cast<std::int64_t>(id));
}

// Relay transmitters get irregularity tables from an index block disjoint
// from anchor stop indices.
std::uint64_t relay_table_index(int node_id) {
  return (std::uint64_t{1} << 32) + node_key(node_id);
}

}  // namespace

std::optional<double> backoff_delay(const SensorNode& node, const ContentionConfig& cfg) {
  if (!node.num_neighbors || *node.num_neighbors < 1) return std::nullopt;
  if (!(node.initial_energy > 0.0)) return std::nullopt;
  const double energy_term = cfg.alpha * (node.used_energy / node.initial_energy);
  const double neighbor_term = cfg.beta / static_cast<double>(*node.num_neighbors);
  return (energy_term + neighbor_term) * cfg.max_delay;
}

std::optional<RelayEvent> run_contention(const Point2D& stop, int stop_index,
                                         const std::vector<SensorNode>& candidates,
                                         const ContentionConfig& cfg,
                                         const std::vector<ObstaclePolygon>& obstacles) {
  const SensorNode* winner = nullptr;
  double winner_delay = std::numeric_limits<double>::infinity();
  for (const auto& node : candidates) {
    const auto delay = backoff_delay(node, cfg);
    if (!delay) continue;
    if (*delay < winner_delay || (*delay == winner_delay && node.id < winner->id)) {
      winner = &node;
      winner_delay = *delay;
    }
  }
  if (!winner) return std::nullopt;

  RelayEvent event{stop_index, winner->id, winner_delay, {}};
  for (const auto& node : candidates) {
    if (node.id == winner->id || !backoff_delay(node, cfg)) continue;
    if (distance(node.position, winner->position) <= cfg.relay_range &&
        !segment_blocked(winner->position, node.position, obstacles)) {
      event.suppressed_node_ids.push_back(node.id);
    }
  }
  std::sort(event.suppressed_node_ids.begin(), event.suppressed_node_ids.end());
  return event;
}

std::vector<RelayEvent> run_contention_rounds(const Point2D& stop, int stop_index,
                                              const std::vector<SensorNode>& candidates,
                                              const ContentionConfig& cfg,
                                              const std::vector<ObstaclePolygon>& obstacles) {
  std::vector<RelayEvent> events;
  std::vector<SensorNode> remaining = candidates;
  while (true) {
    const auto event = run_contention(stop, stop_index, remaining, cfg, obstacles);
    if (!event) break;
    std::erase_if(remaining, [&](const SensorNode& n) {
      if (n.id == event->winner_node_id) return true;
      return std::binary_search(event->suppressed_node_ids.begin(),
                                event->suppressed_node_ids.end(), n.id);
    });
    events.push_back(*event);
  }
  return events;
}

AnnulusConstraint relayed_constraint(const Point2D& stop, double direct_lower,
                                     double level_upper, const ContentionConfig& cfg) {
  if (!(cfg.relay_range > 0.0)) {
    throw ValidationError("relayed constraint needs a positive relay_range");
  }
  if (!(level_upper > 0.0)) {
    throw ValidationError("relayed constraint needs a positive level radius");
  }
  return AnnulusConstraint{stop, direct_lower, level_upper + cfg.relay_range, true};
}

std::vector<RelayEvent> relay_pass(const ScenarioConfig& scenario,
                                   const std::vector<Point2D>& stops,
                                   std::map<int, ObservationLog>& logs) {
  std::vector<RelayEvent> events;

  for (std::size_t si = 0; si < stops.size(); ++si) {
    std::vector<SensorNode> candidates;
    std::map<int, int> forwarded_level;  // winner id -> tightest direct level
    for (const auto& node : scenario.nodes) {
      if (!node.is_boundary) continue;
      const auto& rec = logs.at(node.id).stops[si];
      int best = std::numeric_limits<int>::max();
      for (const auto& ob : rec.heard) {
        if (!ob.via_relay) best = std::min(best, ob.level);
      }
      if (best == std::numeric_limits<int>::max()) continue;
      candidates.push_back(node);
      forwarded_level[node.id] = best;
    }

    const auto rounds = run_contention_rounds(stops[si], static_cast<int>(si), candidates,
                                              scenario.contention, scenario.obstacles);
    for (const auto& event : rounds) {
      const auto winner_it =
          std::find_if(candidates.begin(), candidates.end(),
                       [&](const SensorNode& n) { return n.id == event.winner_node_id; });
      const IrregularRangeTable table = build_range_table(
          scenario.seed, relay_table_index(event.winner_node_id), scenario.radio.doi);
      const int level = forwarded_level.at(event.winner_node_id);

      for (const auto& rx : scenario.nodes) {
        if (rx.id == event.winner_node_id) continue;
        const double fade = uniform01(
            mix(mix(scenario.seed, stream::relay_fading, si, node_key(event.winner_node_id)),
                node_key(rx.id)));
        if (can_hear(winner_it->position, rx.position, scenario.contention.relay_range, table,
                     scenario.obstacles, fade, scenario.radio.fading_f)) {
          logs.at(rx.id).stops[si].heard.push_back(
              Observation{level, true, scenario.contention.relay_range});
        }
      }
      events.push_back(event);
    }
  }
  return events;
}

std::string dump_relay_events(const std::vector<RelayEvent>& events) {
  std::ostringstream out;
  for (const auto& e : events) {
    out << "stop " << e.anchor_stop_index << ": winner " << e.winner_node_id << " delay "
        << detail::format_double(e.delay) << " suppressed [";
    for (std::size_t i = 0; i < e.suppressed_node_ids.size(); ++i) {
      if (i) out << ", ";
      out << e.suppressed_node_ids[i];
    }
    out << "]\n";
  }
  return out.str();
}

}  // namespace mobiloc
