#include "mobiloc/beaconing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mobiloc/radio.hpp"
#include "mobiloc/rng.hpp"

namespace mobiloc {

namespace {

std::vector<double> axis_coords(double extent, double step) {
  if (extent / step > 1e6) {
    throw ValidationError("trajectory step " + detail::format_double(step) +
                          " is too small for a field extent of " +
                          detail::format_double(extent));
  }
  std::vector<double> coords;
  for (int k = 0;; ++k) {
    const double v = k * step;
    if (v > extent + 1e-9) break;
    coords.push_back(std::min(v, extent));
  }
  if (coords.back() < extent - 1e-9) coords.push_back(extent);
  return coords;
}

std::uint64_t node_key(int id) {
  return static_cast<std::uint64_t>(static_cast<std::int64_t>(id));
}

}  // namespace

std::vector<Point2D> generate_trajectory(const TrajectoryConfig& config, double field_width,
                                         double field_height, std::uint64_t seed) {
  if (config.pattern == TrajectoryPattern::explicit_points) {
    if (config.explicit_points.empty()) {
      throw ValidationError("explicit trajectory has no points");
    }
    return config.explicit_points;
  }

  if (!(config.step > 0.0)) {
    throw ValidationError("trajectory step must be positive");
  }
  const std::vector<double> xs = axis_coords(field_width, config.step);
  const std::vector<double> ys = axis_coords(field_height, config.step);
  const std::size_t count = xs.size() * ys.size();

  std::vector<Point2D> stops;
  stops.reserve(count);

  if (config.pattern == TrajectoryPattern::grid_sweep) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      if (j % 2 == 0) {
        for (std::size_t i = 0; i < xs.size(); ++i) stops.push_back({xs[i], ys[j]});
      } else {
        for (std::size_t i = xs.size(); i-- > 0;) stops.push_back({xs[i], ys[j]});
      }
    }
    return stops;
  }

  // random_waypoint: as many stops as the lattice would have, uniform in the
  // field, so error comparisons across patterns see equal beacon budgets.
  for (std::size_t k = 0; k < count; ++k) {
    const double ux = uniform01(mix(seed, stream::waypoint, k, 0));
    const double uy = uniform01(mix(seed, stream::waypoint, k, 1));
    stops.push_back({field_width * ux, field_height * uy});
  }
  return stops;
}

std::map<int, ObservationLog> simulate_beaconing(const ScenarioConfig& scenario,
                                                 const std::vector<Point2D>& stops) {
  if (stops.empty()) {
    throw ValidationError("beaconing needs at least one anchor stop");
  }
  const auto& lr = scenario.radio.level_ranges;
  std::map<int, ObservationLog> logs;
  for (const auto& node : scenario.nodes) {
    logs[node.id].stops.reserve(stops.size());
  }

  for (std::size_t si = 0; si < stops.size(); ++si) {
    const IrregularRangeTable table = build_range_table(scenario.seed, si, scenario.radio.doi);
    for (const auto& node : scenario.nodes) {
      StopRecord rec{static_cast<int>(si), stops[si], {}};
      const double fade = uniform01(mix(scenario.seed, stream::fading, si, node_key(node.id)));
      for (std::size_t level = 0; level < lr.size(); ++level) {
        if (can_hear(stops[si], node.position, lr[level], table, scenario.obstacles, fade,
                     scenario.radio.fading_f)) {
          rec.heard.push_back(Observation{static_cast<int>(level), false, 0.0});
        }
      }
      logs[node.id].stops.push_back(std::move(rec));
    }
  }
  return logs;
}

std::vector<AnnulusConstraint> extract_constraints(const ObservationLog& log,
                                                   const RadioConfig& radio,
                                                   const ExtractionOptions& options) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const auto& lr = radio.level_ranges;
  std::vector<AnnulusConstraint> out;

  for (const auto& rec : log.stops) {
    double direct_upper = kInf;
    double relay_upper = kInf;
    std::vector<bool> heard_direct(lr.size(), false);

    for (const auto& ob : rec.heard) {
      if (ob.level < 0 || static_cast<std::size_t>(ob.level) >= lr.size()) {
        throw ValidationError("stop " + std::to_string(rec.stop_index) +
                              ": observation level " + std::to_string(ob.level) +
                              " outside the configured power levels");
      }
      if (ob.via_relay) {
        if (!(ob.relay_range > 0.0)) {
          throw ValidationError("stop " + std::to_string(rec.stop_index) +
                                ": relayed observation needs a positive relay range");
        }
        relay_upper = std::min(relay_upper, lr[ob.level] + ob.relay_range);
      } else {
        heard_direct[ob.level] = true;
        direct_upper = std::min(direct_upper, lr[ob.level]);
      }
    }

    if (direct_upper == kInf && relay_upper == kInf) {
      if (options.lower_only) {
        out.push_back(AnnulusConstraint{rec.anchor, lr.back(), std::nullopt, false});
      }
      continue;
    }

    const double upper = std::min(direct_upper, relay_upper);
    const bool via_relay = relay_upper < direct_upper;
    double lower = 0.0;
    if (direct_upper < kInf || options.relay_lower_from_unheard) {
      for (std::size_t level = 0; level < lr.size(); ++level) {
        if (!heard_direct[level] && lr[level] < upper) {
          lower = std::max(lower, lr[level]);
        }
      }
    }
    out.push_back(AnnulusConstraint{rec.anchor, lower, upper, via_relay});
  }
  return out;
}

std::string dump_observation_log(int node_id, const ObservationLog& log) {
  std::ostringstream out;
  out << "node " << node_id << "\n";
  for (const auto& rec : log.stops) {
    out << "stop " << rec.stop_index << " at (" << detail::format_double(rec.anchor.x) << ", "
        << detail::format_double(rec.anchor.y) << "):";
    if (rec.heard.empty()) {
      out << " silent";
    }
    for (const auto& ob : rec.heard) {
      if (ob.via_relay) {
        out << " relay " << ob.level << " +" << detail::format_double(ob.relay_range);
      } else {
        out << " direct " << ob.level;
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace mobiloc
