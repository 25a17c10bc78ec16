#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mobiloc/geometry.hpp"

namespace mobiloc {

// Per-degree range multipliers around one transmitter. Every bin lies in
// [1-doi, 1+doi] and adjacent bins (including the 359->0 wrap) differ by at
// most doi/10; doi = 0 gives exactly 1 everywhere.
struct IrregularRangeTable {
  std::array<double, 360> bins{};

  double at_bearing(const Point2D& tx, const Point2D& rx) const;
};

// Degree bin of the tx->rx direction, in [0, 360).
int bearing_bin(const Point2D& tx, const Point2D& rx);

// Deterministic in (seed, anchor_stop_index, doi). Relay transmitters get
// their own tables by passing a node-derived index disjoint from stop indices.
IrregularRangeTable build_range_table(std::uint64_t seed, std::uint64_t anchor_stop_index,
                                      double doi);

// Reception test: within the direction-scaled range, line of sight clear, and
// the per-(stop, sensor) fading draw survives. The same draw covers every
// power level of the stop, so fading drops whole stops.
bool can_hear(const Point2D& tx, const Point2D& rx, double nominal_range,
              const IrregularRangeTable& table, const std::vector<ObstaclePolygon>& obstacles,
              double fading_draw, double fading_f);

}  // namespace mobiloc
