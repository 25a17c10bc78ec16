#include "mobiloc/radio.hpp"

#include <algorithm>
#include <cmath>

#include "mobiloc/rng.hpp"

namespace mobiloc {

int bearing_bin(const Point2D& tx, const Point2D& rx) {
  const double rad = std::atan2(rx.y - tx.y, rx.x - tx.x);
  double deg = rad * (180.0 / 3.14159265358979323846);
  if (deg < 0.0) deg += 360.0;
  const int bin = static_cast<int>(deg);
  return bin >= 360 ? 0 : bin;
}

double IrregularRangeTable::at_bearing(const Point2D& tx, const Point2D& rx) const {
  return bins[static_cast<std::size_t>(bearing_bin(tx, rx))];
}

IrregularRangeTable build_range_table(std::uint64_t seed, std::uint64_t anchor_stop_index,
                                      double doi) {
  if (!(doi >= 0.0 && doi < 1.0)) {
    throw ValidationError("doi must be in [0, 1)");
  }
  IrregularRangeTable table;
  if (doi == 0.0) {
    table.bins.fill(1.0);
    return table;
  }

  std::array<double, 360> noise;
  for (int i = 0; i < 360; ++i) {
    const std::uint64_t bits =
        mix(seed, stream::range_table, anchor_stop_index, static_cast<std::uint64_t>(i));
    noise[i] = 2.0 * uniform01(bits) - 1.0;
  }

  // Circular moving average over 41 bins, then gain 2 and clamp. Adjacent
  // averages differ by at most 2/41, so adjacent multipliers differ by at
  // most doi*4/41 < doi/10; the clamp is 1-Lipschitz and preserves that.
  for (int i = 0; i < 360; ++i) {
    double acc = 0.0;
    for (int k = -20; k <= 20; ++k) {
      acc += noise[(i + k + 360) % 360];
    }
    const double smoothed = acc / 41.0;
    table.bins[i] = 1.0 + doi * std::clamp(2.0 * smoothed, -1.0, 1.0);
  }
  return table;
}

bool can_hear(const Point2D& tx, const Point2D& rx, double nominal_range,
              const IrregularRangeTable& table, const std::vector<ObstaclePolygon>& obstacles,
              double fading_draw, double fading_f) {
  if (fading_draw < fading_f) return false;
  const double effective = nominal_range * table.at_bearing(tx, rx);
  if (distance(tx, rx) > effective) return false;
  return !segment_blocked(tx, rx, obstacles);
}

}  // namespace mobiloc
