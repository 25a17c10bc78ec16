#include "mobiloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mobiloc {

namespace {

// Absolute tolerance in meters. Field coordinates stay in the hundreds, so
// this is far below any physically meaningful length.
constexpr double kEps = 1e-9;

double cross(const Point2D& o, const Point2D& a, const Point2D& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

double squared_distance(const Point2D& a, const Point2D& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double distance(const Point2D& a, const Point2D& b) {
  return std::sqrt(squared_distance(a, b));
}

double point_segment_distance(const Point2D& p, const Point2D& a, const Point2D& b) {
  const double len2 = squared_distance(a, b);
  if (len2 == 0.0) return distance(p, a);
  double t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / len2;
  t = std::clamp(t, 0.0, 1.0);
  const Point2D proj{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
  return distance(p, proj);
}

namespace {

bool on_boundary(const Point2D& p, const ObstaclePolygon& poly) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (point_segment_distance(p, v[i], v[(i + 1) % n]) <= kEps) return true;
  }
  return false;
}

// Even-odd ray cast; assumes p is not on the boundary.
bool inside_even_odd(const Point2D& p, const ObstaclePolygon& poly) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const bool straddles = (v[i].y > p.y) != (v[j].y > p.y);
    if (straddles) {
      const double xint = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (p.x < xint) inside = !inside;
    }
  }
  return inside;
}

// Parameters t in [0,1] where segment p+t(q-p) meets segment [c,d], including
// collinear overlaps (both overlap endpoints are reported).
void collect_edge_hits(const Point2D& p, const Point2D& q, const Point2D& c, const Point2D& d,
                       std::vector<double>& ts) {
  const double rx = q.x - p.x, ry = q.y - p.y;
  const double sx = d.x - c.x, sy = d.y - c.y;
  const double denom = rx * sy - ry * sx;
  const double qpx = c.x - p.x, qpy = c.y - p.y;
  const double r_len2 = rx * rx + ry * ry;

  if (std::abs(denom) > kEps * std::max(1.0, std::sqrt(r_len2) * std::hypot(sx, sy))) {
    const double t = (qpx * sy - qpy * sx) / denom;
    const double u = (qpx * ry - qpy * rx) / denom;
    if (t >= -1e-12 && t <= 1.0 + 1e-12 && u >= -1e-12 && u <= 1.0 + 1e-12) {
      ts.push_back(std::clamp(t, 0.0, 1.0));
    }
    return;
  }
  // Parallel. Only collinear overlaps matter.
  if (std::abs(qpx * ry - qpy * rx) > kEps * std::max(1.0, r_len2)) return;
  if (r_len2 == 0.0) return;
  double t0 = (qpx * rx + qpy * ry) / r_len2;
  double t1 = ((d.x - p.x) * rx + (d.y - p.y) * ry) / r_len2;
  if (t0 > t1) std::swap(t0, t1);
  if (t1 < 0.0 || t0 > 1.0) return;
  ts.push_back(std::clamp(t0, 0.0, 1.0));
  ts.push_back(std::clamp(t1, 0.0, 1.0));
}

bool segment_enters_interior(const Point2D& p, const Point2D& q, const ObstaclePolygon& poly) {
  if (p == q) return point_strictly_inside(p, poly);

  // Cut the segment at every boundary contact; a piece lies in the interior
  // exactly when its midpoint does.
  std::vector<double> ts{0.0, 1.0};
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    collect_edge_hits(p, q, v[i], v[(i + 1) % n], ts);
  }
  std::sort(ts.begin(), ts.end());
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    if (ts[i + 1] - ts[i] <= 1e-12) continue;
    const double tm = 0.5 * (ts[i] + ts[i + 1]);
    const Point2D mid{p.x + tm * (q.x - p.x), p.y + tm * (q.y - p.y)};
    if (point_strictly_inside(mid, poly)) return true;
  }
  return false;
}

}  // namespace

bool point_strictly_inside(const Point2D& p, const ObstaclePolygon& poly) {
  if (poly.vertices.size() < 3) return false;
  if (on_boundary(p, poly)) return false;
  return inside_even_odd(p, poly);
}

double distance_to_boundary(const Point2D& p, const ObstaclePolygon& poly) {
  double best = std::numeric_limits<double>::infinity();
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, point_segment_distance(p, v[i], v[(i + 1) % n]));
  }
  return best;
}

bool segment_blocked(const Point2D& p, const Point2D& q,
                     const std::vector<ObstaclePolygon>& obstacles) {
  for (const auto& poly : obstacles) {
    if (segment_enters_interior(p, q, poly)) return true;
  }
  return false;
}

void validate_polygon(const ObstaclePolygon& poly, const std::string& label) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  if (n < 3) {
    throw ValidationError(label + ": needs at least 3 vertices, has " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(v[i].x) || !std::isfinite(v[i].y)) {
      throw ValidationError(label + ": vertex " + std::to_string(i) + " is not finite");
    }
    if (distance(v[i], v[(i + 1) % n]) <= kEps) {
      throw ValidationError(label + ": repeated vertex at index " + std::to_string(i));
    }
  }

  // Shoelace area.
  double area2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % n];
    area2 += a.x * b.y - b.x * a.y;
  }
  if (std::abs(area2) <= kEps) {
    throw ValidationError(label + ": polygon has zero area");
  }

  // Simplicity: non-adjacent edges must not meet at all; adjacent edges must
  // not fold back over each other.
  for (std::size_t i = 0; i < n; ++i) {
    const Point2D& a0 = v[i];
    const Point2D& a1 = v[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point2D& b0 = v[j];
      const Point2D& b1 = v[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Shared endpoint is fine; a collinear fold-back is not.
        const Point2D shared = (j == i + 1) ? a1 : a0;
        const Point2D tip_a = (j == i + 1) ? a0 : a1;
        const Point2D tip_b = (j == i + 1) ? b1 : b0;
        if (std::abs(cross(shared, tip_a, tip_b)) <= kEps &&
            (tip_a.x - shared.x) * (tip_b.x - shared.x) +
                    (tip_a.y - shared.y) * (tip_b.y - shared.y) >
                kEps) {
          throw ValidationError(label + ": edges " + std::to_string(i) + " and " +
                                std::to_string(j) + " fold back over each other");
        }
        continue;
      }
      std::vector<double> ts;
      collect_edge_hits(a0, a1, b0, b1, ts);
      if (!ts.empty()) {
        throw ValidationError(label + ": edges " + std::to_string(i) + " and " +
                              std::to_string(j) + " intersect (polygon is not simple)");
      }
    }
  }
}

std::vector<SensorNode> auto_flag_boundary(std::vector<SensorNode> nodes,
                                           const std::vector<ObstaclePolygon>& obstacles,
                                           double d_b) {
  if (!(d_b > 0.0)) {
    throw ValidationError("boundary flag distance must be positive, got " + std::to_string(d_b));
  }
  for (auto& node : nodes) {
    if (node.is_boundary) continue;
    for (const auto& poly : obstacles) {
      if (distance_to_boundary(node.position, poly) <= d_b) {
        node.is_boundary = true;
        break;
      }
    }
  }
  return nodes;
}

}  // namespace mobiloc
