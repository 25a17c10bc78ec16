#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mobiloc {

// Malformed input files.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally valid input that violates a documented invariant.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Point2D {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2D&) const = default;
};

struct Rect {
  Point2D lo;
  Point2D hi;

  bool operator==(const Rect&) const = default;
};

double distance(const Point2D& a, const Point2D& b);
double squared_distance(const Point2D& a, const Point2D& b);

// Distance from p to segment [a, b].
double point_segment_distance(const Point2D& p, const Point2D& a, const Point2D& b);

// Simple polygon (non-self-intersecting, positive area). Either winding order.
struct ObstaclePolygon {
  std::vector<Point2D> vertices;

  bool operator==(const ObstaclePolygon&) const = default;
};

// Throws ValidationError naming the defect: fewer than 3 vertices, repeated
// vertices, self-intersection, or zero area.
void validate_polygon(const ObstaclePolygon& poly, const std::string& label = "polygon");

// Strict interior test; points on the boundary count as outside.
bool point_strictly_inside(const Point2D& p, const ObstaclePolygon& poly);

// Distance from p to the polygon's boundary (zero on the boundary itself,
// positive both inside and outside).
double distance_to_boundary(const Point2D& p, const ObstaclePolygon& poly);

// True iff the open segment pq passes through any obstacle's interior.
// Touching a vertex or sliding along an edge tangentially does not block.
bool segment_blocked(const Point2D& p, const Point2D& q,
                     const std::vector<ObstaclePolygon>& obstacles);

struct SensorNode {
  int id = 0;
  Point2D position;
  bool is_boundary = false;
  double initial_energy = 1.0;  // joules
  double used_energy = 0.0;     // joules
  // Neighbor count from the scenario file; when absent the harness counts
  // nodes within the smallest transmission range.
  std::optional<int> num_neighbors;

  bool operator==(const SensorNode&) const = default;
};

// Flags every node whose distance to the nearest obstacle boundary is at most
// d_b. Flags already set on input are kept. d_b must be positive.
std::vector<SensorNode> auto_flag_boundary(std::vector<SensorNode> nodes,
                                           const std::vector<ObstaclePolygon>& obstacles,
                                           double d_b);

}  // namespace mobiloc
