#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mobiloc/beaconing.hpp"

namespace mobiloc {

enum class SolveStatus { optimal, max_iterations, degenerate };

std::string to_string(SolveStatus status);

struct SolverConfig {
  double tol = 1e-8;
  int max_iter = 200;  // total Newton steps across all barrier stages
};

struct SolveResult {
  Point2D x_hat;
  double y = 0.0;                // lifted |x|^2 variable at the optimum
  double objective_value = 0.0;  // epigraph value t = |v|
  SolveStatus status = SolveStatus::optimal;
  double kkt_residual = 0.0;
  // Pinning the lifted variable to |x_hat|^2 costs no objective beyond
  // tolerance, i.e. the relaxed optimum is realized by an actual position.
  bool relaxation_tight = false;
  int newton_iters = 0;
};

// Lifted form of the annulus system: one affine residual row per bound,
// v_row(y, x) = y - 2a.x + |a|^2 - rho^2 with rho the lower or upper radius
// (absent upper bounds contribute no row; absent lower bounds use 0).
struct RelaxedProblem {
  std::vector<AnnulusConstraint> constraints;
  Eigen::MatrixXd coeffs;   // m x 3 rows (1, -2ax, -2ay)
  Eigen::VectorXd offsets;  // m entries |a|^2 - rho^2

  static RelaxedProblem build(const std::vector<AnnulusConstraint>& constraints);
};

// Nonconvex reference objectives, kept for validation and the grid baseline.
// Sum of squared distance residuals against both radii; one-sided constraints
// contribute only their present bound.
double distance_residual_sum(const Point2D& x, const std::vector<AnnulusConstraint>& constraints);
// Euclidean norm of the squared-distance residual vector; equals the relaxed
// objective at y = |x|^2.
double squared_distance_residual_norm(const Point2D& x,
                                      const std::vector<AnnulusConstraint>& constraints);

// Log-barrier interior-point solve of: minimize t subject to |v(y,x)| <= t,
// y >= |x|^2. Degenerate center geometry (single effective center, or all
// centers collinear with a non-trivial optimal segment) reports
// status=degenerate and returns the minimum-norm-x optimum.
SolveResult solve_relaxation(const RelaxedProblem& problem, double tol = 1e-8,
                             int max_iter = 200);

struct OracleResult {
  Point2D position;
  double value = 0.0;
};

// Bounding box guaranteed to contain the relaxed optimum for sane inputs:
// centers inflated by the largest radius plus generous padding.
Rect default_search_bbox(const std::vector<AnnulusConstraint>& constraints);

// Independent brute-force check: per grid point the lifted variable is
// minimized in closed form (clamped least squares), then the best cell is
// refined refine_levels times at x10 resolution. Never touches the
// interior-point iterates.
OracleResult oracle_grid(const std::vector<AnnulusConstraint>& constraints, const Rect& bbox,
                         double coarse_step, int refine_levels);

// nullopt when the sensor produced no constraints at all.
std::optional<SolveResult> estimate_position(const std::vector<AnnulusConstraint>& constraints,
                                             const SolverConfig& config = {});

}  // namespace mobiloc
