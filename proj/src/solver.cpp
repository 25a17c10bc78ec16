#include "mobiloc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mobiloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sq(double v) { return v * v; }

// The relaxation counts as tight when pinning the lifted variable to
// |x_hat|^2 costs no objective beyond tolerance. The slack y - |x_hat|^2
// itself is a bad test: it shrinks only like sqrt(gap) when the cone
// constraint is active with a zero multiplier.
bool polish_is_tight(const RelaxedProblem& pb, const SolveResult& res, double tol) {
  Eigen::Vector3d lifted;
  lifted << res.x_hat.x * res.x_hat.x + res.x_hat.y * res.x_hat.y, res.x_hat.x, res.x_hat.y;
  const double polished = (pb.coeffs * lifted + pb.offsets).norm();
  return polished - res.objective_value <=
         std::max(1e-6, 100.0 * tol) * (1.0 + std::abs(res.objective_value));
}

void check_constraints(const std::vector<AnnulusConstraint>& cs) {
  if (cs.empty()) {
    throw ValidationError("position estimation needs at least one constraint");
  }
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const auto& c = cs[i];
    const std::string who = "constraint " + std::to_string(i);
    if (!std::isfinite(c.center.x) || !std::isfinite(c.center.y)) {
      throw ValidationError(who + ": center must be finite");
    }
    if (!(c.lower >= 0.0) || !std::isfinite(c.lower)) {
      throw ValidationError(who + ": lower radius must be finite and non-negative");
    }
    if (c.upper && !(*c.upper > c.lower && std::isfinite(*c.upper))) {
      throw ValidationError(who + ": upper radius must be finite and exceed the lower radius");
    }
  }
}

// Magnitude of the instance data, used to scale degeneracy thresholds.
double instance_scale(const std::vector<AnnulusConstraint>& cs) {
  double scale = 1.0;
  for (const auto& c : cs) {
    scale = std::max({scale, std::abs(c.center.x), std::abs(c.center.y), c.lower});
    if (c.upper) scale = std::max(scale, *c.upper);
  }
  return scale;
}

struct CenterGeometry {
  std::vector<Point2D> distinct;
  bool single_center = false;
  bool collinear = false;  // two or more distinct centers on one line
  Point2D line_dir;        // unit, defined when collinear
};

CenterGeometry analyze_centers(const std::vector<AnnulusConstraint>& cs, double scale) {
  CenterGeometry geom;
  const double same_tol = 1e-9 * scale;
  for (const auto& c : cs) {
    bool seen = false;
    for (const auto& p : geom.distinct) {
      if (distance(p, c.center) <= same_tol) {
        seen = true;
        break;
      }
    }
    if (!seen) geom.distinct.push_back(c.center);
  }
  if (geom.distinct.size() == 1) {
    geom.single_center = true;
    return geom;
  }

  // Direction from the farthest pair keeps the perpendicular test stable.
  std::size_t bi = 0, bj = 1;
  double best = -1.0;
  for (std::size_t i = 0; i < geom.distinct.size(); ++i) {
    for (std::size_t j = i + 1; j < geom.distinct.size(); ++j) {
      const double d = squared_distance(geom.distinct[i], geom.distinct[j]);
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  }
  const Point2D p = geom.distinct[bi];
  const Point2D q = geom.distinct[bj];
  const double len = distance(p, q);
  const Point2D e{(q.x - p.x) / len, (q.y - p.y) / len};
  double max_perp = 0.0;
  for (const auto& a : geom.distinct) {
    const double perp = std::abs(e.x * (a.y - p.y) - e.y * (a.x - p.x));
    max_perp = std::max(max_perp, perp);
  }
  if (max_perp <= 1e-7 * (1.0 + scale)) {
    geom.collinear = true;
    geom.line_dir = e;
  }
  return geom;
}

// All rows share one effective scalar u = y - 2a.x + |a|^2, so the optimum is
// a closed-form disk of positions; pick the minimum-norm one.
SolveResult solve_single_center(const RelaxedProblem& pb, double tol) {
  const Point2D a = pb.constraints.front().center;
  const double na2 = a.x * a.x + a.y * a.y;

  // offsets hold |a|^2 - rho^2, so rho^2 = |a|^2 - offset; the best u is the
  // mean of the rho^2 values (least squares in one variable).
  const double u_star = na2 - pb.offsets.mean();
  const Eigen::VectorXd residual =
      Eigen::VectorXd::Constant(pb.offsets.size(), u_star - na2) + pb.offsets;

  SolveResult res;
  res.objective_value = residual.norm();
  const double radius = std::sqrt(std::max(u_star, 0.0));
  const double na = std::sqrt(na2);
  if (na <= radius) {
    res.x_hat = Point2D{0.0, 0.0};
  } else {
    const double shrink = 1.0 - radius / na;
    res.x_hat = Point2D{a.x * shrink, a.y * shrink};
  }
  res.y = u_star + 2.0 * (a.x * res.x_hat.x + a.y * res.x_hat.y) - na2;
  res.kkt_residual = 0.0;
  res.newton_iters = 0;

  const double scale = instance_scale(pb.constraints);
  res.status =
      radius > 1e-3 * (1.0 + scale) ? SolveStatus::degenerate : SolveStatus::optimal;
  res.relaxation_tight = polish_is_tight(pb, res, tol);
  return res;
}

struct BarrierState {
  Eigen::Vector4d u;  // (y, x1, x2, t)
  double gap = kInf;  // nu / kappa at the last stage
  double lambda2 = kInf;
  int iters = 0;
  bool converged = false;
};

struct PointEval {
  double s2 = 0.0;  // t^2 - |v|^2
  double c = 0.0;   // y - |x|^2
  double psi = 0.0;
  Eigen::Vector4d grad;
  Eigen::Matrix4d hess;
};

bool eval_point(const Eigen::MatrixXd& M, const Eigen::VectorXd& w,
                const Eigen::Matrix3d& MtM, const Eigen::Vector4d& u, double kappa,
                bool need_derivatives, PointEval& out) {
  const double y = u[0];
  const double t = u[3];
  const Eigen::Vector3d z = u.head<3>();
  const Eigen::VectorXd v = M * z + w;
  const double nv2 = v.squaredNorm();
  out.s2 = t * t - nv2;
  out.c = y - u[1] * u[1] - u[2] * u[2];
  if (!(t > 0.0) || !(out.s2 > 0.0) || !(out.c > 0.0)) return false;
  out.psi = kappa * t - std::log(out.s2) - std::log(out.c);
  if (!need_derivatives) return true;

  const Eigen::Vector3d Mv = M.transpose() * v;
  Eigen::Vector4d gs2;
  gs2 << -2.0 * Mv[0], -2.0 * Mv[1], -2.0 * Mv[2], 2.0 * t;
  Eigen::Vector4d gc;
  gc << 1.0, -2.0 * u[1], -2.0 * u[2], 0.0;

  out.grad = -gs2 / out.s2 - gc / out.c;
  out.grad[3] += kappa;

  out.hess = gs2 * gs2.transpose() / sq(out.s2) + gc * gc.transpose() / sq(out.c);
  out.hess.topLeftCorner<3, 3>() += (2.0 / out.s2) * MtM;
  out.hess(3, 3) -= 2.0 / out.s2;
  out.hess(1, 1) += 2.0 / out.c;
  out.hess(2, 2) += 2.0 / out.c;
  return true;
}

// Path following on psi = kappa*t - log(t^2-|v|^2) - log(y-|x|^2); the two
// barrier terms carry parameter nu = 3, so the suboptimality after a stage is
// at most nu/kappa. Convergence accepts gap <= tol * (t_floor + |t|); callers
// solving in rescaled units pass t_floor as the converted absolute term.
BarrierState barrier_solve(const Eigen::MatrixXd& M, const Eigen::VectorXd& w, double tol,
                           int max_iter, double t_floor) {
  constexpr double kNu = 3.0;
  const Eigen::Matrix3d MtM = M.transpose() * M;

  BarrierState st;
  // Centered frame: x0 = 0 is the centroid of the centers, y0 just above the
  // cone boundary, t0 strictly above |v|.
  st.u.setZero();
  st.u[0] = 1.0;
  {
    const double nv0 = (M * st.u.head<3>() + w).norm();
    st.u[3] = 1.1 * nv0 + 1.0;
  }

  double kappa = kNu / std::max(1.0, st.u[3]);
  const double stage_eps = std::min(1e-9, 0.1 * tol);

  for (int stage = 0; stage < 60; ++stage) {
    PointEval e;
    if (!eval_point(M, w, MtM, st.u, kappa, true, e)) break;

    while (st.iters < max_iter) {
      Eigen::Matrix4d H = e.hess;
      Eigen::Vector4d step;
      double lambda2 = -1.0;
      for (int reg = 0; reg < 4; ++reg) {
        step = H.ldlt().solve(-e.grad);
        lambda2 = -e.grad.dot(step);
        if (std::isfinite(lambda2) && lambda2 >= 0.0) break;
        H += Eigen::Matrix4d::Identity() * (1e-12 * (1.0 + H.trace()) * std::pow(10.0, reg));
      }
      st.lambda2 = lambda2;
      if (!(lambda2 > 2.0 * stage_eps)) break;

      double alpha = 1.0;
      PointEval trial;
      bool moved = false;
      while (alpha > 1e-14) {
        const Eigen::Vector4d cand = st.u + alpha * step;
        if (eval_point(M, w, MtM, cand, kappa, false, trial) &&
            trial.psi <= e.psi - 0.25 * alpha * lambda2) {
          st.u = cand;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      ++st.iters;
      if (!moved) break;
      // Near the noise floor of psi the line search collapses while the
      // decrement is already far below what the gap bound needs; stop
      // polishing instead of grinding out microscopic steps.
      if (lambda2 <= 1e-6 && alpha < 1e-3) break;
      if (!eval_point(M, w, MtM, st.u, kappa, true, e)) break;
    }

    st.gap = kNu / kappa;
    if (st.gap <= tol * (t_floor + std::abs(st.u[3]))) {
      st.converged = true;
      break;
    }
    if (st.iters >= max_iter) break;
    kappa *= 10.0;
  }
  return st;
}

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::degenerate: return "degenerate";
  }
  return "optimal";
}

RelaxedProblem RelaxedProblem::build(const std::vector<AnnulusConstraint>& constraints) {
  check_constraints(constraints);
  RelaxedProblem pb;
  pb.constraints = constraints;

  std::size_t rows = 0;
  for (const auto& c : constraints) rows += c.upper ? 2 : 1;
  pb.coeffs.resize(static_cast<Eigen::Index>(rows), 3);
  pb.offsets.resize(static_cast<Eigen::Index>(rows));

  Eigen::Index r = 0;
  for (const auto& c : constraints) {
    const double na2 = sq(c.center.x) + sq(c.center.y);
    pb.coeffs.row(r) << 1.0, -2.0 * c.center.x, -2.0 * c.center.y;
    pb.offsets[r] = na2 - sq(c.lower);
    ++r;
    if (c.upper) {
      pb.coeffs.row(r) << 1.0, -2.0 * c.center.x, -2.0 * c.center.y;
      pb.offsets[r] = na2 - sq(*c.upper);
      ++r;
    }
  }
  return pb;
}

double distance_residual_sum(const Point2D& x, const std::vector<AnnulusConstraint>& cs) {
  check_constraints(cs);
  double total = 0.0;
  for (const auto& c : cs) {
    const double d = distance(x, c.center);
    total += sq(d - c.lower);
    if (c.upper) total += sq(d - *c.upper);
  }
  return total;
}

double squared_distance_residual_norm(const Point2D& x,
                                      const std::vector<AnnulusConstraint>& cs) {
  check_constraints(cs);
  double total = 0.0;
  for (const auto& c : cs) {
    const double d2 = squared_distance(x, c.center);
    total += sq(d2 - sq(c.lower));
    if (c.upper) total += sq(d2 - sq(*c.upper));
  }
  return std::sqrt(total);
}

SolveResult solve_relaxation(const RelaxedProblem& problem, double tol, int max_iter) {
  if (!(tol > 0.0)) throw ValidationError("solver tolerance must be positive");
  if (max_iter < 1) throw ValidationError("max_iter must be at least 1");
  check_constraints(problem.constraints);

  const double scale = instance_scale(problem.constraints);
  const CenterGeometry geom = analyze_centers(problem.constraints, scale);
  if (geom.single_center) {
    return solve_single_center(problem, tol);
  }

  // Solve in center-of-centers coordinates; v and t are shift-invariant.
  Point2D c0{0.0, 0.0};
  for (const auto& c : problem.constraints) {
    c0.x += c.center.x;
    c0.y += c.center.y;
  }
  c0.x /= static_cast<double>(problem.constraints.size());
  c0.y /= static_cast<double>(problem.constraints.size());

  std::vector<AnnulusConstraint> shifted = problem.constraints;
  for (auto& c : shifted) {
    c.center.x -= c0.x;
    c.center.y -= c0.y;
  }

  // Rescale so centers and radii are of order one: raw field coordinates push
  // the residuals to 1e4 and leave t four orders of magnitude out of scale
  // with x, which ruins the Newton system conditioning. Lengths scale by
  // unit, y and t by unit^2; the central path itself is scale-equivariant.
  double unit = 1.0;
  for (const auto& c : shifted) {
    unit = std::max({unit, std::abs(c.center.x), std::abs(c.center.y),
                     c.upper ? *c.upper : c.lower});
  }
  for (auto& c : shifted) {
    c.center.x /= unit;
    c.center.y /= unit;
    c.lower /= unit;
    if (c.upper) c.upper = *c.upper / unit;
  }
  const RelaxedProblem local = RelaxedProblem::build(shifted);

  const double unit2 = unit * unit;
  BarrierState st =
      barrier_solve(local.coeffs, local.offsets, tol, max_iter, 1.0 / unit2);
  st.u[0] *= unit2;
  st.u[1] *= unit;
  st.u[2] *= unit;
  st.u[3] *= unit2;
  st.gap *= unit2;

  SolveResult res;
  res.x_hat = Point2D{st.u[1] + c0.x, st.u[2] + c0.y};
  res.y = st.u[0] + 2.0 * (c0.x * res.x_hat.x + c0.y * res.x_hat.y) -
          (sq(c0.x) + sq(c0.y));
  res.objective_value = st.u[3];
  res.newton_iters = st.iters;
  const double t_scale = 1.0 + std::abs(res.objective_value);
  res.kkt_residual = std::max(st.gap / t_scale, std::min(st.lambda2, 1.0));
  res.status = st.converged ? SolveStatus::optimal : SolveStatus::max_iterations;

  // Collinear centers leave one direction of x unseen by v; the optimum is a
  // segment, and we report its minimum-norm point when it has real extent.
  if (st.converged && geom.collinear) {
    const Point2D d{-geom.line_dir.y, geom.line_dir.x};
    const Point2D a0 = geom.distinct.front();
    const double dy = 2.0 * (a0.x * d.x + a0.y * d.y);
    const double g = dy - 2.0 * (res.x_hat.x * d.x + res.x_hat.y * d.y);
    const double slack = res.y - (sq(res.x_hat.x) + sq(res.x_hat.y));
    // Discount the barrier's interior offset so boundary-pinned optima do not
    // read as segments.
    const double extent_slack = std::max(slack - 2.0 * st.gap, 0.0);
    const double extent = std::sqrt(sq(g) + 4.0 * extent_slack);
    if (extent > 1e-3 * (1.0 + scale)) {
      const double span = std::sqrt(std::max(sq(g) + 4.0 * std::max(slack, 0.0), 0.0));
      const double s_lo = 0.5 * (g - span);
      const double s_hi = 0.5 * (g + span);
      const double s_opt =
          std::clamp(-(res.x_hat.x * d.x + res.x_hat.y * d.y), s_lo, s_hi);
      res.x_hat.x += s_opt * d.x;
      res.x_hat.y += s_opt * d.y;
      res.y += s_opt * dy;
      res.status = SolveStatus::degenerate;
    }
  }

  res.relaxation_tight = polish_is_tight(problem, res, tol);
  return res;
}

Rect default_search_bbox(const std::vector<AnnulusConstraint>& cs) {
  check_constraints(cs);
  Point2D lo{kInf, kInf};
  Point2D hi{-kInf, -kInf};
  double max_radius = 0.0;
  for (const auto& c : cs) {
    lo.x = std::min(lo.x, c.center.x);
    lo.y = std::min(lo.y, c.center.y);
    hi.x = std::max(hi.x, c.center.x);
    hi.y = std::max(hi.y, c.center.y);
    max_radius = std::max(max_radius, c.upper ? *c.upper : c.lower);
  }
  const double span = std::max(hi.x - lo.x, hi.y - lo.y);
  const double pad = max_radius + 0.25 * span + 1.0;
  return Rect{{lo.x - pad, lo.y - pad}, {hi.x + pad, hi.y + pad}};
}

OracleResult oracle_grid(const std::vector<AnnulusConstraint>& cs, const Rect& bbox,
                         double coarse_step, int refine_levels) {
  check_constraints(cs);
  if (!(coarse_step > 0.0) || !(bbox.hi.x > bbox.lo.x) || !(bbox.hi.y > bbox.lo.y)) {
    throw ValidationError("oracle grid needs a positive step and a non-degenerate box");
  }
  const RelaxedProblem pb = RelaxedProblem::build(cs);
  const Eigen::Index m = pb.offsets.size();

  // With the y-column all ones, the relaxed objective at fixed x minimizes in
  // closed form over y >= |x|^2.
  const auto eval = [&](double px, double py) {
    double q_sum = 0.0;
    double best = 0.0;
    for (Eigen::Index r = 0; r < m; ++r) {
      q_sum += pb.coeffs(r, 1) * px + pb.coeffs(r, 2) * py + pb.offsets[r];
    }
    const double y = std::max(-q_sum / static_cast<double>(m), px * px + py * py);
    for (Eigen::Index r = 0; r < m; ++r) {
      best += sq(y + pb.coeffs(r, 1) * px + pb.coeffs(r, 2) * py + pb.offsets[r]);
    }
    return std::sqrt(best);
  };

  OracleResult out{{bbox.lo.x, bbox.lo.y}, kInf};
  const auto scan = [&](double cx, double cy, double half_extent, double step) {
    const int n = static_cast<int>(std::ceil(half_extent / step));
    for (int i = -n; i <= n; ++i) {
      for (int j = -n; j <= n; ++j) {
        const double px = cx + i * step;
        const double py = cy + j * step;
        const double val = eval(px, py);
        if (val < out.value) {
          out.value = val;
          out.position = Point2D{px, py};
        }
      }
    }
  };

  const double cx = 0.5 * (bbox.lo.x + bbox.hi.x);
  const double cy = 0.5 * (bbox.lo.y + bbox.hi.y);
  const double half = 0.5 * std::max(bbox.hi.x - bbox.lo.x, bbox.hi.y - bbox.lo.y);
  scan(cx, cy, half, coarse_step);

  double step = coarse_step;
  for (int level = 0; level < refine_levels; ++level) {
    const Point2D center = out.position;
    const double window = 3.0 * step;
    step /= 10.0;
    scan(center.x, center.y, window, step);
  }
  return out;
}

std::optional<SolveResult> estimate_position(const std::vector<AnnulusConstraint>& constraints,
                                             const SolverConfig& config) {
  if (constraints.empty()) return std::nullopt;
  return solve_relaxation(RelaxedProblem::build(constraints), config.tol, config.max_iter);
}

}  // namespace mobiloc
