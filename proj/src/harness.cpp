#include "mobiloc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "mobiloc/rng.hpp"

namespace mobiloc {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fd(double v) { return detail::format_double(v); }

}  // namespace

std::string to_string(Estimator estimator) {
  return estimator == Estimator::convex ? "convex" : "baseline";
}

Estimator estimator_from_word(const std::string& word) {
  if (word == "convex") return Estimator::convex;
  if (word == "baseline") return Estimator::baseline;
  throw ValidationError("unknown estimator '" + word + "' (expected convex or baseline)");
}

std::optional<double> normalized_error(const std::vector<Point2D>& truths,
                                       const std::vector<Point2D>& estimates, double r) {
  if (truths.size() != estimates.size()) {
    throw ValidationError("normalized_error needs equally long truth and estimate lists");
  }
  if (!(r > 0.0)) {
    throw ValidationError("normalized_error needs a positive radio range");
  }
  if (truths.empty()) return std::nullopt;
  double total = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    total += distance(truths[i], estimates[i]);
  }
  return total / (static_cast<double>(truths.size()) * r);
}

ScenarioConfig materialize_scenario(const ScenarioConfig& config) {
  ScenarioConfig out = config;
  resolve_scenario_defaults(out);

  int next_id = 0;
  for (const auto& node : out.nodes) next_id = std::max(next_id, node.id + 1);

  for (int k = 0; k < config.random_nodes; ++k) {
    SensorNode node;
    node.id = next_id++;
    bool placed = false;
    for (std::uint64_t attempt = 0; attempt < 10000; ++attempt) {
      const std::uint64_t key = static_cast<std::uint64_t>(k);
      const double ux = uniform01(mix(out.seed, stream::deploy, key, 2 * attempt));
      const double uy = uniform01(mix(out.seed, stream::deploy, key, 2 * attempt + 1));
      const Point2D p{out.field_width * ux, out.field_height * uy};
      bool blocked = false;
      for (const auto& poly : out.obstacles) {
        if (point_strictly_inside(p, poly)) {
          blocked = true;
          break;
        }
      }
      if (!blocked) {
        node.position = p;
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw ValidationError("could not place random node " + std::to_string(node.id) +
                            " outside the obstacles");
    }
    out.nodes.push_back(node);
  }
  out.random_nodes = 0;

  const double r1 = out.radio.level_ranges.front();
  for (auto& node : out.nodes) {
    if (node.num_neighbors) continue;
    int count = 0;
    for (const auto& other : out.nodes) {
      if (other.id != node.id && distance(node.position, other.position) <= r1) ++count;
    }
    node.num_neighbors = count;
  }

  out.nodes = auto_flag_boundary(std::move(out.nodes), out.obstacles, out.boundary_distance);
  validate_scenario(out);
  return out;
}

namespace {

struct GridAxis {
  double start = 0.0;
  int count = 0;
};

// Absolute lattice at the given pitch so symmetric instances stay symmetric.
GridAxis snapped_axis(double lo, double hi, double h) {
  GridAxis axis;
  axis.start = std::ceil(lo / h) * h;
  axis.count = axis.start > hi ? 0 : static_cast<int>(std::floor((hi - axis.start) / h)) + 1;
  return axis;
}

double violation_at(const Point2D& p, const std::vector<AnnulusConstraint>& cs) {
  double total = 0.0;
  for (const auto& c : cs) {
    const double d = distance(p, c.center);
    total += std::max(0.0, c.lower - d);
    if (c.upper) total += std::max(0.0, d - *c.upper);
  }
  return total;
}

}  // namespace

Point2D baseline_estimate(const std::vector<AnnulusConstraint>& cs) {
  if (cs.empty()) {
    throw ValidationError("baseline estimate needs at least one constraint");
  }
  constexpr double kPitch = 0.5;

  // Feasible pass over the intersection of the upper-bound boxes.
  Point2D ilo{-kInf, -kInf};
  Point2D ihi{kInf, kInf};
  bool any_upper = false;
  for (const auto& c : cs) {
    if (!c.upper) continue;
    any_upper = true;
    ilo.x = std::max(ilo.x, c.center.x - *c.upper);
    ilo.y = std::max(ilo.y, c.center.y - *c.upper);
    ihi.x = std::min(ihi.x, c.center.x + *c.upper);
    ihi.y = std::min(ihi.y, c.center.y + *c.upper);
  }
  if (any_upper && ilo.x <= ihi.x && ilo.y <= ihi.y) {
    const GridAxis ax = snapped_axis(ilo.x, ihi.x, kPitch);
    const GridAxis ay = snapped_axis(ilo.y, ihi.y, kPitch);
    double sx = 0.0, sy = 0.0;
    long count = 0;
    for (int i = 0; i < ax.count; ++i) {
      for (int j = 0; j < ay.count; ++j) {
        const Point2D p{ax.start + i * kPitch, ay.start + j * kPitch};
        bool ok = true;
        for (const auto& c : cs) {
          const double d = distance(p, c.center);
          if (d < c.lower || (c.upper && d > *c.upper)) {
            ok = false;
            break;
          }
        }
        if (ok) {
          sx += p.x;
          sy += p.y;
          ++count;
        }
      }
    }
    if (count > 0) {
      return Point2D{sx / static_cast<double>(count), sy / static_cast<double>(count)};
    }
  }

  // Violation pass over the union of the constraint boxes: centroid of the
  // cells tying for minimum total violation.
  Point2D ulo{kInf, kInf};
  Point2D uhi{-kInf, -kInf};
  for (const auto& c : cs) {
    const double radius = (c.upper ? *c.upper : c.lower) + 2.0;
    ulo.x = std::min(ulo.x, c.center.x - radius);
    ulo.y = std::min(ulo.y, c.center.y - radius);
    uhi.x = std::max(uhi.x, c.center.x + radius);
    uhi.y = std::max(uhi.y, c.center.y + radius);
  }
  const GridAxis ax = snapped_axis(ulo.x, uhi.x, kPitch);
  const GridAxis ay = snapped_axis(ulo.y, uhi.y, kPitch);
  double best = kInf;
  double sx = 0.0, sy = 0.0;
  long count = 0;
  for (int i = 0; i < ax.count; ++i) {
    for (int j = 0; j < ay.count; ++j) {
      const Point2D p{ax.start + i * kPitch, ay.start + j * kPitch};
      const double v = violation_at(p, cs);
      if (v < best - 1e-9 * (1.0 + best)) {
        best = v;
        sx = p.x;
        sy = p.y;
        count = 1;
      } else if (v <= best + 1e-9 * (1.0 + best)) {
        sx += p.x;
        sy += p.y;
        ++count;
      }
    }
  }
  return Point2D{sx / static_cast<double>(count), sy / static_cast<double>(count)};
}

TrialDetail run_trial_detailed(const ScenarioConfig& scenario, const TrialOptions& options) {
  const auto started = std::chrono::steady_clock::now();

  TrialDetail detail;
  detail.materialized = materialize_scenario(scenario);
  const ScenarioConfig& sc = detail.materialized;

  detail.stops = generate_trajectory(sc.trajectory, sc.field_width, sc.field_height, sc.seed);
  detail.logs = simulate_beaconing(sc, detail.stops);
  if (options.relay_on) {
    detail.relay_events = relay_pass(sc, detail.stops, detail.logs);
  }

  std::vector<Point2D> truths;
  std::vector<Point2D> estimates;
  double constraint_total = 0.0;

  for (const auto& node : sc.nodes) {
    const auto constraints =
        extract_constraints(detail.logs.at(node.id), sc.radio, sc.extraction);
    constraint_total += static_cast<double>(constraints.size());

    NodeResult nr;
    nr.node_id = node.id;
    nr.truth = node.position;
    nr.constraint_count = static_cast<int>(constraints.size());
    if (constraints.empty()) {
      nr.status = "not_localized";
    } else if (options.estimator == Estimator::baseline) {
      nr.estimate = baseline_estimate(constraints);
      nr.status = "baseline";
    } else {
      const auto solved = estimate_position(constraints);
      nr.estimate = solved->x_hat;
      nr.status = to_string(solved->status);
    }
    if (nr.estimate) {
      truths.push_back(nr.truth);
      estimates.push_back(*nr.estimate);
    }
    detail.constraints.emplace(node.id, std::move(constraints));
    detail.result.nodes.push_back(std::move(nr));
  }

  const std::size_t total = sc.nodes.size();
  detail.result.error =
      truths.empty() ? std::nullopt
                     : normalized_error(truths, estimates, sc.radio.level_ranges.front());
  detail.result.localized_fraction =
      total == 0 ? 0.0 : static_cast<double>(truths.size()) / static_cast<double>(total);
  detail.result.mean_constraints =
      total == 0 ? 0.0 : constraint_total / static_cast<double>(total);
  detail.result.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
          .count();
  return detail;
}

TrialResult run_trial(const ScenarioConfig& scenario, const TrialOptions& options) {
  return run_trial_detailed(scenario, options).result;
}

namespace {

void check_experiment(const ExperimentConfig& cfg) {
  validate_scenario(cfg.base);
  if (cfg.trials_per_point < 1) {
    throw ValidationError("experiment: trials must be at least 1");
  }
  if (cfg.doi_values.empty() || cfg.fading_values.empty() || cfg.relay_values.empty() ||
      cfg.estimators.empty() || cfg.step_values.empty()) {
    throw ValidationError("experiment: every sweep axis needs at least one value");
  }
  for (double d : cfg.doi_values) {
    if (!(d >= 0.0 && d < 1.0)) {
      throw ValidationError("experiment: doi value " + fd(d) + " outside [0, 1)");
    }
  }
  for (double f : cfg.fading_values) {
    if (!(f >= 0.0 && f < 1.0)) {
      throw ValidationError("experiment: fading_f value " + fd(f) + " outside [0, 1)");
    }
  }
  for (double s : cfg.step_values) {
    if (!(s > 0.0)) {
      throw ValidationError("experiment: step value " + fd(s) + " must be positive");
    }
  }
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return static_cast<int>(std::max(1u, std::min(4u, hc == 0 ? 1u : hc)));
}

}  // namespace

ExperimentConfig parse_experiment(const std::string& text, const std::string& label) {
  const detail::ConfigDoc doc = detail::parse_config_text(text, label);
  ExperimentConfig cfg;
  cfg.base = detail::scenario_from_config_doc(doc, {"experiment"});

  cfg.doi_values = {cfg.base.radio.doi};
  cfg.fading_values = {cfg.base.radio.fading_f};
  cfg.relay_values = {true};
  cfg.estimators = {Estimator::convex};
  cfg.step_values = {cfg.base.trajectory.step};
  cfg.base_seed = cfg.base.seed;

  if (const auto* sec = doc.find_unique("experiment")) {
    for (const auto& e : sec->entries) {
      if (e.key == "doi") {
        cfg.doi_values = detail::parse_double_list(e, label);
      } else if (e.key == "fading_f") {
        cfg.fading_values = detail::parse_double_list(e, label);
      } else if (e.key == "relay") {
        cfg.relay_values.clear();
        for (const auto& word : detail::parse_word_list(e, label)) {
          if (word == "on") {
            cfg.relay_values.push_back(true);
          } else if (word == "off") {
            cfg.relay_values.push_back(false);
          } else {
            throw ParseError(label + ":" + std::to_string(e.line) + ": relay values are on/off, got '" +
                             word + "'");
          }
        }
      } else if (e.key == "estimator") {
        cfg.estimators.clear();
        for (const auto& word : detail::parse_word_list(e, label)) {
          cfg.estimators.push_back(estimator_from_word(word));
        }
      } else if (e.key == "step") {
        cfg.step_values = detail::parse_double_list(e, label);
      } else if (e.key == "trials") {
        cfg.trials_per_point = static_cast<int>(detail::parse_int(e, label));
      } else if (e.key == "base_seed") {
        cfg.base_seed = detail::parse_uint64(e, label);
      } else {
        throw ParseError(label + ":" + std::to_string(e.line) + ": unknown key '" + e.key +
                         "' in section [experiment]");
      }
    }
  }

  check_experiment(cfg);
  return cfg;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError(path + ": cannot open file");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment(buf.str(), path);
}

std::vector<SweepPoint> enumerate_sweep_points(const ExperimentConfig& cfg) {
  std::vector<SweepPoint> points;
  for (double doi : cfg.doi_values) {
    for (double f : cfg.fading_values) {
      for (bool relay : cfg.relay_values) {
        for (Estimator est : cfg.estimators) {
          for (double step : cfg.step_values) {
            SweepPoint p;
            p.doi = doi;
            p.fading_f = f;
            p.relay_on = relay;
            p.estimator = est;
            p.step = step;
            p.name = "doi" + fd(doi) + "_f" + fd(f) + "_relay_" + (relay ? "on" : "off") +
                     "_" + to_string(est) + "_step" + fd(step);
            points.push_back(std::move(p));
          }
        }
      }
    }
  }
  return points;
}

SweepResult run_sweep(const ExperimentConfig& cfg, int workers) {
  check_experiment(cfg);
  const int pool = resolve_workers(workers);

  SweepResult result;
  for (const SweepPoint& point : enumerate_sweep_points(cfg)) {
    const int trials = cfg.trials_per_point;
    std::vector<std::optional<TrialResult>> outcomes(static_cast<std::size_t>(trials));
    std::vector<std::string> failures(static_cast<std::size_t>(trials));

    ScenarioConfig variant = cfg.base;
    variant.radio.doi = point.doi;
    variant.radio.fading_f = point.fading_f;
    variant.trajectory.step = point.step;
    const TrialOptions options{point.relay_on, point.estimator};

    std::atomic<int> next{0};
    const auto worker = [&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= trials) break;
        ScenarioConfig sc = variant;
        sc.seed = cfg.base_seed + static_cast<std::uint64_t>(i);
        try {
          outcomes[static_cast<std::size_t>(i)] = run_trial(sc, options);
        } catch (const std::exception& ex) {
          failures[static_cast<std::size_t>(i)] =
              "trial " + std::to_string(i) + ": " + ex.what();
        }
      }
    };

    std::vector<std::thread> threads;
    const int spawn = std::min(pool, trials);
    threads.reserve(static_cast<std::size_t>(spawn));
    for (int i = 0; i < spawn; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    SweepPointResult pr;
    pr.point = point;
    pr.trials = trials;
    std::vector<double> errors;
    double fraction_sum = 0.0;
    double runtime_sum = 0.0;
    int completed = 0;
    for (int i = 0; i < trials; ++i) {
      const auto& outcome = outcomes[static_cast<std::size_t>(i)];
      if (!outcome) {
        pr.trial_errors.push_back(failures[static_cast<std::size_t>(i)]);
        continue;
      }
      ++completed;
      fraction_sum += outcome->localized_fraction;
      runtime_sum += outcome->runtime_ms;
      if (outcome->error) errors.push_back(*outcome->error);
      if (i == 0) pr.first_trial = *outcome;
    }

    if (errors.empty()) {
      pr.mean_error = pr.std_error = pr.min_error = pr.max_error = kNan;
    } else {
      const double n = static_cast<double>(errors.size());
      pr.mean_error = std::accumulate(errors.begin(), errors.end(), 0.0) / n;
      double ss = 0.0;
      for (double e : errors) ss += (e - pr.mean_error) * (e - pr.mean_error);
      pr.std_error = errors.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      pr.min_error = *std::min_element(errors.begin(), errors.end());
      pr.max_error = *std::max_element(errors.begin(), errors.end());
    }
    pr.localized_fraction = completed > 0 ? fraction_sum / completed : kNan;
    pr.mean_runtime_ms = completed > 0 ? runtime_sum / completed : kNan;
    result.points.push_back(std::move(pr));
  }
  return result;
}

std::string summary_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "sweep_point,doi,fading_f,relay,estimator,trials,mean_error,std_error,min_error,"
         "max_error,localized_fraction,mean_runtime_ms\n";
  for (const auto& pr : result.points) {
    out << pr.point.name << ',' << fd(pr.point.doi) << ',' << fd(pr.point.fading_f) << ','
        << (pr.point.relay_on ? "on" : "off") << ',' << to_string(pr.point.estimator) << ','
        << pr.trials << ',' << fd(pr.mean_error) << ',' << fd(pr.std_error) << ','
        << fd(pr.min_error) << ',' << fd(pr.max_error) << ',' << fd(pr.localized_fraction)
        << ',' << fd(pr.mean_runtime_ms) << '\n';
  }
  return out.str();
}

std::string scatter_csv(const TrialResult& trial) {
  std::ostringstream out;
  out << "node_id,true_x,true_y,est_x,est_y,status\n";
  for (const auto& node : trial.nodes) {
    out << node.node_id << ',' << fd(node.truth.x) << ',' << fd(node.truth.y) << ',';
    if (node.estimate) {
      out << fd(node.estimate->x) << ',' << fd(node.estimate->y);
    } else {
      out << "nan,nan";
    }
    out << ',' << node.status << '\n';
  }
  return out.str();
}

void write_sweep_outputs(const SweepResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  const auto write_file = [](const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw std::runtime_error(path.string() + ": cannot open file for writing");
    }
    out << content;
  };

  write_file(fs::path(out_dir) / "summary.csv", summary_csv(result));
  for (const auto& pr : result.points) {
    write_file(fs::path(out_dir) / ("scatter_" + pr.point.name + ".csv"),
               scatter_csv(pr.first_trial));
  }
}

}  // namespace mobiloc
