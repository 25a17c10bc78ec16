// End-to-end acceptance checks. One line per criterion; exit code is the
// number of failures.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mobiloc/harness.hpp"
#include "mobiloc/rng.hpp"

using namespace mobiloc;
namespace fs = std::filesystem;

namespace {

int failures = 0;

std::string strf(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

void report(int crit, bool ok, const std::string& detail) {
  std::printf("%s crit-%d: %s\n", ok ? "PASS" : "FAIL", crit, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

AnnulusConstraint annulus(double cx, double cy, double lo, std::optional<double> up) {
  AnnulusConstraint c;
  c.center = {cx, cy};
  c.lower = lo;
  c.upper = up;
  return c;
}

// Random instances spanning feasible and infeasible cases: half the annuli
// contain a common ground-truth point, the rest are unrelated disks.
std::vector<AnnulusConstraint> random_instance(std::uint64_t seed) {
  SplitMix rng(mix(seed, 1, 2, 3));
  const int n = 3 + static_cast<int>(rng.next_uniform01() * 8.0);
  const Point2D truth{rng.next_uniform01() * 100.0, rng.next_uniform01() * 100.0};
  std::vector<AnnulusConstraint> cs;
  for (int i = 0; i < n; ++i) {
    AnnulusConstraint c;
    c.center = {rng.next_uniform01() * 100.0, rng.next_uniform01() * 100.0};
    const double d = distance(truth, c.center);
    if (rng.next_uniform01() < 0.5) {
      c.lower = std::max(0.0, d - (1.0 + rng.next_uniform01() * 9.0));
      c.upper = d + 1.0 + rng.next_uniform01() * 9.0;
    } else {
      c.lower = rng.next_uniform01() * 20.0;
      c.upper = c.lower + 1.0 + rng.next_uniform01() * 15.0;
    }
    if (rng.next_uniform01() < 0.15) c.upper.reset();
    cs.push_back(c);
  }
  return cs;
}

void crit1() {
  const double start = now_ms();
  double worst_obj = 0.0;  // |t - oracle| / allowed
  double worst_pos = 0.0;
  int degenerate = 0;
  for (int k = 0; k < 100; ++k) {
    const auto cs = random_instance(777 + static_cast<std::uint64_t>(k));
    const auto res = solve_relaxation(RelaxedProblem::build(cs));
    const auto oracle = oracle_grid(cs, default_search_bbox(cs), 1.0, 3);
    const double allowed = std::max(1e-6, 1e-4 * std::abs(oracle.value));
    worst_obj = std::max(worst_obj, std::abs(res.objective_value - oracle.value) / allowed);
    if (res.status == SolveStatus::degenerate) {
      ++degenerate;
      continue;
    }
    worst_pos = std::max(worst_pos, distance(res.x_hat, oracle.position));
  }
  const double ms = now_ms() - start;
  const bool ok = worst_obj <= 1.0 && worst_pos <= 1e-3 && ms < 10000.0;
  report(1, ok,
         strf("oracle equivalence on 100 instances: obj diff %.3f of allowance, "
              "pos diff %.2e m (limit 1e-3), %d degenerate, %.0f ms",
              worst_obj, worst_pos, degenerate, ms));
}

void crit2() {
  const std::vector<AnnulusConstraint> three = {
      annulus(0, 0, std::sqrt(16.0), std::sqrt(34.0)),
      annulus(10, 0, std::sqrt(56.0), std::sqrt(74.0)),
      annulus(0, 10, std::sqrt(36.0), std::sqrt(54.0)),
  };
  const auto a = solve_relaxation(RelaxedProblem::build(three));
  const double t_expect = 9.0 * std::sqrt(6.0);
  const double pos_err = std::max(std::abs(a.x_hat.x - 3.0), std::abs(a.x_hat.y - 4.0));
  const double t_rel = std::abs(a.objective_value - t_expect) / t_expect;

  const std::vector<AnnulusConstraint> pair = {annulus(0, 0, 0, 1.0),
                                               annulus(10, 0, 0, 1.0)};
  const auto b = solve_relaxation(RelaxedProblem::build(pair));
  const double pair_err = distance(b.x_hat, Point2D{5.0, 0.0});

  const bool ok = pos_err <= 1e-4 && t_rel <= 1e-6 && pair_err <= 1e-3;
  report(2, ok,
         strf("analytic instances: three-anchor pos off by %.2e (limit 1e-4), "
              "t rel err %.2e (limit 1e-6); infeasible pair off by %.2e (limit 1e-3)",
              pos_err, t_rel, pair_err));
}

void crit3(const ScenarioConfig& ideal) {
  long long total = 0;
  long long violations = 0;
  for (int i = 0; i < 100; ++i) {
    ScenarioConfig sc = ideal;
    sc.seed = 1 + static_cast<std::uint64_t>(i);
    const TrialDetail td = run_trial_detailed(sc, TrialOptions{true, Estimator::convex});
    for (const auto& node : td.materialized.nodes) {
      const auto it = td.constraints.find(node.id);
      if (it == td.constraints.end()) continue;
      for (const auto& c : it->second) {
        ++total;
        const double d = distance(node.position, c.center);
        if (!(d > c.lower) && c.lower > 0.0) ++violations;
        if (c.upper && !(d <= *c.upper)) ++violations;
      }
    }
  }
  report(3, violations == 0,
         strf("ideal-environment feasibility: %lld violations over %lld constraints "
              "in 100 trials",
              violations, total));
}

struct MeanRun {
  double mean = 0.0;
  double ms = 0.0;
  std::vector<double> errors;
};

MeanRun mean_error_run(const ScenarioConfig& base, int trials, std::uint64_t seed0,
                       const TrialOptions& options) {
  MeanRun out;
  const double start = now_ms();
  for (int i = 0; i < trials; ++i) {
    ScenarioConfig sc = base;
    sc.seed = seed0 + static_cast<std::uint64_t>(i);
    const TrialResult r = run_trial(sc, options);
    out.errors.push_back(r.error.value_or(1.0));
    out.mean += out.errors.back();
  }
  out.mean /= static_cast<double>(trials);
  out.ms = now_ms() - start;
  return out;
}

// Paired z statistic for mean(a - b); negative favors a.
double paired_z(const std::vector<double>& a, const std::vector<double>& b) {
  const int n = static_cast<int>(a.size());
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d;
    sum2 += d * d;
  }
  const double mean = sum / n;
  const double var = (sum2 - sum * sum / n) / (n - 1);
  return mean / (std::sqrt(var) / std::sqrt(static_cast<double>(n)));
}

double crit4(const ScenarioConfig& ideal) {
  ScenarioConfig sc = ideal;
  sc.radio.doi = 0.2;
  const MeanRun run = mean_error_run(sc, 100, 1, TrialOptions{true, Estimator::convex});
  const double pct = run.mean * 100.0;
  const bool ok = pct >= 5.0 && pct <= 20.0 && run.ms < 120000.0;
  report(4, ok,
         strf("DOI 0.2 open field, 100 trials: mean error %.2f%% (bracket [5, 20]), "
              "%.1f s",
              pct, run.ms / 1000.0));
  return run.mean;
}

void crit5(const ScenarioConfig& obstacle, double crit4_mean) {
  const MeanRun run = mean_error_run(obstacle, 100, 1, TrialOptions{true, Estimator::convex});
  const double pct = run.mean * 100.0;
  const bool ok = pct >= 6.0 && pct <= 25.0 && run.mean > crit4_mean;
  report(5, ok,
         strf("DOI 0.2 + fading 0.1 + central obstacle, 100 trials: mean error %.2f%% "
              "(bracket [6, 25]), above open-field %.2f%%: %s",
              pct, crit4_mean * 100.0, run.mean > crit4_mean ? "yes" : "no"));
}

void crit6(const ScenarioConfig& obstacle) {
  ScenarioConfig sc = obstacle;
  sc.trajectory.step = 25.0;  // sparse pass: shadows the relay has to fill
  std::vector<double> err_on;
  std::vector<double> err_off;
  int fraction_regressions = 0;
  for (int i = 0; i < 100; ++i) {
    ScenarioConfig t = sc;
    t.seed = 1 + static_cast<std::uint64_t>(i);
    const TrialResult on = run_trial(t, TrialOptions{true, Estimator::convex});
    const TrialResult off = run_trial(t, TrialOptions{false, Estimator::convex});
    err_on.push_back(on.error.value_or(1.0));
    err_off.push_back(off.error.value_or(1.0));
    if (on.localized_fraction < off.localized_fraction) ++fraction_regressions;
  }
  const double z = paired_z(err_on, err_off);
  const bool ok = fraction_regressions == 0 && z < -3.0;
  report(6, ok,
         strf("relay benefit, 100 paired trials: localized-fraction regressions %d "
              "(need 0), error z %+.2f (need < -3)",
              fraction_regressions, z));
}

void crit7(const ScenarioConfig& ideal, const ScenarioConfig& obstacle) {
  const auto compare = [](ScenarioConfig sc, double step, double* z_out) {
    sc.trajectory.step = step;
    std::vector<double> conv;
    std::vector<double> base;
    for (int i = 0; i < 100; ++i) {
      sc.seed = 1000 + static_cast<std::uint64_t>(i);
      conv.push_back(run_trial(sc, TrialOptions{true, Estimator::convex}).error.value_or(1.0));
      base.push_back(
          run_trial(sc, TrialOptions{true, Estimator::baseline}).error.value_or(1.0));
    }
    *z_out = paired_z(conv, base);
  };
  double z_ideal = 0.0;
  double z_rough = 0.0;
  compare(ideal, 4.0, &z_ideal);
  compare(obstacle, 7.5, &z_rough);
  const bool ok = z_ideal < -3.0 && z_rough < -3.0;
  report(7, ok,
         strf("convex vs grid baseline, 100 paired trials each: ideal z %+.2f, "
              "non-ideal z %+.2f (both need < -3)",
              z_ideal, z_rough));
}

void crit8() {
  ContentionConfig cfg;
  SensorNode node;
  node.num_neighbors = 1;

  int bad = 0;
  const auto expect = [&bad](std::optional<double> got, double want, const char* what) {
    if (!got || std::abs(*got - want) > 1e-15) {
      std::fprintf(stderr, "backoff case failed: %s\n", what);
      ++bad;
    }
  };

  // substitution table
  cfg.alpha = 0.5;
  cfg.beta = 0.5;
  cfg.max_delay = 0.1;
  node.initial_energy = 1.0;
  node.used_energy = 0.2;
  node.num_neighbors = 10;
  expect(backoff_delay(node, cfg), 0.015, "mid-life node, ten neighbors");

  cfg.alpha = 1.0;
  cfg.beta = 0.0;
  node.used_energy = 0.0;
  node.num_neighbors = 3;
  expect(backoff_delay(node, cfg), 0.0, "fresh battery extreme");

  cfg.alpha = 0.0;
  cfg.beta = 1.0;
  cfg.max_delay = 1.0;
  node.num_neighbors = 1;
  expect(backoff_delay(node, cfg), 1.0, "isolated node extreme");

  cfg.alpha = 0.5;
  cfg.beta = 0.5;
  cfg.max_delay = 0.1;
  node.used_energy = 1.0;
  node.num_neighbors = 1;
  expect(backoff_delay(node, cfg), 0.1, "exhausted isolated node hits max_delay");

  cfg.alpha = 0.3;
  cfg.beta = 0.7;
  cfg.max_delay = 0.2;
  node.used_energy = 0.5;
  node.num_neighbors = 7;
  expect(backoff_delay(node, cfg), (0.3 * 0.5 + 0.7 / 7.0) * 0.2, "uneven weights");

  // winner invariant under permutation
  SensorNode a;
  a.id = 4;
  a.position = {1.0, 0.0};
  a.used_energy = 0.2;
  a.num_neighbors = 10;
  SensorNode b = a;
  b.id = 2;
  b.position = {2.0, 0.0};
  b.used_energy = 0.6;
  ContentionConfig run_cfg;
  run_cfg.relay_range = 15.0;
  const Point2D stop{0.0, 0.0};
  const auto fwd = run_contention(stop, 0, {a, b}, run_cfg, {});
  const auto rev = run_contention(stop, 0, {b, a}, run_cfg, {});
  const bool permutation_ok =
      fwd && rev && *fwd == *rev && fwd->winner_node_id == a.id &&
      fwd->suppressed_node_ids == std::vector<int>{b.id};

  // equal delays tie to the smaller id
  SensorNode c = a;
  c.id = 9;
  const auto tie = run_contention(stop, 0, {c, a}, run_cfg, {});
  const bool tie_ok = tie && tie->winner_node_id == a.id;

  const bool ok = bad == 0 && permutation_ok && tie_ok;
  report(8, ok,
         strf("backoff substitution table (5 cases): %s; permutation invariance: %s; "
              "tie-break: %s",
              bad == 0 ? "exact" : "mismatch", permutation_ok ? "holds" : "broken",
              tie_ok ? "smaller id wins" : "broken"));
}

// summary.csv with the runtime column (the last one) stripped per line
std::string strip_runtime(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto cut = line.rfind(',');
    out << (cut == std::string::npos ? line : line.substr(0, cut)) << '\n';
  }
  return out.str();
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void crit9(const std::string& experiment_text) {
  const ExperimentConfig config = parse_experiment(experiment_text);
  const fs::path base = fs::temp_directory_path();
  const fs::path dir_a = base / "mobiloc_accept_sweep_a";
  const fs::path dir_b = base / "mobiloc_accept_sweep_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  const SweepResult run_a = run_sweep(config, 1);
  const SweepResult run_b = run_sweep(config, 2);
  write_sweep_outputs(run_a, dir_a.string());
  write_sweep_outputs(run_b, dir_b.string());

  bool identical = strip_runtime(dir_a / "summary.csv") == strip_runtime(dir_b / "summary.csv");
  int files = 1;
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    const auto name = entry.path().filename();
    if (name == "summary.csv") continue;
    ++files;
    if (slurp(entry.path()) != slurp(dir_b / name)) identical = false;
  }
  report(9, identical,
         strf("sweep determinism: %d output files byte-identical across reruns "
              "(runtime column excluded), worker counts 1 vs 2",
              files));
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "scenarios";
  const ScenarioConfig ideal = load_scenario(dir + "/ideal.scn");
  const ScenarioConfig obstacle = load_scenario(dir + "/obstacle.scn");
  std::ifstream exp_in(dir + "/doi_sweep.exp", std::ios::binary);
  std::stringstream exp_text;
  exp_text << exp_in.rdbuf();

  crit1();
  crit2();
  crit3(ideal);
  const double open_field_mean = crit4(ideal);
  crit5(obstacle, open_field_mean);
  crit6(obstacle);
  crit7(ideal, obstacle);
  crit8();
  crit9(exp_text.str());

  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures;
}
