#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mobiloc/harness.hpp"

namespace {

using namespace mobiloc;

std::string fd(double v) { return detail::format_double(v); }

std::vector<AnnulusConstraint> read_constraint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path + ": cannot open file");
  }
  std::vector<AnnulusConstraint> cs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string sx, sy, slo, sup;
    if (!(fields >> sx)) continue;  // blank line
    if (!(fields >> sy >> slo >> sup)) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected 'cx cy lower upper' (upper may be '-')");
    }
    std::string extra;
    if (fields >> extra) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": trailing field '" + extra + "'");
    }
    const auto num = [&](const std::string& s) {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || p != s.data() + s.size()) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
      }
      return v;
    };
    AnnulusConstraint c;
    c.center = {num(sx), num(sy)};
    c.lower = num(slo);
    if (sup != "-") c.upper = num(sup);
    cs.push_back(c);
  }
  return cs;
}

int cmd_validate(const std::string& path) {
  const ScenarioConfig sc = load_scenario(path);
  std::cout << path << ": ok\n";
  std::cout << "field: " << fd(sc.field_width) << " x " << fd(sc.field_height) << " m\n";
  std::cout << "nodes: " << sc.nodes.size() << " listed, " << sc.random_nodes << " random\n";
  std::cout << "obstacles: " << sc.obstacles.size() << "\n";
  std::cout << "levels:";
  for (double r : sc.radio.level_ranges) std::cout << ' ' << fd(r);
  std::cout << " m, doi " << fd(sc.radio.doi) << ", fading_f " << fd(sc.radio.fading_f) << "\n";
  std::cout << "trajectory: " << to_string(sc.trajectory.pattern) << ", step "
            << fd(sc.trajectory.step) << " m\n";
  return 0;
}

int cmd_solve(const std::string& path, double tol, int max_iter) {
  const auto cs = read_constraint_file(path);
  const auto result = estimate_position(cs, SolverConfig{tol, max_iter});
  if (!result) {
    std::cerr << path << ": no constraints\n";
    return 2;
  }
  std::cout << "x_hat = (" << fd(result->x_hat.x) << ", " << fd(result->x_hat.y) << ")\n";
  std::cout << "y = " << fd(result->y) << "\n";
  std::cout << "t = " << fd(result->objective_value) << "\n";
  std::cout << "status = " << to_string(result->status) << "\n";
  std::cout << "tight = " << (result->relaxation_tight ? "true" : "false") << "\n";
  return 0;
}

int cmd_trial(const std::string& path, const TrialOptions& options, bool dump_logs,
              const std::optional<std::uint64_t>& seed) {
  ScenarioConfig sc = load_scenario(path);
  if (seed) sc.seed = *seed;
  const TrialDetail detail = run_trial_detailed(sc, options);

  if (dump_logs) {
    for (const auto& [node_id, log] : detail.logs) {
      std::cout << dump_observation_log(node_id, log);
    }
    if (options.relay_on) std::cout << dump_relay_events(detail.relay_events);
    std::cout << "\n";
  }

  for (const auto& nr : detail.result.nodes) {
    std::cout << "node " << nr.node_id << ": true (" << fd(nr.truth.x) << ", " << fd(nr.truth.y)
              << ")";
    if (nr.estimate) {
      std::cout << " est (" << fd(nr.estimate->x) << ", " << fd(nr.estimate->y) << ")";
    } else {
      std::cout << " est -";
    }
    std::cout << " [" << nr.status << ", " << nr.constraint_count << " constraints]\n";
  }
  std::cout << "stops: " << detail.stops.size() << "\n";
  std::cout << "localized: " << fd(detail.result.localized_fraction * 100.0) << "%\n";
  if (detail.result.error) {
    std::cout << "normalized error: " << fd(*detail.result.error * 100.0) << "%\n";
  } else {
    std::cout << "normalized error: n/a\n";
  }
  std::cout << "mean constraints per node: " << fd(detail.result.mean_constraints) << "\n";
  std::cout << "runtime: " << fd(detail.result.runtime_ms) << " ms\n";
  return 0;
}

int cmd_sweep(const std::string& path, const std::string& out_dir, int workers,
              const std::optional<std::uint64_t>& seed) {
  ExperimentConfig cfg = load_experiment(path);
  if (seed) cfg.base_seed = *seed;
  const SweepResult result = run_sweep(cfg, workers);
  write_sweep_outputs(result, out_dir);
  int failures = 0;
  for (const auto& pr : result.points) {
    std::cout << pr.point.name << ": mean error " << fd(pr.mean_error * 100.0)
              << "%, localized " << fd(pr.localized_fraction * 100.0) << "%\n";
    for (const auto& msg : pr.trial_errors) {
      std::cerr << pr.point.name << ": " << msg << "\n";
      ++failures;
    }
  }
  std::cout << "wrote " << out_dir << "/summary.csv and " << result.points.size()
            << " scatter file(s)\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mobile-anchor range-free localization workbench"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt =
      app.add_option("--seed", seed_value, "override the scenario seed / experiment base seed");
  int workers = 0;
  app.add_option("--workers", workers, "sweep worker threads (0 = auto)");

  std::string scn_path;
  auto* scenario = app.add_subcommand("scenario", "scenario file operations");
  auto* validate = scenario->add_subcommand("validate", "parse and validate a scenario file");
  validate->add_option("path", scn_path, "scenario file")->required();
  scenario->require_subcommand(1);

  std::string cons_path;
  double tol = 1e-8;
  int max_iter = 200;
  auto* solve = app.add_subcommand("solve", "solve one constraint set");
  solve->add_option("constraints", cons_path, "file with 'cx cy lower upper|-' lines")
      ->required();
  solve->add_option("--tol", tol, "duality gap tolerance");
  solve->add_option("--max-iter", max_iter, "Newton iteration cap");

  std::string trial_path;
  std::string relay_word = "on";
  std::string estimator_word = "convex";
  bool dump_logs = false;
  auto* trial = app.add_subcommand("trial", "run one localization trial");
  trial->add_option("scenario", trial_path, "scenario file")->required();
  trial->add_option("--relay", relay_word, "relay phase on|off")
      ->check(CLI::IsMember({"on", "off"}));
  trial->add_option("--estimator", estimator_word, "convex|baseline")
      ->check(CLI::IsMember({"convex", "baseline"}));
  trial->add_flag("--dump-logs", dump_logs, "print observation logs and relay events");

  std::string exp_path;
  std::string out_dir;
  auto* sweep = app.add_subcommand("sweep", "run an experiment sweep");
  sweep->add_option("experiment", exp_path, "experiment file")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  std::optional<std::uint64_t> seed;
  if (seed_opt->count() > 0) seed = seed_value;

  try {
    if (validate->parsed()) return cmd_validate(scn_path);
    if (solve->parsed()) return cmd_solve(cons_path, tol, max_iter);
    if (trial->parsed()) {
      TrialOptions options;
      options.relay_on = relay_word == "on";
      options.estimator = mobiloc::estimator_from_word(estimator_word);
      return cmd_trial(trial_path, options, dump_logs, seed);
    }
    if (sweep->parsed()) return cmd_sweep(exp_path, out_dir, workers, seed);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
