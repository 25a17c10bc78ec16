#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "mobiloc/harness.hpp"

namespace py = pybind11;
using namespace mobiloc;

namespace {

AnnulusConstraint make_constraint(double cx, double cy, double lower,
                                  std::optional<double> upper, bool via_relay) {
  AnnulusConstraint c;
  c.center = {cx, cy};
  c.lower = lower;
  c.upper = upper;
  c.via_relay = via_relay;
  return c;
}

}  // namespace

PYBIND11_MODULE(_mobiloc, m) {
  m.doc() = "mobile-anchor range-free localization workbench";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  py::class_<Point2D>(m, "Point2D")
      .def(py::init<double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0)
      .def_readwrite("x", &Point2D::x)
      .def_readwrite("y", &Point2D::y)
      .def("__repr__", [](const Point2D& p) {
        return "Point2D(" + detail::format_double(p.x) + ", " + detail::format_double(p.y) + ")";
      });

  py::class_<AnnulusConstraint>(m, "AnnulusConstraint")
      .def(py::init(&make_constraint), py::arg("cx"), py::arg("cy"), py::arg("lower") = 0.0,
           py::arg("upper") = std::nullopt, py::arg("via_relay") = false)
      .def_readwrite("center", &AnnulusConstraint::center)
      .def_readwrite("lower", &AnnulusConstraint::lower)
      .def_readwrite("upper", &AnnulusConstraint::upper)
      .def_readwrite("via_relay", &AnnulusConstraint::via_relay);

  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("x_hat", &SolveResult::x_hat)
      .def_readonly("y", &SolveResult::y)
      .def_readonly("objective_value", &SolveResult::objective_value)
      .def_property_readonly("status",
                             [](const SolveResult& r) { return to_string(r.status); })
      .def_readonly("kkt_residual", &SolveResult::kkt_residual)
      .def_readonly("relaxation_tight", &SolveResult::relaxation_tight)
      .def_readonly("newton_iters", &SolveResult::newton_iters);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_property_readonly("field_width",
                             [](const ScenarioConfig& c) { return c.field_width; })
      .def_property_readonly("field_height",
                             [](const ScenarioConfig& c) { return c.field_height; })
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_property_readonly("node_count",
                             [](const ScenarioConfig& c) { return c.nodes.size(); })
      .def_property_readonly("obstacle_count",
                             [](const ScenarioConfig& c) { return c.obstacles.size(); })
      .def("serialize", &write_scenario);

  py::class_<NodeResult>(m, "NodeResult")
      .def_readonly("node_id", &NodeResult::node_id)
      .def_readonly("truth", &NodeResult::truth)
      .def_readonly("estimate", &NodeResult::estimate)
      .def_readonly("status", &NodeResult::status)
      .def_readonly("constraint_count", &NodeResult::constraint_count);

  py::class_<TrialResult>(m, "TrialResult")
      .def_readonly("nodes", &TrialResult::nodes)
      .def_readonly("error", &TrialResult::error)
      .def_readonly("localized_fraction", &TrialResult::localized_fraction)
      .def_readonly("mean_constraints", &TrialResult::mean_constraints)
      .def_readonly("runtime_ms", &TrialResult::runtime_ms);

  m.def("parse_scenario", &parse_scenario, py::arg("text"), py::arg("label") = "scenario");
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def(
      "solve",
      [](const std::vector<AnnulusConstraint>& cs, double tol, int max_iter) {
        auto result = estimate_position(cs, SolverConfig{tol, max_iter});
        if (!result) throw ValidationError("no constraints");
        return *result;
      },
      py::arg("constraints"), py::arg("tol") = 1e-8, py::arg("max_iter") = 200);
  m.def(
      "run_trial",
      [](const ScenarioConfig& scenario, bool relay_on, const std::string& estimator) {
        return run_trial(scenario, TrialOptions{relay_on, estimator_from_word(estimator)});
      },
      py::arg("scenario"), py::arg("relay_on") = true, py::arg("estimator") = "convex");
  m.def(
      "run_sweep_csv",
      [](const std::string& experiment_text, int workers) {
        return summary_csv(run_sweep(parse_experiment(experiment_text), workers));
      },
      py::arg("experiment_text"), py::arg("workers") = 1);
}
