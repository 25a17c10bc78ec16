"""Mobile-anchor range-free localization workbench."""

from ._mobiloc import (
    AnnulusConstraint,
    NodeResult,
    ParseError,
    Point2D,
    ScenarioConfig,
    SolveResult,
    TrialResult,
    ValidationError,
    load_scenario,
    parse_scenario,
    run_sweep_csv,
    run_trial,
    solve,
)

__all__ = [
    "AnnulusConstraint",
    "NodeResult",
    "ParseError",
    "Point2D",
    "ScenarioConfig",
    "SolveResult",
    "TrialResult",
    "ValidationError",
    "load_scenario",
    "parse_scenario",
    "run_sweep_csv",
    "run_trial",
    "solve",
]
