"""Threshold public-goods contribution game simulator.

Core round mechanics (:mod:`contribsim.game`), covering-knapsack solvers
(:mod:`contribsim.solver`), contribution strategies
(:mod:`contribsim.strategies`), evaluation measures
(:mod:`contribsim.metrics`), scenario generators
(:mod:`contribsim.scenarios`) and the experiment harness
(:mod:`contribsim.harness`).
"""

from .game import (
    Action,
    PayoffParams,
    RoundInput,
    RoundOutcome,
    agent_utility,
    evaluate_round,
    is_threshold_pgg,
    quality,
    round_success,
)
from .harness import ExperimentConfig, ResultRow, run_simulation, sweep, write_results
from .metrics import MEASURES, MeasureSeries, aggregate, gini
from .solver import CoverInstance, CoverSolution, solve_exact, solve_fptas

__version__ = "0.1.0"

__all__ = [
    "Action",
    "CoverInstance",
    "CoverSolution",
    "ExperimentConfig",
    "MEASURES",
    "MeasureSeries",
    "PayoffParams",
    "ResultRow",
    "RoundInput",
    "RoundOutcome",
    "agent_utility",
    "aggregate",
    "evaluate_round",
    "gini",
    "is_threshold_pgg",
    "quality",
    "round_success",
    "run_simulation",
    "solve_exact",
    "solve_fptas",
    "sweep",
    "write_results",
    "__version__",
]
