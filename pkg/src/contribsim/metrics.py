"""The six evaluation measures and cross-repetition aggregation.

Per-round measures quantify service provision (success), over-contribution
(efficiency), mean utility (welfare), non-disclosure (privacy) and
contribution inequality (fairness, per round and over time). Aggregation
turns repeated runs into per-timestep means with 95% confidence intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy import stats

from .errors import ContractViolation
from .game import Action, RoundOutcome

MEASURES = (
    "success",
    "efficiency",
    "welfare",
    "privacy",
    "fairness",
    "fairness_over_time",
)


@dataclass(frozen=True)
class MeasureSeries:
    """One measure's per-timestep (mean, 95% CI half-width) across repetitions."""

    measure_name: str
    per_timestep: list[tuple[float, float]]
    population: int
    strategy: str


def success_measure(quality: float, threshold: float) -> float:
    """Covered fraction of the requirement, capped at 1."""
    if threshold <= 0:
        return 1.0
    return min(1.0, quality / threshold)


def efficiency_measure(quality: float, threshold: float) -> float:
    """Requirement over contributions when covered, else 0; 1 means exact coverage."""
    if threshold <= 0:
        return 1.0 if quality == 0 else 0.0
    if threshold <= quality:
        return threshold / quality
    return 0.0


def welfare_measure(utilities: Sequence[float]) -> float:
    """Mean utility across agents for one round."""
    if len(utilities) < 1:
        raise ContractViolation("welfare needs at least one agent")
    return math.fsum(utilities) / len(utilities)


def privacy_measure(decisions: Sequence[Action]) -> float:
    """Fraction of agents that kept their data private this round."""
    if len(decisions) < 1:
        raise ContractViolation("privacy needs at least one agent")
    contributors = sum(1 for d in decisions if d is Action.CONTRIBUTE)
    return 1.0 - contributors / len(decisions)


def gini(y: Sequence[float]) -> float:
    """Gini coefficient of a non-negative vector; 0 is total equality.

    An all-zero vector counts as perfectly equal. The result lies in
    [0, (n-1)/n].
    """
    if len(y) < 1:
        raise ContractViolation("gini needs at least one entry")
    if min(y) < 0:
        raise ContractViolation("gini is defined for non-negative entries")
    total = math.fsum(y)
    if total == 0:
        return 0.0
    ordered = sorted(y)
    n = len(ordered)
    weighted = math.fsum((n + 1 - rank) * v for rank, v in enumerate(ordered, start=1))
    return (n + 1 - 2.0 * weighted / total) / n


def fairness_round(outcome: RoundOutcome) -> float:
    """Inequality of this round's contributions, defectors counted as zero."""
    return gini(outcome.contributed_values)


def fairness_over_time(cumulative_contributions: Sequence[float]) -> float:
    """Inequality of the per-agent contribution histories up to now."""
    return gini(cumulative_contributions)


def aggregate(
    series_per_repetition: Sequence[Sequence[float]],
    measure_name: str = "",
    population: int = 0,
    strategy: str = "",
) -> MeasureSeries:
    """Mean and 95% t-interval half-width per timestep across repetitions."""
    reps = len(series_per_repetition)
    if reps < 2:
        raise ContractViolation(
            "confidence intervals need at least 2 repetitions"
        )
    length = len(series_per_repetition[0])
    if any(len(s) != length for s in series_per_repetition):
        raise ContractViolation("repetitions must have equal length")

    t_crit = float(stats.t.ppf(0.975, reps - 1))
    per_timestep = []
    for t in range(length):
        samples = [s[t] for s in series_per_repetition]
        mean = math.fsum(samples) / reps
        var = math.fsum((x - mean) ** 2 for x in samples) / (reps - 1)
        half = t_crit * math.sqrt(var / reps)
        per_timestep.append((mean, half))
    return MeasureSeries(measure_name, per_timestep, population, strategy)
