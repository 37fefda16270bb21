"""Minimum-cost covering knapsack: an exact oracle and an approximation scheme.

Both solvers pick a subset of items whose total value reaches a threshold
while minimizing total cost. :func:`solve_exact` enumerates all subsets
(meet-in-the-middle, so instances up to ``EXACT_LIMIT`` items stay cheap) and
is meant as a test oracle. :func:`solve_fptas` runs a cost-scaling dynamic
program whose rounding always errs toward over-coverage: a feasible answer
never undershoots the threshold, and its cost is within ``(1 + epsilon)`` of
the exact optimum.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ContractViolation

# Largest instance the exact oracle accepts (2**25 subsets via two 2**13 halves).
EXACT_LIMIT = 25


@dataclass(frozen=True)
class CoverInstance:
    """Items with values and costs, and the value threshold to cover."""

    values: list[float]
    costs: list[float]
    threshold: float

    def __post_init__(self) -> None:
        if len(self.values) < 1:
            raise ContractViolation("an instance needs at least one item")
        if len(self.costs) != len(self.values):
            raise ContractViolation("values and costs must have the same length")
        if min(self.values) < 0 or min(self.costs) < 0:
            raise ContractViolation("values and costs must be >= 0")
        if self.threshold <= 0:
            raise ContractViolation("threshold must be positive")


@dataclass(frozen=True)
class CoverSolution:
    selected: frozenset[int]
    total_cost: float
    total_value: float
    feasible: bool


_INFEASIBLE = CoverSolution(frozenset(), 0.0, 0.0, False)


def _solution_for(instance: CoverInstance, selected: frozenset[int]) -> CoverSolution:
    ordered = sorted(selected)
    return CoverSolution(
        selected=selected,
        total_cost=math.fsum(instance.costs[i] for i in ordered),
        total_value=math.fsum(instance.values[i] for i in ordered),
        feasible=True,
    )


def _half_subsets(values, costs, offset):
    """All subsets of one item slice as (value, cost, size, index tuple)."""
    subsets = [(0.0, 0.0, 0, ())]
    for k in range(len(values)):
        i = offset + k
        v, c = values[k], costs[k]
        subsets += [(sv + v, sc + c, m + 1, idx + (i,)) for sv, sc, m, idx in subsets]
    return subsets


def solve_exact(instance: CoverInstance) -> CoverSolution:
    """Minimum-cost cover by full enumeration (meet-in-the-middle).

    Ties are broken toward the smaller selected set, then the
    lexicographically smallest index tuple, so the result is deterministic.
    Instances with more than ``EXACT_LIMIT`` items are rejected.
    """
    n = len(instance.values)
    if n > EXACT_LIMIT:
        raise CapacityError(
            f"exact solver handles at most {EXACT_LIMIT} items, got {n}"
        )
    if math.fsum(instance.values) < instance.threshold:
        return _INFEASIBLE

    h = (n + 1) // 2
    left = _half_subsets(instance.values[:h], instance.costs[:h], 0)
    right = _half_subsets(instance.values[h:], instance.costs[h:], h)
    right.sort(key=lambda s: s[0])
    right_values = [s[0] for s in right]

    # suffix_best[j]: among right subsets with rank >= j, the one minimizing
    # (cost, size, indices); ranks are sorted by value, so rank >= j means
    # "value at least right_values[j]".
    suffix_best: list[tuple | None] = [None] * (len(right) + 1)
    for j in range(len(right) - 1, -1, -1):
        cand = right[j]
        prev = suffix_best[j + 1]
        if prev is None or (cand[1], cand[2], cand[3]) < (prev[1], prev[2], prev[3]):
            suffix_best[j] = cand
        else:
            suffix_best[j] = prev

    best_key = None
    best_indices = None
    for lv, lc, lm, lidx in left:
        j = bisect_left(right_values, instance.threshold - lv)
        if j >= len(suffix_best):
            continue
        cand = suffix_best[j]
        if cand is None:
            continue
        key = (lc + cand[1], lm + cand[2], lidx + cand[3])
        if best_key is None or key < best_key:
            best_key = key
            best_indices = lidx + cand[3]

    if best_indices is None:
        # Total value clears the threshold, so the full set always qualifies.
        best_indices = tuple(range(n))
    return _solution_for(instance, frozenset(best_indices))


def _lp_cover_bound(need, items):
    """Cost of the fractional greedy cover; a lower bound on the integral optimum."""
    order = sorted(items, key=lambda it: (it[2] / it[1], it[0]))
    covered = 0.0
    cost = 0.0
    for _, v, c in order:
        if covered + v >= need:
            return cost + c * (need - covered) / v
        covered += v
        cost += c
    return cost


def _scaled_min_cover(values, costs, items, need, gamma, eps_inner):
    """One cost-scaling DP pass at optimum guess ``gamma``.

    Costs are rounded down to multiples of ``eps_inner * gamma / len(items)``
    and the DP keeps, for every rounded cost level, the largest exact value
    reachable. Values are never rounded, so any level that covers ``need``
    covers it for real. Returns the selected index list or None when no level
    within the table covers the requirement.
    """
    eligible = [i for i in items if costs[i] <= gamma]
    if not eligible:
        return None
    m = len(items)
    scale = eps_inner * gamma / m
    levels = int(m / eps_inner) + 1
    scaled = [int(costs[i] // scale) for i in eligible]

    table = np.zeros((len(eligible) + 1, levels))
    for row, (i, ci) in enumerate(zip(eligible, scaled)):
        prev = table[row]
        cur = table[row + 1]
        cur[:] = prev
        if ci < levels:
            np.maximum(prev[ci:], prev[: levels - ci] + values[i], out=cur[ci:])

    reachable = np.nonzero(table[-1] >= need)[0]
    if reachable.size == 0:
        return None
    level = int(reachable[0])

    chosen = []
    for row in range(len(eligible) - 1, -1, -1):
        if table[row + 1][level] != table[row][level]:
            chosen.append(eligible[row])
            level -= scaled[row]
    chosen.reverse()
    return chosen


def solve_fptas(instance: CoverInstance, epsilon: float) -> CoverSolution:
    """Approximate minimum-cost cover within a (1 + epsilon) cost factor.

    Feasible exactly when the summed value of all items reaches the
    threshold. A feasible answer always covers the threshold; only the cost
    is approximate. Deterministic for fixed inputs.
    """
    if not 0 < epsilon <= 1:
        raise ContractViolation("epsilon must be in (0, 1]")
    values, costs, threshold = instance.values, instance.costs, instance.threshold
    n = len(values)
    if math.fsum(values) < threshold:
        return _INFEASIBLE

    # Zero-cost items are free coverage; claim them before scaling costs.
    free = [i for i in range(n) if costs[i] == 0.0]
    paid = [i for i in range(n) if costs[i] > 0.0 and values[i] > 0.0]
    need = threshold - math.fsum(values[i] for i in free)
    if need <= 0:
        return _solution_for(instance, frozenset(free))

    # Internal slack eps/2 pays for the factor-2 gap of the guess doubling.
    eps_inner = epsilon / 2.0
    paid_items = [(i, values[i], costs[i]) for i in paid]
    total_paid_cost = math.fsum(costs[i] for i in paid)
    gamma = max(_lp_cover_bound(need, paid_items), min(costs[i] for i in paid))

    chosen = None
    while chosen is None:
        chosen = _scaled_min_cover(values, costs, paid, need, gamma, eps_inner)
        if chosen is None:
            if gamma > total_paid_cost:
                # Cannot happen with exact arithmetic: the full paid set covers
                # `need` and fits the table at this guess. Guards rounding edge cases.
                chosen = list(paid)
            gamma *= 2.0

    selected = set(free) | set(chosen)
    # Floating-point safety: top up in the vanishingly unlikely case where
    # accumulated rounding left the re-summed total just under the threshold.
    if math.fsum(values[i] for i in sorted(selected)) < threshold:
        leftovers = sorted(set(range(n)) - selected, key=lambda i: (costs[i], i))
        for i in leftovers:
            selected.add(i)
            if math.fsum(values[j] for j in sorted(selected)) >= threshold:
                break
    return _solution_for(instance, frozenset(selected))
