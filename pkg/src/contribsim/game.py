"""Round mechanics of the voluntary contribution game.

A round is described by per-agent resource values, contribution costs and a
quality requirement. Agents either contribute their resource or opt out; the
round succeeds when the summed value of contributions reaches the requirement.
Everyone receives the same base payoff (a reward on success, a loss on
failure) and contributors additionally pay their own cost.

All functions here are pure and never mutate their inputs, so they are safe
to call from any number of concurrent simulation runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import ContractViolation


class Action(Enum):
    """The two moves available to an agent in a round."""

    CONTRIBUTE = "C"
    DEFECT = "D"

    def other(self) -> "Action":
        return Action.DEFECT if self is Action.CONTRIBUTE else Action.CONTRIBUTE


@dataclass(frozen=True)
class PayoffParams:
    """Constant round payoffs: reward on success, magnitude of the loss on failure.

    The game is a threshold public-goods game as long as
    ``reward_G + penalty_B`` exceeds every contribution cost in play; see
    :func:`is_threshold_pgg`.
    """

    reward_G: float = 1.0
    penalty_B: float = 5.0

    def __post_init__(self) -> None:
        if self.reward_G <= 0:
            raise ContractViolation("reward_G must be positive")
        if self.penalty_B <= 0:
            raise ContractViolation("penalty_B must be positive")


@dataclass(frozen=True)
class RoundInput:
    """Exogenous state of one round.

    ``values`` are what each agent's resource is worth to the service,
    ``costs`` what contributing it costs the agent, ``privacy_costs`` the
    privacy risk of disclosure (tracked, charged only on request), and
    ``threshold`` the quality the service needs this round. A threshold of
    zero is legal and makes the round trivially successful; scenarios with
    abundant supply produce such rounds.

    Feasibility (threshold not exceeding the total value) is not required
    here; strategies and the solver deal with infeasible rounds.
    """

    values: list[float]
    costs: list[float]
    privacy_costs: list[float]
    threshold: float

    def __post_init__(self) -> None:
        n = len(self.values)
        if n < 1:
            raise ContractViolation("a round needs at least one agent")
        if len(self.costs) != n or len(self.privacy_costs) != n:
            raise ContractViolation(
                "values, costs and privacy_costs must have the same length"
            )
        if min(self.values) < 0 or min(self.costs) < 0 or min(self.privacy_costs) < 0:
            raise ContractViolation("values, costs and privacy_costs must be >= 0")
        if self.threshold < 0:
            raise ContractViolation("threshold must be >= 0")

    @property
    def n(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class RoundOutcome:
    """Everything the evaluation of one round produces.

    ``contributed_values`` holds each agent's value if it contributed and 0.0
    otherwise, so its sum equals ``quality``. ``contributor_count`` counts
    Contribute decisions, which may exceed the number of nonzero entries when
    agents hold zero-valued resources.
    """

    quality: float
    success: bool
    utilities: list[float]
    contributor_count: int
    contributed_values: list[float]


def quality(inp: RoundInput, decisions: Sequence[Action]) -> float:
    """Service quality of a round: the summed value of all contributions.

    Uses exact summation (fsum) so that quality agrees bit-for-bit with
    thresholds and solver totals derived from the same values, whatever the
    accumulation order.
    """
    if len(decisions) != inp.n:
        raise ContractViolation(
            f"expected {inp.n} decisions, got {len(decisions)}"
        )
    return math.fsum(
        v for v, d in zip(inp.values, decisions) if d is Action.CONTRIBUTE
    )


def round_success(quality: float, threshold: float) -> bool:
    """Whether the service can be provided; the boundary counts as success."""
    return quality >= threshold


def agent_utility(
    decision: Action, cost: float, success: bool, payoffs: PayoffParams
) -> float:
    """Per-agent utility for one round.

    Success pays ``reward_G`` to everyone, failure costs everyone
    ``penalty_B``, and contributors additionally pay their own cost whatever
    the outcome.
    """
    if cost < 0:
        raise ContractViolation("cost must be >= 0")
    base = payoffs.reward_G if success else -payoffs.penalty_B
    if decision is Action.CONTRIBUTE:
        return base - cost
    return base


def is_threshold_pgg(payoffs: PayoffParams, max_cost: float) -> bool:
    """Check the threshold public-goods condition reward + penalty > max cost."""
    if max_cost < 0:
        raise ContractViolation("max_cost must be >= 0")
    return payoffs.reward_G + payoffs.penalty_B > max_cost


def evaluate_round(
    inp: RoundInput,
    decisions: Sequence[Action],
    payoffs: PayoffParams,
    include_privacy_cost: bool = False,
) -> RoundOutcome:
    """Evaluate one full round: quality, success and per-agent utilities.

    With ``include_privacy_cost`` each contributor is charged its privacy
    cost on top of the contribution cost. The default leaves privacy costs
    out of the utility, which matches the utility definition; the flag exists
    for exploring privacy-sensitive payoffs.
    """
    q = quality(inp, decisions)
    success = round_success(q, inp.threshold)
    utilities = []
    contributed = []
    count = 0
    for v, c, p, d in zip(inp.values, inp.costs, inp.privacy_costs, decisions):
        charged = c + p if include_privacy_cost else c
        utilities.append(agent_utility(d, charged, success, payoffs))
        if d is Action.CONTRIBUTE:
            contributed.append(v)
            count += 1
        else:
            contributed.append(0.0)
    return RoundOutcome(
        quality=q,
        success=success,
        utilities=utilities,
        contributor_count=count,
        contributed_values=contributed,
    )
