"""Contribution policies: two baselines, a centralized optimizer, two learners.

Localized policies (full, random, aspiration, Q-learning) see only their own
observation and feedback, never other agents' data; the interface shapes make
that structural. The centralized policy receives the whole round input and
assigns contributors by solving the covering knapsack.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ContractViolation
from .game import Action, PayoffParams, RoundInput
from .solver import CoverInstance, solve_fptas


@dataclass(frozen=True)
class Observation:
    """What a localized agent sees before deciding: its own context only."""

    own_value: float
    own_cost: float
    round_index: int

    def __post_init__(self) -> None:
        if self.own_value < 0 or self.own_cost < 0:
            raise ContractViolation("observation value and cost must be >= 0")


@dataclass(frozen=True)
class Feedback:
    """What a localized agent learns after a round: its own outcome only."""

    own_action: Action
    own_utility: float
    success: bool


def full_decide(obs: Observation) -> Action:
    """Always contribute."""
    return Action.CONTRIBUTE


def random_decide(obs: Observation, rng, p_contribute: float = 0.5) -> Action:
    """Contribute with fixed probability, independently every round."""
    return Action.CONTRIBUTE if rng.random() < p_contribute else Action.DEFECT


def centralized_assign(inp: RoundInput, epsilon: float) -> list[Action]:
    """Contributor assignment minimizing total cost while meeting the threshold.

    A zero threshold needs nobody; an infeasible round (threshold above the
    total value) falls back to everyone contributing, which maximizes quality
    toward the unmet requirement.
    """
    if inp.threshold <= 0:
        return [Action.DEFECT] * inp.n
    solution = solve_fptas(
        CoverInstance(inp.values, inp.costs, inp.threshold), epsilon
    )
    if not solution.feasible:
        return [Action.CONTRIBUTE] * inp.n
    return [
        Action.CONTRIBUTE if i in solution.selected else Action.DEFECT
        for i in range(inp.n)
    ]


# --- aspiration learning -------------------------------------------------


@dataclass
class AspirationState:
    """Satisficing learner: repeat while satisfied, switch when disappointed.

    The aspiration level is an exponential moving average of realized
    utility. When the last utility falls short of it, the agent abandons its
    last action with probability proportional to the disappointment, scaled
    by ``switch_scale``. ``aspiration_floor`` and ``aspiration_ceiling``,
    when set, clip the moving average: the floor stops it from chasing deep
    failure payoffs downward (which would leave agents content inside a
    failing regime), the ceiling from chasing free-rider windfalls upward.
    """

    aspiration: float = 0.0
    last_action: Action = Action.CONTRIBUTE
    last_utility: float | None = None
    switch_scale: float = 6.0
    aspiration_step: float = 0.1
    aspiration_floor: float | None = None
    aspiration_ceiling: float | None = None
    disappointment_cap: float | None = None

    def __post_init__(self) -> None:
        if self.switch_scale <= 0:
            raise ContractViolation("switch_scale must be positive")
        if not 0 < self.aspiration_step <= 1:
            raise ContractViolation("aspiration_step must be in (0, 1]")
        if self.disappointment_cap is not None and self.disappointment_cap <= 0:
            raise ContractViolation("disappointment_cap must be positive")
        if (
            self.aspiration_floor is not None
            and self.aspiration_ceiling is not None
            and self.aspiration_ceiling < self.aspiration_floor
        ):
            raise ContractViolation("aspiration ceiling below floor")


def aspiration_decide(state: AspirationState, obs: Observation, rng) -> Action:
    """Repeat the last action while satisfied, otherwise maybe switch.

    The switch probability grows linearly with the disappointment
    (aspiration minus realized utility), scaled by ``switch_scale``.
    ``disappointment_cap`` saturates the disappointment of contributors:
    failure payoffs sit an order of magnitude below everyday utility
    fluctuations, and unbounded urgency would turn every failed round into
    panic herding away from contribution, feeding further failures. The cap
    is one-sided on purpose; a disappointed defector rejoining contribution
    is the recovery direction and keeps its full urgency. The observation is
    deliberately ignored: this learner is context-free.
    """
    if state.last_utility is None or state.last_utility >= state.aspiration:
        return state.last_action
    gap = state.aspiration - state.last_utility
    if state.disappointment_cap is not None and state.last_action is Action.CONTRIBUTE:
        gap = min(gap, state.disappointment_cap)
    if rng.random() < min(1.0, gap / state.switch_scale):
        return state.last_action.other()
    return state.last_action


def aspiration_update(state: AspirationState, fb: Feedback) -> AspirationState:
    """Move the aspiration toward the realized utility; record the round."""
    state.aspiration += state.aspiration_step * (fb.own_utility - state.aspiration)
    if state.aspiration_floor is not None and state.aspiration < state.aspiration_floor:
        state.aspiration = state.aspiration_floor
    if (
        state.aspiration_ceiling is not None
        and state.aspiration > state.aspiration_ceiling
    ):
        state.aspiration = state.aspiration_ceiling
    state.last_action = fb.own_action
    state.last_utility = fb.own_utility
    return state


# --- contextual Q-learning ------------------------------------------------


@dataclass
class QState:
    """Tabular Q-learner over discretized (own value, own cost) contexts."""

    learning_rate: float = 0.1
    discount: float = 0.9
    eps_explore: float = 0.1
    value_buckets: int = 4
    cost_buckets: int = 4
    value_range: tuple[float, float] = (0.0, 1.0)
    cost_range: tuple[float, float] = (0.0, 1.0)
    q_table: dict[tuple[int, int, Action], float] = field(default_factory=dict)
    last_bucket: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if not 0 < self.learning_rate <= 1:
            raise ContractViolation("learning_rate must be in (0, 1]")
        if not 0 <= self.discount < 1:
            raise ContractViolation("discount must be in [0, 1)")
        if not 0 <= self.eps_explore <= 1:
            raise ContractViolation("eps_explore must be in [0, 1]")
        if self.value_buckets < 1 or self.cost_buckets < 1:
            raise ContractViolation("bucket counts must be >= 1")
        if not self.q_table:
            for vi in range(self.value_buckets):
                for ci in range(self.cost_buckets):
                    self.q_table[(vi, ci, Action.CONTRIBUTE)] = 0.0
                    self.q_table[(vi, ci, Action.DEFECT)] = 0.0


def _bucket_index(x: float, low: float, high: float, buckets: int) -> int:
    if high <= low:
        return 0
    idx = int((x - low) / (high - low) * buckets)
    return min(max(idx, 0), buckets - 1)


def bucket_of(state: QState, obs: Observation) -> tuple[int, int]:
    """Discretize an observation into the learner's context bucket."""
    return (
        _bucket_index(obs.own_value, *state.value_range, state.value_buckets),
        _bucket_index(obs.own_cost, *state.cost_range, state.cost_buckets),
    )


def q_decide(state: QState, obs: Observation, rng) -> Action:
    """Epsilon-greedy action for the observation's bucket; ties contribute."""
    b = bucket_of(state, obs)
    state.last_bucket = b
    if state.eps_explore > 0 and rng.random() < state.eps_explore:
        return Action.CONTRIBUTE if rng.random() < 0.5 else Action.DEFECT
    q_c = state.q_table[(b[0], b[1], Action.CONTRIBUTE)]
    q_d = state.q_table[(b[0], b[1], Action.DEFECT)]
    return Action.CONTRIBUTE if q_c >= q_d else Action.DEFECT


def q_update(state: QState, obs: Observation, fb: Feedback) -> QState:
    """Temporal-difference update of the bucket acted in.

    ``obs`` is the next round's observation; its bucket provides the
    bootstrap value.
    """
    next_b = bucket_of(state, obs)
    acted_b = state.last_bucket if state.last_bucket is not None else next_b
    key = (acted_b[0], acted_b[1], fb.own_action)
    best_next = max(
        state.q_table[(next_b[0], next_b[1], Action.CONTRIBUTE)],
        state.q_table[(next_b[0], next_b[1], Action.DEFECT)],
    )
    td_error = fb.own_utility + state.discount * best_next - state.q_table[key]
    state.q_table[key] += state.learning_rate * td_error
    return state


def exploration_schedule(
    t: int,
    total_steps: int,
    start: float = 0.1,
    floor: float = 0.01,
    warmup_fraction: float = 0.2,
) -> float:
    """Exploration rate: exponential decay across the warmup prefix, then flat."""
    warm = max(1, int(total_steps * warmup_fraction))
    if t >= warm or start <= floor:
        return floor
    return start * (floor / start) ** (t / warm)


def pretrain(
    state: AspirationState | QState,
    rounds: int,
    payoffs: PayoffParams | None = None,
    mean_cost: float = 0.0,
    defect_target: float | None = None,
):
    """Bias a fresh learner toward contribution before the run starts.

    Q-learners regress every bucket's Contribute entry toward the payoff of
    contributing to a successful round, floored at a small optimistic value
    so contribution is greedy everywhere once ``rounds`` >= 1. Defect entries
    regress toward ``defect_target`` (default: half the failure loss), the
    imagined payoff of a defection that breaks the round; its depth sets how
    reluctantly defection is rediscovered once real feedback arrives.
    Aspiration learners start out contributing with the aspiration at the
    expected success payoff.
    """
    if rounds < 0:
        raise ContractViolation("rounds must be >= 0")
    payoffs = payoffs or PayoffParams()

    if isinstance(state, AspirationState):
        state.last_action = Action.CONTRIBUTE
        state.aspiration = payoffs.reward_G - mean_cost
        state.last_utility = state.aspiration
        return state

    if defect_target is None:
        defect_target = -0.8 * payoffs.penalty_B
    lo, hi = state.cost_range
    optimism = 0.1 * payoffs.reward_G
    for _ in range(rounds):
        for vi in range(state.value_buckets):
            for ci in range(state.cost_buckets):
                mid = lo + (hi - lo) * (ci + 0.5) / state.cost_buckets
                target = max(payoffs.reward_G - mid, optimism)
                for action, goal in (
                    (Action.CONTRIBUTE, target),
                    (Action.DEFECT, defect_target),
                ):
                    key = (vi, ci, action)
                    state.q_table[key] += state.learning_rate * (
                        goal - state.q_table[key]
                    )
    return state
