"""The five contribution policies and the pre-training routine."""

import numpy as np
import pytest

from contribsim.errors import ContractViolation
from contribsim.game import Action, PayoffParams, RoundInput, evaluate_round, round_success
from contribsim.solver import CoverInstance, solve_exact
from contribsim.strategies import (
    AspirationState,
    Feedback,
    Observation,
    QState,
    aspiration_decide,
    aspiration_update,
    bucket_of,
    centralized_assign,
    exploration_schedule,
    full_decide,
    pretrain,
    q_decide,
    q_update,
    random_decide,
)

C = Action.CONTRIBUTE
D = Action.DEFECT
OBS = Observation(own_value=1.0, own_cost=0.5, round_index=0)


def make_input(values, costs, threshold):
    return RoundInput(
        values=values, costs=costs, privacy_costs=list(costs), threshold=threshold
    )


class TestFullStrategy:
    def test_always_contributes(self):
        assert full_decide(OBS) is C

    def test_cost_insensitive(self):
        assert full_decide(Observation(1.0, 1e6, 3)) is C

    def test_thousand_calls(self):
        assert all(full_decide(OBS) is C for _ in range(1000))


class TestRandomStrategy:
    def test_contribution_fraction_near_half(self):
        rng = np.random.default_rng(5)
        n_contrib = sum(random_decide(OBS, rng) is C for _ in range(10_000))
        assert 0.48 <= n_contrib / 10_000 <= 0.52

    def test_same_seed_same_sequence(self):
        rng1, rng2 = np.random.default_rng(9), np.random.default_rng(9)
        s1 = [random_decide(OBS, rng1) for _ in range(500)]
        s2 = [random_decide(OBS, rng2) for _ in range(500)]
        assert s1 == s2

    def test_degenerate_probability(self):
        rng = np.random.default_rng(5)
        assert all(
            random_decide(OBS, rng, p_contribute=1.0) is C for _ in range(100)
        )


class TestCentralizedStrategy:
    def test_selects_cheapest_cover(self):
        inp = make_input([1, 1, 1], [1, 2, 3], 2)
        assert centralized_assign(inp, 0.1) == [C, C, D]

    def test_small_threshold_single_contributor(self):
        inp = make_input([1, 1, 1], [2, 2, 2], 0.5)
        decisions = centralized_assign(inp, 0.1)
        assert decisions.count(C) == 1
        # one item covers 0.5 at minimum cost; exhaustive check concurs
        exact = solve_exact(CoverInstance([1, 1, 1], [2, 2, 2], 0.5))
        assert len(exact.selected) == 1

    def test_infeasible_round_best_effort(self):
        inp = make_input([1, 1, 1], [1, 1, 1], 10)
        assert centralized_assign(inp, 0.1) == [C, C, C]

    def test_zero_threshold_means_nobody_contributes(self):
        inp = make_input([1, 1], [1, 1], 0.0)
        assert centralized_assign(inp, 0.1) == [D, D]

    def test_equal_items_select_ceil_ratio(self):
        for tau, expected in ((0.5, 1), (2.0, 2), (2.1, 3), (5.0, 5)):
            inp = make_input([1.0] * 6, [1.0] * 6, tau)
            assert centralized_assign(inp, 0.1).count(C) == expected

    def test_feasibility_implies_success(self):
        rng = np.random.default_rng(41)
        payoffs = PayoffParams(1.0, 5.0)
        for _ in range(100):
            n = int(rng.integers(1, 12))
            values = rng.uniform(0, 2, n).tolist()
            costs = rng.uniform(0, 2, n).tolist()
            threshold = float(rng.uniform(0.1, 1.2) * max(sum(values), 0.1))
            inp = make_input(values, costs, threshold)
            decisions = centralized_assign(inp, 0.1)
            out = evaluate_round(inp, decisions, payoffs)
            could_succeed = round_success(sum(values), threshold)
            if could_succeed:
                assert out.success


class TestAspiration:
    def test_satisfied_repeats_action(self):
        state = AspirationState(aspiration=0.5, last_action=C, last_utility=1.0)
        assert aspiration_decide(state, OBS, np.random.default_rng(0)) is C

    def test_deep_disappointment_always_switches(self):
        state = AspirationState(
            aspiration=0.5, last_action=C, last_utility=-5.0, switch_scale=5.5
        )
        # (0.5 - (-5)) / 5.5 == 1.0: switches regardless of the draw
        for seed in range(20):
            assert aspiration_decide(state, OBS, np.random.default_rng(seed)) is D

    def test_first_round_after_pretrain_contributes(self):
        state = pretrain(AspirationState(), 100, PayoffParams(1.0, 5.0), mean_cost=1.0)
        assert state.last_action is C
        assert aspiration_decide(state, OBS, np.random.default_rng(3)) is C

    def test_pretrain_sets_expected_success_payoff(self):
        state = pretrain(AspirationState(), 50, PayoffParams(2.0, 5.0), mean_cost=1.0)
        assert state.aspiration == pytest.approx(1.0)

    def test_update_moves_by_step(self):
        state = AspirationState(aspiration=0.0, aspiration_step=0.1)
        aspiration_update(state, Feedback(C, 1.0, True))
        assert state.aspiration == pytest.approx(0.1)
        assert state.last_action is C
        assert state.last_utility == 1.0

    def test_update_fixed_point(self):
        state = AspirationState(aspiration=0.4, aspiration_step=0.2)
        aspiration_update(state, Feedback(D, 0.4, True))
        assert state.aspiration == pytest.approx(0.4)

    def test_repeated_updates_converge_geometrically(self):
        state = AspirationState(aspiration=0.0, aspiration_step=0.1)
        for _ in range(200):
            aspiration_update(state, Feedback(C, 0.7, True))
        assert state.aspiration == pytest.approx(0.7, abs=1e-6)

    def test_floor_and_ceiling_clip(self):
        state = AspirationState(
            aspiration=0.0, aspiration_step=1.0,
            aspiration_floor=-1.0, aspiration_ceiling=0.5,
        )
        aspiration_update(state, Feedback(C, -9.0, False))
        assert state.aspiration == -1.0
        aspiration_update(state, Feedback(D, 2.0, True))
        assert state.aspiration == 0.5

    def test_disappointment_cap_bounds_contributor_switching(self):
        # Capped gap 0.5 over scale 1000: switch probability 1/2000.
        state = AspirationState(
            aspiration=1.0, last_action=C, last_utility=-6.0,
            switch_scale=1000.0, disappointment_cap=0.5,
        )
        switches = sum(
            aspiration_decide(state, OBS, np.random.default_rng(s)) is D
            for s in range(2000)
        )
        assert switches < 10
        # The cap is one-sided: a defector's disappointment is not capped.
        state = AspirationState(
            aspiration=1.0, last_action=D, last_utility=-6.0,
            switch_scale=7.0, disappointment_cap=0.5,
        )
        assert aspiration_decide(state, OBS, np.random.default_rng(0)) is C

    def test_validation(self):
        with pytest.raises(ContractViolation):
            AspirationState(switch_scale=0.0)
        with pytest.raises(ContractViolation):
            AspirationState(aspiration_step=0.0)
        with pytest.raises(ContractViolation):
            AspirationState(aspiration_floor=1.0, aspiration_ceiling=0.0)


class TestQLearning:
    def test_greedy_picks_higher_entry(self):
        state = QState(eps_explore=0.0, value_range=(0, 2), cost_range=(0, 2))
        b = bucket_of(state, OBS)
        state.q_table[(b[0], b[1], C)] = 1.0
        state.q_table[(b[0], b[1], D)] = 0.0
        assert q_decide(state, OBS, np.random.default_rng(0)) is C

    def test_tie_prefers_contribution(self):
        state = QState(eps_explore=0.0)
        assert q_decide(state, OBS, np.random.default_rng(0)) is C

    def test_full_exploration_is_uniform(self):
        state = QState(eps_explore=1.0)
        rng = np.random.default_rng(43)
        freq = sum(q_decide(state, OBS, rng) is C for _ in range(10_000)) / 10_000
        assert abs(freq - 0.5) <= 0.02

    def test_pretrained_greedy_contributes_everywhere(self):
        state = pretrain(
            QState(eps_explore=0.0, value_range=(0, 2), cost_range=(0, 2)),
            100,
            PayoffParams(1.0, 5.0),
        )
        rng = np.random.default_rng(0)
        for v in np.linspace(0, 2, 9):
            for c in np.linspace(0, 2, 9):
                assert q_decide(state, Observation(v, c, 0), rng) is C

    def test_update_full_overwrite(self):
        state = QState(learning_rate=1.0, discount=0.0)
        state.last_bucket = (0, 0)
        q_update(state, OBS, Feedback(C, 0.7, True))
        assert state.q_table[(0, 0, C)] == pytest.approx(0.7)

    def test_update_zero_td_error(self):
        state = QState(learning_rate=0.5, discount=0.0)
        state.last_bucket = (1, 1)
        state.q_table[(1, 1, D)] = 0.3
        q_update(state, Observation(0.1, 0.1, 1), Feedback(D, 0.3, True))
        assert state.q_table[(1, 1, D)] == pytest.approx(0.3)

    def test_repeated_updates_contract_to_reward(self):
        state = QState(learning_rate=0.2, discount=0.0)
        for _ in range(300):
            state.last_bucket = (2, 2)
            q_update(state, OBS, Feedback(C, -1.3, False))
        assert state.q_table[(2, 2, C)] == pytest.approx(-1.3, abs=1e-9)

    def test_greedy_invariant_under_constant_shift(self):
        state = QState(eps_explore=0.0, value_range=(0, 2), cost_range=(0, 2))
        b = bucket_of(state, OBS)
        state.q_table[(b[0], b[1], C)] = 0.2
        state.q_table[(b[0], b[1], D)] = 0.7
        before = q_decide(state, OBS, np.random.default_rng(1))
        for action in (C, D):
            state.q_table[(b[0], b[1], action)] += 123.45
        after = q_decide(state, OBS, np.random.default_rng(1))
        assert before is after is D

    def test_table_fully_initialized(self):
        state = QState(value_buckets=3, cost_buckets=5)
        assert len(state.q_table) == 3 * 5 * 2

    def test_validation(self):
        with pytest.raises(ContractViolation):
            QState(learning_rate=0.0)
        with pytest.raises(ContractViolation):
            QState(discount=1.0)
        with pytest.raises(ContractViolation):
            QState(eps_explore=1.5)
        with pytest.raises(ContractViolation):
            QState(value_buckets=0)


class TestPretrain:
    def test_zero_rounds_keeps_zero_table_with_contribute_tie_break(self):
        state = pretrain(QState(eps_explore=0.0), 0, PayoffParams(1.0, 5.0))
        assert all(v == 0.0 for v in state.q_table.values())
        assert q_decide(state, OBS, np.random.default_rng(0)) is C

    def test_contribute_beats_defect_in_every_bucket(self):
        state = pretrain(
            QState(value_range=(0, 2), cost_range=(0, 2.5)),
            100,
            PayoffParams(1.0, 5.0),
        )
        for vi in range(state.value_buckets):
            for ci in range(state.cost_buckets):
                assert state.q_table[(vi, ci, C)] > state.q_table[(vi, ci, D)]

    def test_values_bounded_by_reward(self):
        payoffs = PayoffParams(1.0, 5.0)
        state = pretrain(QState(cost_range=(0, 3)), 500, payoffs)
        assert all(
            np.isfinite(v) and v <= payoffs.reward_G
            for v in state.q_table.values()
        )

    def test_negative_rounds_rejected(self):
        with pytest.raises(ContractViolation):
            pretrain(QState(), -1)


class TestExplorationSchedule:
    def test_decays_to_floor_within_warmup(self):
        assert exploration_schedule(0, 1000) == pytest.approx(0.1)
        assert exploration_schedule(200, 1000) == pytest.approx(0.01)
        assert exploration_schedule(999, 1000) == 0.01

    def test_flat_when_start_not_above_floor(self):
        assert exploration_schedule(0, 1000, start=0.05, floor=0.05) == 0.05


class TestDeterminism:
    def test_fixed_seeds_give_identical_histories(self):
        def run(seed):
            rng = np.random.default_rng(seed)
            asp = pretrain(AspirationState(), 10, PayoffParams(1.0, 5.0), 1.0)
            q = pretrain(QState(), 10, PayoffParams(1.0, 5.0))
            history = []
            for t in range(200):
                obs = Observation(float(rng.uniform(0, 2)), float(rng.uniform(0, 2)), t)
                a1 = random_decide(obs, rng)
                a2 = aspiration_decide(asp, obs, rng)
                a3 = q_decide(q, obs, rng)
                util = float(rng.uniform(-5, 1))
                aspiration_update(asp, Feedback(a2, util, util > 0))
                q_update(q, obs, Feedback(a3, util, util > 0))
                history.append((a1, a2, a3))
            return history

        assert run(77) == run(77)
        assert run(77) != run(78)
