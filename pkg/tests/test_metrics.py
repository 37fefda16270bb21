"""The six measures, the Gini oracle and cross-repetition aggregation."""

import itertools
import math

import numpy as np
import pytest

from contribsim.errors import ContractViolation
from contribsim.game import Action, PayoffParams, RoundInput, evaluate_round
from contribsim.metrics import (
    aggregate,
    efficiency_measure,
    fairness_over_time,
    fairness_round,
    gini,
    privacy_measure,
    success_measure,
    welfare_measure,
)

C = Action.CONTRIBUTE
D = Action.DEFECT


def gini_mean_absolute_difference(y):
    """Independent oracle: sum |y_i - y_j| / (2 n^2 mean)."""
    n = len(y)
    total = math.fsum(y)
    if total == 0:
        return 0.0
    pair_sum = math.fsum(abs(a - b) for a, b in itertools.product(y, y))
    return pair_sum / (2 * n * total)


class TestSuccessMeasure:
    def test_half_covered(self):
        assert success_measure(4, 8) == 0.5

    def test_capped_at_one(self):
        assert success_measure(10, 8) == 1.0

    def test_zero_quality(self):
        assert success_measure(0, 8) == 0.0

    def test_zero_threshold_is_trivial_success(self):
        assert success_measure(0, 0) == 1.0


class TestEfficiencyMeasure:
    def test_exact_coverage(self):
        assert efficiency_measure(8, 8) == 1.0

    def test_over_coverage(self):
        assert efficiency_measure(10, 8) == pytest.approx(0.8)

    def test_unmet_threshold(self):
        assert efficiency_measure(6, 8) == 0.0

    def test_zero_threshold(self):
        assert efficiency_measure(0, 0) == 1.0
        assert efficiency_measure(3, 0) == 0.0


class TestWelfareMeasure:
    def test_mean(self):
        assert welfare_measure([1, -1, 0]) == 0.0
        assert welfare_measure([0.7, 0.7]) == pytest.approx(0.7)

    def test_failure_round(self):
        assert welfare_measure([-5, -5, -5]) == -5

    def test_empty_rejected(self):
        with pytest.raises(ContractViolation):
            welfare_measure([])


class TestPrivacyMeasure:
    def test_all_contribute(self):
        assert privacy_measure([C, C, C]) == 0.0

    def test_all_defect(self):
        assert privacy_measure([D, D]) == 1.0

    def test_half(self):
        assert privacy_measure([C] * 5 + [D] * 5) == 0.5


class TestGini:
    def test_total_equality(self):
        assert gini([1, 1, 1, 1]) == 0.0

    def test_single_nonzero(self):
        assert gini([0, 0, 0, 1]) == pytest.approx(0.75)

    def test_linear_ramp(self):
        assert gini([1, 2, 3, 4]) == pytest.approx(0.25)

    def test_all_zero_counts_as_equal(self):
        assert gini([0.0, 0.0, 0.0]) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(ContractViolation):
            gini([1, -1])

    def test_scale_invariance(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            y = rng.uniform(0, 5, int(rng.integers(2, 20))).tolist()
            k = float(rng.uniform(0.1, 10))
            assert gini([k * v for v in y]) == pytest.approx(gini(y), abs=1e-12)

    def test_matches_mean_absolute_difference_oracle(self):
        rng = np.random.default_rng(29)
        for _ in range(300):
            n = int(rng.integers(1, 25))
            y = rng.uniform(0, 3, n).tolist()
            assert gini(y) == pytest.approx(
                gini_mean_absolute_difference(y), abs=1e-9
            )

    def test_range_bound(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            n = int(rng.integers(1, 30))
            y = rng.uniform(0, 3, n).tolist()
            g = gini(y)
            assert 0 <= g <= (n - 1) / n + 1e-12


class TestFairness:
    payoffs = PayoffParams(1.0, 5.0)

    def _outcome(self, values, decisions, threshold=1.0):
        inp = RoundInput(
            values=values,
            costs=[0.0] * len(values),
            privacy_costs=[0.0] * len(values),
            threshold=threshold,
        )
        return evaluate_round(inp, decisions, self.payoffs)

    def test_equal_contributions(self):
        assert fairness_round(self._outcome([1, 1, 1], [C, C, C])) == 0.0

    def test_single_contributor_of_four(self):
        out = self._outcome([1, 1, 1, 1], [C, D, D, D])
        assert fairness_round(out) == pytest.approx(0.75)

    def test_nobody_contributes(self):
        assert fairness_round(self._outcome([1, 1], [D, D])) == 0.0

    def test_identical_histories(self):
        assert fairness_over_time([5.0, 5.0, 5.0]) == 0.0

    def test_single_active_agent_history(self):
        n = 6
        hist = [7.0] + [0.0] * (n - 1)
        assert fairness_over_time(hist) == pytest.approx((n - 1) / n)

    def test_random_equal_rate_histories_even_out(self):
        rng = np.random.default_rng(37)
        n, steps = 10, 5000
        cumulative = np.zeros(n)
        for _ in range(steps):
            cumulative += (rng.random(n) < 0.5).astype(float)
        assert fairness_over_time(cumulative.tolist()) < 0.1


class TestAggregate:
    def test_identical_repetitions_have_zero_width(self):
        series = [[1.0, 2.0, 3.0]] * 4
        agg = aggregate(series, "success", 10, "full")
        assert [m for m, _ in agg.per_timestep] == [1.0, 2.0, 3.0]
        assert all(h == 0.0 for _, h in agg.per_timestep)

    def test_t_interval_matches_hand_computation(self):
        agg = aggregate([[1.0], [2.0], [3.0]], "welfare", 10, "full")
        mean, half = agg.per_timestep[0]
        assert mean == pytest.approx(2.0)
        # t(0.975, df=2) * s / sqrt(3) with s = 1
        assert half == pytest.approx(2.4841377117195456, rel=1e-9)

    def test_mean_is_permutation_invariant(self):
        series = [[1.0, 5.0], [2.0, 2.0], [4.0, 0.5]]
        a = aggregate(series, "welfare", 10, "full")
        b = aggregate(series[::-1], "welfare", 10, "full")
        assert a.per_timestep == b.per_timestep

    def test_single_repetition_rejected(self):
        with pytest.raises(ContractViolation):
            aggregate([[1.0, 2.0]], "success", 10, "full")

    def test_unequal_lengths_rejected(self):
        with pytest.raises(ContractViolation):
            aggregate([[1.0], [1.0, 2.0]], "success", 10, "full")
