import math
import statistics
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noisysubset.algorithms import RunRecord
from noisysubset.analysis import (
    BoundInputs,
    InstanceTooLarge,
    brute_force_opt,
    greedy_bound,
    ponss_bound,
    poss_bound,
    submodularity_ratio,
    summarize,
    summarize_checkpoints,
)
from noisysubset.core import ItemSet
from noisysubset.algorithms import Checkpoint
from noisysubset.objectives import CoverageInstance, FunctionObjective, make_coverage


def record(value, checkpoints=()):
    return RunRecord("X", ItemSet(1), 0.0, 0, 0, None, exact_value=value,
                     checkpoints=[Checkpoint(i + 1, float(i + 1), ItemSet(1), v)
                                  for i, v in enumerate(checkpoints)])


class TestBruteForce:
    def test_toy(self, toy):
        s, v = brute_force_opt(toy, 2)
        assert v == 5 and sorted(s) == [0, 2]

    def test_k_zero(self, toy):
        s, v = brute_force_opt(toy, 0)
        assert len(s) == 0 and v == 0

    def test_k_at_least_n(self, toy):
        s, v = brute_force_opt(toy, 7)
        assert v == 6

    def test_guard(self):
        obj = FunctionObjective(26, lambda idx: float(len(idx)))
        with pytest.raises(InstanceTooLarge):
            brute_force_opt(obj, 7)


class TestSubmodularityRatio:
    def test_coverage_is_one(self):
        rng = np.random.default_rng(0)
        for _ in range(3):
            obj = make_coverage(CoverageInstance.random(7, 20, rng, 1, 6))
            s = ItemSet.from_indices(7, [0, 3])
            assert submodularity_ratio(obj, s, 3) == pytest.approx(1.0)

    def test_k_one(self):
        obj = FunctionObjective(3, lambda idx: float(len(idx)) ** 2)
        assert submodularity_ratio(obj, ItemSet.from_indices(3, [0]), 1) == 1.0

    def test_supermodular_pair(self):
        table = {(): 0.0, (0,): 1.0, (1,): 1.0, (0, 1): 4.0}
        obj = FunctionObjective(2, lambda idx: table[idx])
        assert submodularity_ratio(obj, ItemSet(2), 2) == 0.5

    def test_supermodular_with_null_item(self):
        table = {(): 0.0, (0,): 1.0, (1,): 1.0, (0, 1): 4.0}
        obj = FunctionObjective(3, lambda idx: table[tuple(i for i in idx if i != 2)])
        assert submodularity_ratio(obj, ItemSet(3), 2) == 0.5

    def test_all_skipped(self):
        obj = FunctionObjective(3, lambda idx: 0.0)
        assert submodularity_ratio(obj, ItemSet(3), 2) == 1.0

    def test_guard(self):
        obj = FunctionObjective(16, lambda idx: 0.0)
        with pytest.raises(InstanceTooLarge):
            submodularity_ratio(obj, ItemSet(16), 2)


def exact_greedy_bound(eps, gamma, k, scale_k):
    eps, gamma = Fraction(eps), Fraction(gamma)
    denom = 2 * eps * (k if scale_k else 1) + (1 - eps) * gamma
    lead = (1 - eps) * gamma / denom
    return lead * (1 - ((1 - eps) / (1 + eps)) ** k * (1 - gamma / k) ** k)


class TestBounds:
    def test_noise_free_k1(self):
        for variant in ("2eps", "2epsk"):
            assert greedy_bound(BoundInputs(0.0, 1.0, 1), variant) == 1.0
        assert ponss_bound(BoundInputs(0.0, 1.0, 1)) == 1.0

    def test_large_k_limit(self):
        target = 1 - 1 / math.e
        assert greedy_bound(BoundInputs(0.0, 1.0, 10**6)) == pytest.approx(target, abs=1e-6)
        assert ponss_bound(BoundInputs(0.0, 1.0, 10**6)) == pytest.approx(target, abs=1e-6)

    def test_exact_arithmetic(self):
        for scale_k, variant in ((False, "2eps"), (True, "2epsk")):
            expect = exact_greedy_bound(Fraction(1, 10), 1, 5, scale_k)
            assert greedy_bound(BoundInputs(0.1, 1.0, 5), variant) == pytest.approx(float(expect), rel=1e-14)
        expect = Fraction(8, 12) * (1 - Fraction(9, 10) ** 10)
        assert ponss_bound(BoundInputs(0.2, 1.0, 10)) == pytest.approx(float(expect), rel=1e-14)
        assert poss_bound(BoundInputs(0.1, 1.0, 5)) == greedy_bound(BoundInputs(0.1, 1.0, 5), "2epsk")

    def test_validation(self):
        with pytest.raises(ValueError):
            BoundInputs(1.0, 1.0, 1)
        with pytest.raises(ValueError):
            BoundInputs(0.1, 0.0, 1)
        with pytest.raises(ValueError):
            greedy_bound(BoundInputs(0.1, 1.0, 2), "other")

    @given(st.floats(0.0, 0.98), st.floats(0.0, 0.98), st.floats(0.01, 1.0), st.integers(1, 60))
    def test_unit_interval_and_monotone_in_eps(self, e1, e2, gamma, k):
        lo, hi = sorted((e1, e2))
        for f in (lambda i: greedy_bound(i, "2epsk"), ponss_bound):
            a, b = f(BoundInputs(lo, gamma, k)), f(BoundInputs(hi, gamma, k))
            assert 0.0 <= b <= 1.0 + 1e-12 and 0.0 <= a <= 1.0 + 1e-12
            assert b <= a + 1e-12
        short = greedy_bound(BoundInputs(hi, gamma, k), "2eps")
        assert 0.0 <= short <= 1.0 + 1e-12

    def test_short_form_not_monotone(self):
        a = greedy_bound(BoundInputs(0.0, 0.25, 2), "2eps")
        b = greedy_bound(BoundInputs(0.125, 0.25, 2), "2eps")
        assert a == pytest.approx(0.234375) and b > a


class TestSummarize:
    def test_hand_values(self):
        stats = summarize([record(v) for v in (1.0, 2.0, 3.0)])
        assert stats.mean == 2.0 and stats.std == 1.0 and stats.runs == 3

    def test_single(self):
        assert summarize([record(4.0)]).std == 0.0

    def test_explicit_values(self):
        stats = summarize([record(0.0), record(0.0)], [1.0, 3.0])
        assert stats.mean == 2.0
        with pytest.raises(ValueError):
            summarize([record(0.0)], [1.0, 2.0])
        with pytest.raises(ValueError):
            summarize([])

    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=40))
    def test_matches_statistics_module(self, values):
        stats = summarize([record(v) for v in values])
        assert stats.mean == pytest.approx(statistics.fmean(values), abs=1e-12, rel=1e-12)
        assert stats.std == pytest.approx(statistics.stdev(values), abs=1e-9, rel=1e-12)

    def test_checkpoint_aggregation(self):
        recs = [record(0.0, [1.0, 2.0, 3.0]), record(0.0, [3.0, 4.0])]
        out = summarize_checkpoints(recs)
        assert [kn for kn, _ in out] == [1.0, 2.0]
        assert out[0][1].mean == 2.0 and out[1][1].mean == 3.0
