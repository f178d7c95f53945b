import io
import itertools

import numpy as np
import pytest

from noisysubset.core import ItemSet
from noisysubset.objectives import (
    Budget,
    BudgetExhausted,
    CoverageInstance,
    default_budget,
    evaluate_exact,
    evaluate_noisy,
    load_coverage,
    make_coverage,
    save_coverage,
    wrap_multiplicative_noise,
)

from .conftest import CountingObjective


def S(n, *idx):
    return ItemSet.from_indices(n, idx)


class TestCoverage:
    def test_values(self, toy):
        assert evaluate_exact(toy, S(4, 0)) == 3
        assert evaluate_exact(toy, S(4, 0, 1)) == 4
        assert evaluate_exact(toy, S(4, 0, 2)) == 5
        assert evaluate_exact(toy, ItemSet.full(4)) == 6
        assert evaluate_exact(toy, ItemSet(4)) == 0

    def test_deterministic(self, toy):
        s = S(4, 1, 3)
        assert len({evaluate_exact(toy, s) for _ in range(5)}) == 1

    def test_noisy_equals_exact_without_noise(self, toy, rng):
        s = S(4, 0, 2)
        assert evaluate_noisy(toy, s, rng) == evaluate_exact(toy, s)

    def test_submodular_and_monotone_exhaustive(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            obj = make_coverage(CoverageInstance.random(8, 15, rng, 1, 6))
            n = obj.ground_size
            values = {}
            for r in range(n + 1):
                for c in itertools.combinations(range(n), r):
                    values[frozenset(c)] = obj.exact_eval(S(n, *c))
            for A, fa in values.items():
                for B, fb in values.items():
                    if not A <= B:
                        continue
                    assert fa <= fb
                    for v in set(range(n)) - B:
                        assert values[A | {v}] - fa >= values[B | {v}] - fb

    def test_file_roundtrip(self, tmp_path):
        inst = CoverageInstance.from_lists([[0, 1], [], [2, 3, 4]], universe_size=6)
        path = tmp_path / "toy.cov"
        save_coverage(inst, path)
        assert path.read_text().splitlines()[0] == "3 6"
        back = load_coverage(path)
        assert back.covers == inst.covers and back.universe_size == 6

    def test_file_errors(self):
        with pytest.raises(ValueError, match="line 1"):
            load_coverage(io.StringIO("x y\n"))
        with pytest.raises(ValueError, match="line 3"):
            load_coverage(io.StringIO("2 5\n0 1\na\n"))
        with pytest.raises(ValueError, match="outside"):
            load_coverage(io.StringIO("1 2\n5\n"))


class TestNoise:
    def test_zero_epsilon_is_exact(self, toy, rng):
        obj = wrap_multiplicative_noise(toy, 0.0)
        for c in [(0,), (1, 2), (0, 1, 2, 3)]:
            assert obj.noisy_eval(S(4, *c), rng) == toy.exact_eval(S(4, *c))

    def test_zero_value_stays_zero(self, rng):
        inst = CoverageInstance.from_lists([[0], []], universe_size=1)
        obj = wrap_multiplicative_noise(make_coverage(inst), 0.5)
        assert all(obj.noisy_eval(S(2, 1), rng) == 0 for _ in range(100))

    def test_interval(self, rng):
        # one item covering two elements: f = 2
        inst = CoverageInstance.from_lists([[0, 1]])
        obj = wrap_multiplicative_noise(make_coverage(inst), 0.5)
        samples = [obj.noisy_eval(S(1, 0), rng) for _ in range(2000)]
        assert min(samples) >= 1.0 and max(samples) <= 3.0

    def test_mean_and_bounds_eps03(self):
        inst = CoverageInstance.from_lists([list(range(10))])
        obj = wrap_multiplicative_noise(make_coverage(inst), 0.3)
        rng = np.random.default_rng(21)
        samples = np.array([obj.noisy_eval(S(1, 0), rng) for _ in range(10_000)])
        assert samples.min() >= 7.0 and samples.max() <= 13.0
        assert 9.8 <= samples.mean() <= 10.2

    def test_bounded_and_unbiased_random_sets(self):
        rng = np.random.default_rng(4)
        base = make_coverage(CoverageInstance.random(12, 40, rng, 1, 10))
        eps = 0.25
        obj = wrap_multiplicative_noise(base, eps)
        for _ in range(100_000 // 1000):
            s = ItemSet(12, rng.random(12) < 0.4)
            f = base.exact_eval(s)
            xs = np.array([obj.noisy_eval(s, rng) for _ in range(1000)])
            assert np.all(xs >= (1 - eps) * f - 1e-12) and np.all(xs <= (1 + eps) * f + 1e-12)
        s = ItemSet.full(12)
        f = base.exact_eval(s)
        xs = np.array([obj.noisy_eval(s, rng) for _ in range(100_000)])
        assert abs(xs.mean() - f) <= 0.01 * f

    def test_epsilon_validation(self, toy):
        with pytest.raises(ValueError):
            wrap_multiplicative_noise(toy, 1.0)

    def test_custom_sampler(self, toy, rng):
        obj = wrap_multiplicative_noise(toy, 0.2, sampler=lambda r, e: e)
        assert obj.noisy_eval(S(4, 0), rng) == pytest.approx(3.6)


class TestBudget:
    def test_empty_set_is_free(self, toy, rng):
        b = Budget(0)
        assert evaluate_noisy(toy, ItemSet(4), rng, b) == 0.0
        assert b.used == 0

    def test_exhaustion(self, toy, rng):
        b = Budget(2)
        evaluate_noisy(toy, S(4, 0), rng, b)
        evaluate_noisy(toy, S(4, 1), rng, b)
        with pytest.raises(BudgetExhausted):
            evaluate_noisy(toy, S(4, 2), rng, b)
        assert b.used == 2

    def test_counter_matches_calls(self, toy, rng):
        counted = CountingObjective(wrap_multiplicative_noise(toy, 0.1))
        b = Budget(None)
        for _ in range(300):
            s = ItemSet(4, rng.random(4) < 0.5)
            evaluate_noisy(counted, s, rng, b)
        assert counted.calls == b.used

    def test_default_budget(self):
        assert default_budget(3, 10) == 489
        assert default_budget(7, 4039) == 1_075_955
