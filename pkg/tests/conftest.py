import itertools

import numpy as np
import pytest

from noisysubset.objectives import CoverageInstance, Objective, make_coverage


class CountingObjective(Objective):
    """Wraps an objective and counts noisy calls independently of Budget."""

    def __init__(self, base):
        self.base = base
        self.ground_size = base.ground_size
        self.calls = 0

    def noisy_eval(self, s, rng):
        self.calls += 1
        return self.base.noisy_eval(s, rng)

    def exact_eval(self, s):
        return self.base.exact_eval(s)


def toy_instance():
    # v1={1,2,3}, v2={3,4}, v3={4,5}, v4={6}
    return CoverageInstance.from_lists([[1, 2, 3], [3, 4], [4, 5], [6]])


def enumerate_opt(obj, k):
    """Exhaustive optimum written independently of analysis.brute_force_opt."""
    from noisysubset.core import ItemSet

    n = obj.ground_size
    best = 0.0
    for r in range(k + 1):
        for combo in itertools.combinations(range(n), r):
            best = max(best, obj.exact_eval(ItemSet.from_indices(n, combo)))
    return best


@pytest.fixture
def toy():
    return make_coverage(toy_instance())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance lines collected by tests/test_acceptance.py and printed at the end
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[num])
