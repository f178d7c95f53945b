"""Two-channel objectives: a noisy, budget-counted ``F`` and an exact ``f``.

Every objective exposes ``noisy_eval(S, rng)`` (one random sample of F(S))
and ``exact_eval(S)`` (the deterministic reporting value). Budget accounting
is done by :func:`evaluate_noisy`, never by the objectives themselves.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import ItemSet


class BudgetExhausted(RuntimeError):
    """Raised when a noisy evaluation is requested with no budget left."""


class Budget:
    """Counter of noisy evaluations against an optional limit.

    ``limit=None`` means unlimited (used by the greedy baseline).
    """

    def __init__(self, limit: int | None = None):
        if limit is not None and limit < 0:
            raise ValueError("budget limit must be nonnegative")
        self.limit = limit
        self.used = 0

    @classmethod
    def default(cls, k: int, n: int) -> "Budget":
        return cls(default_budget(k, n))

    @property
    def remaining(self) -> float:
        return math.inf if self.limit is None else self.limit - self.used

    def can_afford(self, cost: int) -> bool:
        return cost <= self.remaining

    def charge(self, cost: int = 1) -> None:
        if cost > self.remaining:
            raise BudgetExhausted(
                f"need {cost} evaluations, {self.remaining} remaining"
            )
        self.used += cost

    def __repr__(self) -> str:
        return f"Budget(used={self.used}, limit={self.limit})"


def default_budget(k: int, n: int) -> int:
    """``floor(2 e k^2 n)``, the common cap for the Pareto algorithms."""
    return int(math.floor(2.0 * math.e * k * k * n))


class Objective:
    """Base class. Subclasses implement ``_noisy`` and ``_exact``.

    ``_noisy`` and ``_exact`` are only called with nonempty sets; the empty
    set is worth exactly 0 on both channels.
    """

    ground_size: int

    def noisy_eval(self, s: ItemSet, rng: np.random.Generator) -> float:
        if len(s) == 0:
            return 0.0
        return float(self._noisy(s, rng))

    def exact_eval(self, s: ItemSet) -> float:
        if len(s) == 0:
            return 0.0
        return float(self._exact(s))

    def _noisy(self, s: ItemSet, rng: np.random.Generator) -> float:
        return self._exact(s)

    def _exact(self, s: ItemSet) -> float:
        raise NotImplementedError


def evaluate_noisy(
    obj: Objective, s: ItemSet, rng: np.random.Generator, budget: Budget | None = None
) -> float:
    """Draw one sample of F(S), charging one unit to ``budget``.

    F(empty) is 0 and free.
    """
    if len(s) == 0:
        return 0.0
    if budget is not None:
        budget.charge(1)
    return obj.noisy_eval(s, rng)


def evaluate_exact(obj: Objective, s: ItemSet) -> float:
    return obj.exact_eval(s)


class FunctionObjective(Objective):
    """Noise-free objective backed by a plain callable on index tuples."""

    def __init__(self, ground_size: int, func: Callable[[tuple[int, ...]], float]):
        self.ground_size = ground_size
        self.func = func

    def _exact(self, s):
        return self.func(tuple(int(i) for i in s.indices))


def uniform_delta(rng: np.random.Generator, epsilon: float) -> float:
    return rng.uniform(-epsilon, epsilon)


class MultiplicativeNoise(Objective):
    """F(S) = f(S) * (1 + delta), delta drawn per call from ``sampler``.

    The default sampler is Uniform(-epsilon, +epsilon). Any replacement must
    have mean zero and support inside ``[-epsilon, epsilon]``.
    """

    def __init__(self, base: Objective, epsilon: float, sampler=uniform_delta):
        if not 0.0 <= epsilon < 1.0:
            raise ValueError(f"epsilon must lie in [0, 1), got {epsilon}")
        self.base = base
        self.epsilon = float(epsilon)
        self.sampler = sampler
        self.ground_size = base.ground_size

    def _noisy(self, s, rng):
        value = self.base.exact_eval(s)
        if self.epsilon == 0.0:
            return value
        return value * (1.0 + self.sampler(rng, self.epsilon))

    def _exact(self, s):
        return self.base.exact_eval(s)


def wrap_multiplicative_noise(base: Objective, epsilon: float, sampler=uniform_delta) -> MultiplicativeNoise:
    return MultiplicativeNoise(base, epsilon, sampler)


@dataclass
class CoverageInstance:
    """Item ``i`` covers the elements ``covers[i]`` of a universe of ``universe_size``."""

    covers: list[frozenset[int]]
    universe_size: int

    def __post_init__(self):
        if not self.covers:
            raise ValueError("coverage instance needs at least one item")
        for i, c in enumerate(self.covers):
            if any(e < 0 or e >= self.universe_size for e in c):
                raise ValueError(f"item {i} covers an element outside the universe")

    @property
    def n(self) -> int:
        return len(self.covers)

    @classmethod
    def from_lists(cls, covers: Sequence[Sequence[int]], universe_size: int | None = None):
        sets = [frozenset(int(e) for e in c) for c in covers]
        if universe_size is None:
            universe_size = max((max(c) for c in sets if c), default=-1) + 1
        return cls(sets, universe_size)

    @classmethod
    def random(cls, n: int, universe_size: int, rng: np.random.Generator,
               min_cover: int = 1, max_cover: int | None = None) -> "CoverageInstance":
        max_cover = universe_size if max_cover is None else max_cover
        covers = []
        for _ in range(n):
            m = int(rng.integers(min_cover, max_cover + 1))
            covers.append(frozenset(int(e) for e in rng.choice(universe_size, m, replace=False)))
        return cls(covers, universe_size)


class CoverageObjective(Objective):
    """f(S) = size of the union of the elements covered by S. Noise-free."""

    def __init__(self, instance: CoverageInstance):
        self.instance = instance
        self.ground_size = instance.n
        mat = np.zeros((instance.n, max(instance.universe_size, 1)), dtype=bool)
        for i, c in enumerate(instance.covers):
            mat[i, list(c)] = True
        self._matrix = mat

    def _exact(self, s):
        return int(np.count_nonzero(self._matrix[s.bits].any(axis=0)))


def make_coverage(instance: CoverageInstance) -> CoverageObjective:
    return CoverageObjective(instance)


def load_coverage(source) -> CoverageInstance:
    """Parse the plain-text coverage format.

    First line ``n U``; then one line per item listing the covered element
    indices (0-based, whitespace separated; an empty line covers nothing).
    ``source`` is a path or a text stream.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as fh:
            return load_coverage(fh)
    if isinstance(source, (bytes, bytearray)):
        source = io.StringIO(source.decode("utf-8"))
    lines = [ln.rstrip("\n") for ln in source]
    if not lines:
        raise ValueError("empty coverage file")
    try:
        n, universe = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"line 1: expected 'n |U|', got {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) < n:
        raise ValueError(f"expected {n} item lines, found {len(body)}")
    covers = []
    for lineno, line in enumerate(body[:n], start=2):
        try:
            covers.append(frozenset(int(t) for t in line.split()))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: non-integer element") from exc
    return CoverageInstance(covers, universe)


def save_coverage(instance: CoverageInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{instance.n} {instance.universe_size}\n")
        for c in instance.covers:
            fh.write(" ".join(str(e) for e in sorted(c)) + "\n")
