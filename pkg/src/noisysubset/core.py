"""Subsets, bi-objective fitness, (theta-)domination and the size-bucketed archive.

A solution is a Boolean vector over a fixed ground set of ``n`` items. The
Pareto-optimization algorithms maximize ``(f1, -|x|)``; ``f1`` may be
``-inf`` for solutions that are too large to be useful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

NEG_INF = -math.inf


class ItemSet:
    """Immutable subset of ``{0, ..., n-1}`` stored as a Boolean vector.

    Parameters
    ----------
    universe_size : int
        Number of items ``n`` in the ground set.
    bits : array_like of bool, optional
        Membership indicator of length ``n``. Defaults to the empty set.
    """

    __slots__ = ("_bits", "_key", "_size")

    def __init__(self, universe_size: int, bits=None):
        if bits is None:
            arr = np.zeros(universe_size, dtype=bool)
        else:
            arr = np.array(bits, dtype=bool, copy=True)
            if arr.shape != (universe_size,):
                raise ValueError(
                    f"bits must have shape ({universe_size},), got {arr.shape}"
                )
        arr.setflags(write=False)
        self._bits = arr
        self._key = None
        self._size = int(arr.sum())

    @classmethod
    def from_indices(cls, universe_size: int, indices: Iterable[int]) -> "ItemSet":
        bits = np.zeros(universe_size, dtype=bool)
        idx = np.fromiter((int(i) for i in indices), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= universe_size):
            raise ValueError(f"indices must lie in [0, {universe_size})")
        bits[idx] = True
        return cls(universe_size, bits)

    @classmethod
    def full(cls, universe_size: int) -> "ItemSet":
        return cls(universe_size, np.ones(universe_size, dtype=bool))

    @property
    def universe_size(self) -> int:
        return self._bits.shape[0]

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self._bits)

    def __len__(self) -> int:
        return self._size

    def __contains__(self, item: int) -> bool:
        return 0 <= item < self.universe_size and bool(self._bits[item])

    def __iter__(self) -> Iterator[int]:
        return iter(int(i) for i in self.indices)

    def _hash_key(self) -> bytes:
        if self._key is None:
            self._key = np.packbits(self._bits).tobytes()
        return self._key

    def __eq__(self, other) -> bool:
        if not isinstance(other, ItemSet):
            return NotImplemented
        return (
            self.universe_size == other.universe_size
            and self._hash_key() == other._hash_key()
        )

    def __hash__(self) -> int:
        return hash((self.universe_size, self._hash_key()))

    def __repr__(self) -> str:
        return f"ItemSet(n={self.universe_size}, {sorted(self)})"

    def add(self, item: int) -> "ItemSet":
        bits = self._bits.copy()
        bits[item] = True
        return ItemSet(self.universe_size, bits)

    def remove(self, item: int) -> "ItemSet":
        bits = self._bits.copy()
        bits[item] = False
        return ItemSet(self.universe_size, bits)

    def leave_one_out(self) -> list["ItemSet"]:
        """All subsets with exactly one member removed, in ascending index order."""
        return [self.remove(i) for i in self.indices]

    def issubset(self, other: "ItemSet") -> bool:
        return bool(np.all(other._bits[self._bits]))


@dataclass(frozen=True, slots=True)
class BiFitness:
    """Value of the bi-objective ``(f1, f2)`` with ``f2 = -size``."""

    f1: float
    size: int

    @property
    def f2(self) -> int:
        return -self.size


@dataclass(slots=True)
class Individual:
    set: ItemSet
    fitness: BiFitness
    birth_iteration: int = 0


@dataclass(frozen=True)
class ThetaParams:
    theta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta < 1.0:
            raise ValueError(f"theta must lie in [0, 1), got {self.theta}")

    @property
    def ratio(self) -> float:
        return (1.0 + self.theta) / (1.0 - self.theta)


def _theta(theta) -> ThetaParams:
    return theta if isinstance(theta, ThetaParams) else ThetaParams(float(theta))


def mutate(parent: ItemSet, rng: np.random.Generator) -> ItemSet:
    """Flip every bit independently with probability ``1/n``."""
    n = parent.universe_size
    flips = rng.random(n) < 1.0 / n
    return ItemSet(n, parent.bits ^ flips)


def weakly_dominates(a: BiFitness, b: BiFitness) -> bool:
    return a.f1 >= b.f1 and a.size <= b.size


def dominates(a: BiFitness, b: BiFitness) -> bool:
    return weakly_dominates(a, b) and (a.f1 > b.f1 or a.size < b.size)


def _scaled(f1: float, ratio: float) -> float:
    # -inf * ratio is -inf; ratio >= 1 so no nan arises from finite inputs
    return f1 if f1 == NEG_INF else ratio * f1


def weakly_theta_dominates(a: BiFitness, b: BiFitness, theta) -> bool:
    """``a.f1 >= (1+theta)/(1-theta) * b.f1`` and ``|a| <= |b|``.

    The inequality is applied literally, so the usual reading only holds for
    nonnegative ``f1``.
    """
    ratio = _theta(theta).ratio
    return a.f1 >= _scaled(b.f1, ratio) and a.size <= b.size


def theta_dominates(a: BiFitness, b: BiFitness, theta) -> bool:
    ratio = _theta(theta).ratio
    bound = _scaled(b.f1, ratio)
    if not (a.f1 >= bound and a.size <= b.size):
        return False
    return a.f1 > bound or a.size < b.size


@dataclass
class Population:
    """Archive of individuals bucketed by subset size.

    Members are iterated in canonical order: ascending size, then insertion
    order inside each bucket.
    """

    buckets: dict[int, list[Individual]] = field(default_factory=dict)
    cap: int | None = None

    def __len__(self) -> int:
        return sum(len(b) for b in self.buckets.values())

    def __iter__(self) -> Iterator[Individual]:
        for size in sorted(self.buckets):
            yield from self.buckets[size]

    def members(self) -> list[Individual]:
        return list(self)

    def bucket(self, size: int) -> list[Individual]:
        return self.buckets.get(size, [])

    def add(self, ind: Individual) -> None:
        self.buckets.setdefault(ind.fitness.size, []).append(ind)

    def discard(self, ind: Individual) -> None:
        bucket = self.buckets[ind.fitness.size]
        for i, member in enumerate(bucket):
            if member is ind:
                del bucket[i]
                break
        if not bucket:
            del self.buckets[ind.fitness.size]

    def copy(self) -> "Population":
        return Population({s: list(b) for s, b in self.buckets.items()}, self.cap)

    def best(self, k: int) -> Individual:
        """Member with the largest cached ``f1`` among those of size at most ``k``.

        Ties go to the first member in canonical order.
        """
        best = None
        for ind in self:
            if ind.fitness.size > k:
                break
            if best is None or ind.fitness.f1 > best.fitness.f1:
                best = ind
        if best is None:
            raise ValueError("population holds no member of size <= k")
        return best


def insert_offspring(pop: Population, offspring: Individual, theta=0.0) -> bool:
    """Try to add ``offspring`` under theta-domination.

    Returns False (archive untouched) when some member theta-dominates the
    offspring or its ``f1`` is ``-inf``. Otherwise every member weakly
    theta-dominated by the offspring is removed and the offspring is added.
    With ``theta=0`` this is the plain Pareto update.
    """
    fit = offspring.fitness
    if fit.f1 == NEG_INF:
        return False
    ratio = _theta(theta).ratio
    new_bound = _scaled(fit.f1, ratio)
    for ind in pop:
        z = ind.fitness
        # z theta-dominates offspring
        if z.f1 >= new_bound and z.size <= fit.size and (
            z.f1 > new_bound or z.size < fit.size
        ):
            return False
    for size in [s for s in pop.buckets if s >= fit.size]:
        kept = [
            ind
            for ind in pop.buckets[size]
            if not (fit.f1 >= _scaled(ind.fitness.f1, ratio))
        ]
        if kept:
            pop.buckets[size] = kept
        else:
            del pop.buckets[size]
    pop.add(offspring)
    return True


def trim_bucket_min_f1(
    pop: Population, size: int, cap: int, rng: np.random.Generator
) -> Individual | None:
    """Evict one minimal-``f1`` member of bucket ``size`` once it exceeds ``cap``.

    Ties among minimal members are broken uniformly at random.
    """
    bucket = pop.bucket(size)
    if len(bucket) <= cap:
        return None
    low = min(ind.fitness.f1 for ind in bucket)
    candidates = [ind for ind in bucket if ind.fitness.f1 == low]
    victim = candidates[int(rng.integers(len(candidates)))] if len(candidates) > 1 else candidates[0]
    pop.discard(victim)
    return victim


def select_uniform(pop: Population, rng: np.random.Generator) -> Individual:
    """Draw one member uniformly over the whole archive."""
    total = len(pop)
    if total == 0:
        raise ValueError("cannot select from an empty population")
    r = int(rng.integers(total))
    for size in sorted(pop.buckets):
        bucket = pop.buckets[size]
        if r < len(bucket):
            return bucket[r]
        r -= len(bucket)
    raise AssertionError("unreachable")
