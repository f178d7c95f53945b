"""Verification helpers: exhaustive optimum, submodularity ratio, approximation bounds, run statistics."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ItemSet
from .objectives import Objective


class InstanceTooLarge(ValueError):
    pass


def brute_force_opt(obj: Objective, k: int) -> tuple[ItemSet, float]:
    """Maximize the exact objective over every subset of size at most ``k``."""
    n = obj.ground_size
    if n > 25 and k > 6:
        raise InstanceTooLarge(f"refusing to enumerate C({n}, <={k}) subsets")
    best_set, best_val = ItemSet(n), obj.exact_eval(ItemSet(n))
    for size in range(1, min(k, n) + 1):
        for combo in itertools.combinations(range(n), size):
            s = ItemSet.from_indices(n, combo)
            val = obj.exact_eval(s)
            if val > best_val:
                best_set, best_val = s, val
    return best_set, best_val


def submodularity_ratio(obj: Objective, s: ItemSet, k: int) -> float:
    """Minimum over ``L <= S`` and disjoint ``R`` with ``|R| <= k`` of
    ``sum_{v in R} (f(L+v) - f(L)) / (f(L+R) - f(L))``.

    Pairs whose denominator is zero are skipped; 1.0 is returned if every
    pair is skipped.
    """
    n = obj.ground_size
    if len(s) > 10 or n > 15:
        raise InstanceTooLarge("submodularity ratio is only enumerated for |S| <= 10, n <= 15")
    members = list(s)
    cache: dict[frozenset, float] = {}

    def f(items: frozenset) -> float:
        if items not in cache:
            cache[items] = obj.exact_eval(ItemSet.from_indices(n, items))
        return cache[items]

    gamma = 1.0
    found = False
    for lsize in range(len(members) + 1):
        for L in itertools.combinations(members, lsize):
            L = frozenset(L)
            base = f(L)
            rest = [v for v in range(n) if v not in L]
            gains = {v: f(L | {v}) - base for v in rest}
            for rsize in range(1, min(k, len(rest)) + 1):
                for R in itertools.combinations(rest, rsize):
                    denom = f(L | frozenset(R)) - base
                    if denom == 0:
                        continue
                    ratio = sum(gains[v] for v in R) / denom
                    if not found or ratio < gamma:
                        gamma, found = ratio, True
    return gamma if found else 1.0


@dataclass(frozen=True)
class BoundInputs:
    epsilon: float
    gamma: float
    k: int

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError("epsilon must lie in [0, 1)")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if self.k < 1:
            raise ValueError("k must be >= 1")


def greedy_bound(inp: BoundInputs, variant: str = "2epsk") -> float:
    """Approximation ratio of greedy under epsilon-bounded multiplicative noise.

    Two forms of the leading factor circulate for the same result:
    ``variant="2epsk"`` (default) uses ``2 eps k + (1-eps) gamma`` in the
    denominator, ``variant="2eps"`` uses ``2 eps + (1-eps) gamma``.

    Notes
    -----
    Only the ``2epsk`` form is nonincreasing in ``eps`` everywhere. The
    ``2eps`` form can rise with ``eps``, e.g. ``gamma=0.25, k=2`` gives
    0.234 at ``eps=0`` and 0.251 at ``eps=0.125``.
    """
    eps, g, k = inp.epsilon, inp.gamma, inp.k
    if variant == "2eps":
        denom = 2.0 * eps + (1.0 - eps) * g
    elif variant == "2epsk":
        denom = 2.0 * eps * k + (1.0 - eps) * g
    else:
        raise ValueError("variant must be '2eps' or '2epsk'")
    lead = (1.0 - eps) * g / denom
    return lead * (1.0 - ((1.0 - eps) / (1.0 + eps)) ** k * (1.0 - g / k) ** k)


def poss_bound(inp: BoundInputs) -> float:
    """POSS guarantee with ``gamma_min``; same shape as the ``2epsk`` greedy form."""
    return greedy_bound(inp, "2epsk")


def ponss_bound(inp: BoundInputs) -> float:
    eps, g, k = inp.epsilon, inp.gamma, inp.k
    return (1.0 - eps) / (1.0 + eps) * (1.0 - (1.0 - g / k) ** k)


@dataclass
class RunStats:
    mean: float
    std: float
    runs: int


def _stats(values: Sequence[float]) -> RunStats:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("no values to summarize")
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return RunStats(float(arr.mean()), std, int(arr.size))


def summarize(records, values: Sequence[float] | None = None) -> RunStats:
    """Mean and sample standard deviation of final exact values.

    ``values`` overrides the ``exact_value`` stored on the records.
    """
    records = list(records)
    if values is None:
        values = [r.exact_value for r in records]
    if len(values) != len(records):
        raise ValueError("one value per record is required")
    return _stats(values)


def summarize_checkpoints(records) -> list[tuple[float, RunStats]]:
    """Per-checkpoint statistics for anytime curves, keyed by kn position.

    Only positions reached by every run are reported.
    """
    records = list(records)
    if not records:
        raise ValueError("no records")
    depth = min(len(r.checkpoints) for r in records)
    out = []
    for i in range(depth):
        vals = [r.checkpoints[i].exact_value for r in records]
        out.append((records[0].checkpoints[i].kn, _stats(vals)))
    return out

