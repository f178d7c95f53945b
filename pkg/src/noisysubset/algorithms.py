"""Greedy, POSS, PONSS, PORE and the PORE-F ablation with exact budget accounting.

All Pareto-style optimizers share one loop (:func:`_pareto_loop`); they differ
only in how ``f1`` of an offspring is computed, in the domination threshold
``theta`` and in how over-full size buckets are trimmed.

Budget rules:

* one noisy evaluation = one unit; F(empty) is free;
* offspring with ``|x| >= 2k`` get ``f1 = -inf`` for free;
* before evaluating an offspring the loop checks that its cost fits in the
  remaining budget; if not the offspring is discarded and the run ends;
* for PONSS the tournament (``2B`` units) is only known to be needed after
  insertion; if it no longer fits, the insertion is rolled back and the run
  ends;
* the returned subset is chosen from cached fitness values (no terminal
  re-evaluation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    NEG_INF,
    BiFitness,
    Individual,
    ItemSet,
    Population,
    ThetaParams,
    insert_offspring,
    mutate,
    select_uniform,
    trim_bucket_min_f1,
)
from .objectives import Budget, BudgetExhausted, Objective, default_budget, evaluate_noisy

__all__ = [
    "AlgoConfig", "Budget", "Checkpoint", "IterationInfo", "RunRecord",
    "greedy", "poss", "ponss", "pore", "pore_f", "robust_f1",
    "run_algorithm", "run_with_checkpoints", "fill_checkpoint_values",
    "ALGORITHMS", "default_budget",
]

LITERAL = "literal"
FALLBACK = "fallback"
# consecutive free iterations tolerated before a run is declared stalled
_STALL_LIMIT = 100_000


@dataclass
class AlgoConfig:
    """Parameters shared by the optimizers.

    ``B`` defaults to ``k``. ``checkpoint_interval`` is in evaluations
    (typically ``k * n``); ``None`` disables checkpointing.
    """

    k: int
    theta: float = 0.0
    B: int | None = None
    robust_singleton: str = FALLBACK
    pore_f: bool = False
    cache_robust: bool = False
    checkpoint_interval: int | None = None
    max_iterations: int | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.B is None:
            self.B = self.k
        if self.B < 1:
            raise ValueError("B must be >= 1")
        ThetaParams(self.theta)
        if self.robust_singleton not in (LITERAL, FALLBACK):
            raise ValueError("robust_singleton must be 'literal' or 'fallback'")
        if self.checkpoint_interval is not None and self.checkpoint_interval < 1:
            raise ValueError("checkpoint_interval must be >= 1 evaluation")


@dataclass
class Checkpoint:
    evals: int
    kn: float
    subset: ItemSet
    exact_value: float | None = None


@dataclass
class RunRecord:
    algorithm: str
    subset: ItemSet
    f1: float
    evals_used: int
    iterations: int
    budget_limit: int | None
    seed: int | None = None
    exact_value: float | None = None
    checkpoints: list[Checkpoint] = field(default_factory=list)


@dataclass
class IterationInfo:
    """Passed to the ``on_iteration`` hook after every Pareto iteration."""

    iteration: int
    offspring_size: int
    evals_before: int
    evals_after: int
    accepted: bool
    tournament: bool
    population: Population

    @property
    def cost(self) -> int:
        return self.evals_after - self.evals_before


class _Checkpointer:
    def __init__(self, interval, kn):
        self.interval = interval
        self.kn = kn
        self.next = interval
        self.points: list[Checkpoint] = []

    def update(self, used, best_subset: Callable[[], ItemSet]):
        if self.interval is None:
            return
        while used >= self.next:
            self.points.append(Checkpoint(self.next, self.next / self.kn, best_subset()))
            self.next += self.interval


def robust_f1(obj: Objective, x: ItemSet, k: int, rng: np.random.Generator,
              policy: str = FALLBACK, budget: Budget | None = None,
              cache: dict | None = None) -> float:
    """Mean noisy value of the ``|x|`` subsets obtained by dropping one item.

    ``-inf`` (free) when ``|x| >= 2k``; 0 for the empty set. For singletons
    the literal formula gives F(empty) = 0 for free; the ``fallback`` policy
    uses F(x) instead (one evaluation). Raises :class:`BudgetExhausted`
    before spending anything if the budget cannot cover all evaluations.
    """
    size = len(x)
    if size >= 2 * k:
        return NEG_INF
    if size == 0:
        return 0.0
    if size == 1:
        if policy == LITERAL:
            return 0.0
        return evaluate_noisy(obj, x, rng, budget)
    subsets = x.leave_one_out()
    if cache is None:
        if budget is not None and not budget.can_afford(size):
            raise BudgetExhausted(f"robust evaluation needs {size} evaluations")
        return sum(evaluate_noisy(obj, y, rng, budget) for y in subsets) / size
    missing = [y for y in subsets if y not in cache]
    if budget is not None and not budget.can_afford(len(missing)):
        raise BudgetExhausted(f"robust evaluation needs {len(missing)} evaluations")
    for y in missing:
        cache[y] = evaluate_noisy(obj, y, rng, budget)
    return sum(cache[y] for y in subsets) / size


def greedy(obj: Objective, k: int, rng: np.random.Generator,
           budget: Budget | None = None, checkpoint_interval: int | None = None) -> RunRecord:
    """Add, k times, the item whose addition has the largest noisy value.

    Ties are broken uniformly at random. Uses ``sum_{i<k} (n - i)``
    evaluations and is not bound by the Pareto budget unless one is passed.
    """
    n = obj.ground_size
    if k > n:
        raise ValueError("k must not exceed the ground-set size")
    budget = Budget(None) if budget is None else budget
    cp = _Checkpointer(checkpoint_interval, k * n)
    current = ItemSet(n)
    best_value = 0.0
    for _ in range(k):
        candidates = np.flatnonzero(~current.bits)
        if not budget.can_afford(len(candidates)):
            break
        values = np.array([evaluate_noisy(obj, current.add(int(v)), rng, budget)
                           for v in candidates])
        top = np.flatnonzero(values == values.max())
        pick = top[int(rng.integers(len(top)))] if len(top) > 1 else top[0]
        current = current.add(int(candidates[pick]))
        best_value = float(values[pick])
        cp.update(budget.used, lambda: current)
    return RunRecord("greedy", current, best_value, budget.used, len(current),
                     budget.limit, checkpoints=cp.points)


def _offspring_cost(size: int, k: int, mode: str, cfg: AlgoConfig) -> int:
    if size == 0 or size >= 2 * k:
        return 0
    if mode == "pore" and not cfg.pore_f:
        if size == 1:
            return 0 if cfg.robust_singleton == LITERAL else 1
        return size
    return 1


def _pareto_loop(obj: Objective, cfg: AlgoConfig, budget: Budget,
                 rng: np.random.Generator, mode: str, name: str,
                 on_iteration: Callable[[IterationInfo], None] | None = None) -> RunRecord:
    n, k, B = obj.ground_size, cfg.k, cfg.B
    theta = 0.0 if mode == "poss" else cfg.theta
    cache = {} if (mode == "pore" and cfg.cache_robust) else None
    pop = Population(cap=None if mode == "poss" else B)
    pop.add(Individual(ItemSet(n), BiFitness(0.0, 0), 0))
    cp = _Checkpointer(cfg.checkpoint_interval, k * n)
    best_subset = lambda: pop.best(k).set  # noqa: E731

    it = 0
    idle = 0
    while budget.remaining > 0:
        if cfg.max_iterations is not None and it >= cfg.max_iterations:
            break
        parent = select_uniform(pop, rng)
        child = mutate(parent.set, rng)
        size = len(child)
        cost = _offspring_cost(size, k, mode, cfg) if cache is None else 0
        if not budget.can_afford(cost):
            break
        before = budget.used
        if size >= 2 * k:
            f1 = NEG_INF
        elif mode == "pore" and not cfg.pore_f:
            try:
                f1 = robust_f1(obj, child, k, rng, cfg.robust_singleton, budget, cache)
            except BudgetExhausted:
                break
        else:
            f1 = evaluate_noisy(obj, child, rng, budget)
        offspring = Individual(child, BiFitness(f1, size), it)

        tournament = False
        stop = False
        if mode == "ponss":
            backup = pop.copy() if not budget.can_afford(2 * B) else None
            accepted = insert_offspring(pop, offspring, theta)
            if accepted and len(pop.bucket(size)) == B + 1:
                if backup is not None:
                    pop.buckets = backup.buckets  # restore in place
                    accepted, stop = False, True
                else:
                    _tournament(obj, pop, size, B, rng, budget)
                    tournament = True
        else:
            accepted = insert_offspring(pop, offspring, theta)
            if accepted and mode == "pore":
                trim_bucket_min_f1(pop, size, B, rng)

        it += 1
        idle = idle + 1 if budget.used == before else 0
        cp.update(budget.used, best_subset)
        if on_iteration is not None:
            on_iteration(IterationInfo(it, size, before, budget.used, accepted, tournament, pop))
        if stop or idle >= _STALL_LIMIT:
            break

    best = pop.best(k)
    return RunRecord(name, best.set, best.fitness.f1, budget.used, it, budget.limit,
                     checkpoints=cp.points)


def _tournament(obj, pop: Population, size: int, B: int, rng, budget) -> None:
    """Re-evaluate random pairs of the over-full bucket and keep ``B`` winners."""
    pool = pop.buckets.pop(size)
    for _ in range(B):
        i, j = rng.choice(len(pool), 2, replace=False)
        a, b = pool[i], pool[j]
        fa = evaluate_noisy(obj, a.set, rng, budget)
        fb = evaluate_noisy(obj, b.set, rng, budget)
        if fa > fb:
            winner = a
        elif fb > fa:
            winner = b
        else:
            winner = a if rng.integers(2) == 0 else b
        pop.add(winner)
        pool.remove(winner)


def poss(obj, cfg: AlgoConfig, budget: Budget, rng, on_iteration=None) -> RunRecord:
    return _pareto_loop(obj, cfg, budget, rng, "poss", "POSS", on_iteration)


def ponss(obj, cfg: AlgoConfig, budget: Budget, rng, on_iteration=None) -> RunRecord:
    return _pareto_loop(obj, cfg, budget, rng, "ponss", "PONSS", on_iteration)


def pore(obj, cfg: AlgoConfig, budget: Budget, rng, on_iteration=None) -> RunRecord:
    name = "PORE-F" if cfg.pore_f else "PORE"
    return _pareto_loop(obj, cfg, budget, rng, "pore", name, on_iteration)


def pore_f(obj, cfg: AlgoConfig, budget: Budget, rng, on_iteration=None) -> RunRecord:
    """PORE with ``f1 = F(x)`` instead of the robust evaluation."""
    if not cfg.pore_f:
        cfg = AlgoConfig(**{**cfg.__dict__, "pore_f": True})
    return pore(obj, cfg, budget, rng, on_iteration)


ALGORITHMS = {
    "greedy": None,
    "poss": poss,
    "ponss": ponss,
    "pore": pore,
    "pore-f": pore_f,
}


def run_algorithm(name: str, obj: Objective, cfg: AlgoConfig, seed: int,
                  budget: Budget | int | None = None, on_iteration=None,
                  evaluate: bool = True) -> RunRecord:
    """Seeded single run; fills in the exact value of the result and checkpoints.

    ``budget`` may be a :class:`Budget`, a limit, or ``None`` for the
    default ``floor(2 e k^2 n)`` (greedy ignores ``None`` and runs unbounded).
    """
    key = name.lower()
    if key not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}")
    rng = np.random.default_rng(seed)
    if key == "greedy":
        b = budget if isinstance(budget, Budget) else Budget(budget)
        record = greedy(obj, cfg.k, rng, b, cfg.checkpoint_interval)
    else:
        if budget is None:
            b = Budget.default(cfg.k, obj.ground_size)
        elif isinstance(budget, Budget):
            b = budget
        else:
            b = Budget(int(budget))
        record = ALGORITHMS[key](obj, cfg, b, rng, on_iteration)
    record.seed = seed
    if evaluate:
        record.exact_value = obj.exact_eval(record.subset)
        fill_checkpoint_values(record, obj)
    return record


def fill_checkpoint_values(record: RunRecord, obj: Objective) -> RunRecord:
    """Compute exact values of checkpoint snapshots after the run has ended."""
    memo = {}
    for point in record.checkpoints:
        if point.subset not in memo:
            memo[point.subset] = obj.exact_eval(point.subset)
        point.exact_value = memo[point.subset]
    return record


def run_with_checkpoints(name: str, obj: Objective, cfg: AlgoConfig, seed: int,
                         interval_kn: float = 1.0, budget=None) -> RunRecord:
    """Seeded run that snapshots the best-so-far subset every ``interval_kn * k * n`` evaluations."""
    interval = max(1, int(math.floor(interval_kn * cfg.k * obj.ground_size)))
    cfg = AlgoConfig(**{**cfg.__dict__, "checkpoint_interval": interval})
    return run_algorithm(name, obj, cfg, seed, budget)
