"""Command-line experiment runner.

Subcommands: ``run``, ``experiment``, ``noise-sweep``, ``theta-sweep`` and
``eval``. Results go to a CSV file with a fixed header, plus a JSON file
holding the resolved configuration, a ``.summary.csv`` with per-cell mean
and standard deviation, and a ``.records.jsonl`` with the selected subsets
and checkpoint series.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .algorithms import AlgoConfig, RunRecord, run_algorithm
from .analysis import RunStats, summarize
from .core import ItemSet
from .influence import InfluenceObjective, load_edge_list
from .objectives import (
    CoverageObjective,
    Objective,
    default_budget,
    load_coverage,
    wrap_multiplicative_noise,
)
from .regression import RegressionObjective, load_tabular, normalize

log = logging.getLogger("noisysubset")

HEADER = ["algorithm", "dataset", "k", "theta", "B", "budget", "seed", "run",
          "exact_value", "evals_used", "wall_ms"]
SUMMARY_HEADER = ["algorithm", "dataset", "k", "theta", "B", "budget", "runs",
                  "mean", "std", "evals_mean"]
ALGO_CHOICES = ["greedy", "poss", "ponss", "pore", "pore-f"]
DATA_DIR_ENV = "NOISYSUBSET_DATA_DIR"

_KIND_BY_SUFFIX = {
    ".txt": "graph", ".edges": "graph", ".edgelist": "graph", ".el": "graph",
    ".svm": "tabular", ".libsvm": "tabular", ".scale": "tabular",
    ".cov": "coverage", ".coverage": "coverage",
}

DEFAULT_K = {"graph": [5, 6, 7, 8, 9, 10], "tabular": [10, 12, 14, 16, 18, 20]}
SWEEP_K = {"graph": 7, "tabular": 16, "coverage": 8}
SWEEP_LEVELS = {"graph": [5, 10, 15, 20], "tabular": [400, 700, 1000, 1300],
                "coverage": [0.0, 0.1, 0.3]}
THETA_GRID = [round(0.1 * i, 1) for i in range(1, 10)]


class CliError(Exception):
    pass


@dataclass
class ExperimentConfig:
    dataset: str
    kind: str
    algorithms: list[str]
    ks: list[int]
    theta: float = 0.0
    B: int | None = None
    runs: int = 30
    seed: int = 0
    budget: int | None = None
    undirected: bool = False
    sims_noisy: int = 10
    sims_exact: int = 10_000
    sample_size: int | None = None
    fixed_sample: bool = False
    normalize: bool = True
    epsilon: float = 0.0
    checkpoint_kn: float | None = None
    robust_singleton: str = "fallback"
    workers: int = 1
    out: str | None = None
    level: float | None = None
    extra: dict = field(default_factory=dict)


def resolve_dataset(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    data_dir = os.environ.get(DATA_DIR_ENV)
    if data_dir and (Path(data_dir) / p).exists():
        return Path(data_dir) / p
    raise CliError(f"dataset not found: {path}")


def infer_kind(path: Path) -> str:
    kind = _KIND_BY_SUFFIX.get(path.suffix.lower())
    if kind is None:
        raise CliError(f"cannot infer dataset kind from {path.name!r}; pass --kind")
    return kind


def derive_seed(base: int, *coords) -> int:
    """Per-run seed from a keyed hash of the grid coordinates."""
    key = "|".join(str(c) for c in coords).encode()
    digest = hashlib.blake2b(key, digest_size=8, key=str(base).encode()).digest()
    return int.from_bytes(digest, "big") >> 1


_OBJECTIVE_CACHE: dict = {}


def build_objective(cfg: ExperimentConfig) -> Objective:
    path = resolve_dataset(cfg.dataset)
    key = (str(path), cfg.kind, cfg.undirected, cfg.sims_noisy, cfg.sims_exact,
           cfg.sample_size, cfg.fixed_sample, cfg.normalize, cfg.epsilon)
    if key in _OBJECTIVE_CACHE:
        return _OBJECTIVE_CACHE[key]
    if cfg.kind == "graph":
        obj = InfluenceObjective(load_edge_list(path, cfg.undirected),
                                 cfg.sims_noisy, max(cfg.sims_exact, cfg.sims_noisy))
    elif cfg.kind == "tabular":
        data = load_tabular(path)
        if cfg.normalize:
            data = normalize(data)
        size = cfg.sample_size if cfg.sample_size is not None else min(1000, data.n_rows)
        if size > data.n_rows:
            raise CliError(f"--sample-size {size} exceeds the {data.n_rows} rows available")
        obj = RegressionObjective(data, size, cfg.fixed_sample)
    elif cfg.kind == "coverage":
        obj = CoverageObjective(load_coverage(path))
        if cfg.epsilon > 0:
            obj = wrap_multiplicative_noise(obj, cfg.epsilon)
    else:
        raise CliError(f"unknown dataset kind {cfg.kind!r}")
    _OBJECTIVE_CACHE[key] = obj
    return obj


def dataset_label(cfg: ExperimentConfig) -> str:
    name = Path(cfg.dataset).name
    if cfg.level is None:
        return name
    var = {"graph": "sims", "tabular": "sample", "coverage": "eps"}[cfg.kind]
    return f"{name}[{var}={cfg.level:g}]"


@dataclass
class Task:
    cfg: ExperimentConfig
    algorithm: str
    k: int
    theta: float
    run: int


def _task_seed(t: Task) -> int:
    coords = [t.algorithm, t.k, t.run]
    if t.cfg.level is not None:
        coords.append(f"level={t.cfg.level:g}")
    if "theta_grid" in t.cfg.extra:
        coords.append(f"theta={t.theta:g}")
    return derive_seed(t.cfg.seed, *coords)


def _execute(t: Task):
    cfg = t.cfg
    obj = build_objective(cfg)
    n = obj.ground_size
    if t.k > n:
        raise CliError(f"k={t.k} exceeds the ground-set size {n}")
    interval = None
    if cfg.checkpoint_kn is not None:
        interval = max(1, int(math.floor(cfg.checkpoint_kn * t.k * n)))
    acfg = AlgoConfig(t.k, theta=t.theta, B=cfg.B, robust_singleton=cfg.robust_singleton,
                      checkpoint_interval=interval)
    seed = _task_seed(t)
    if t.algorithm == "greedy":
        budget = cfg.budget
    else:
        budget = cfg.budget if cfg.budget is not None else default_budget(t.k, n)
    start = time.perf_counter()
    record = run_algorithm(t.algorithm, obj, acfg, seed, budget)
    wall_ms = (time.perf_counter() - start) * 1000.0
    row = {
        "algorithm": record.algorithm,
        "dataset": dataset_label(cfg),
        "k": t.k,
        "theta": f"{t.theta:g}",
        "B": acfg.B,
        "budget": "" if budget is None else budget,
        "seed": seed,
        "run": t.run,
        "exact_value": repr(float(record.exact_value)),
        "evals_used": record.evals_used,
        "wall_ms": f"{wall_ms:.1f}",
    }
    return row, record_to_json(record, row)


def record_to_json(record: RunRecord, row: dict) -> dict:
    return {
        "algorithm": record.algorithm,
        "dataset": row["dataset"],
        "k": row["k"],
        "theta": row["theta"],
        "run": row["run"],
        "seed": record.seed,
        "subset": [int(i) for i in record.subset.indices],
        "f1": record.f1,
        "exact_value": record.exact_value,
        "evals_used": record.evals_used,
        "iterations": record.iterations,
        "checkpoints": [
            {"evals": c.evals, "kn": c.kn, "subset": [int(i) for i in c.subset.indices],
             "exact_value": c.exact_value}
            for c in record.checkpoints
        ],
    }


class ResultSink:
    """Writes rows, summaries, records and metadata next to ``out``."""

    def __init__(self, out: str | None):
        self.out = Path(out) if out else None
        self.rows: list[dict] = []
        self.records: list[dict] = []

    def add(self, row, record):
        self.rows.append(row)
        self.records.append(record)

    def _cells(self):
        cells: dict = {}
        for row in self.rows:
            key = tuple(row[h] for h in ("algorithm", "dataset", "k", "theta", "B", "budget"))
            cells.setdefault(key, []).append(row)
        return cells

    def summaries(self) -> list[tuple[tuple, RunStats, float]]:
        out = []
        for key, rows in self._cells().items():
            stats = summarize(rows, [float(r["exact_value"]) for r in rows])
            evals = float(np.mean([r["evals_used"] for r in rows]))
            out.append((key, stats, evals))
        return out

    def write(self, meta: dict, stream=None):
        summaries = self.summaries()
        targets = []
        if self.out is not None:
            self.out.parent.mkdir(parents=True, exist_ok=True)
            targets.append(open(self.out, "w", newline="", encoding="utf-8"))
        if stream is not None:
            targets.append(stream)
        for fh in targets:
            w = csv.DictWriter(fh, HEADER, lineterminator="\n")
            w.writeheader()
            w.writerows(self.rows)
            for key, stats, evals in summaries:
                w.writerow(dict(zip(HEADER[:6], key), seed="", run="summary",
                                exact_value=repr(stats.mean), evals_used=repr(evals),
                                wall_ms=""))
            if fh is not stream:
                fh.close()
        if self.out is None:
            return
        with open(self.out.with_suffix(".summary.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_HEADER)
            for key, stats, evals in summaries:
                w.writerow([*key, stats.runs, repr(stats.mean), repr(stats.std), repr(evals)])
        with open(self.out.with_suffix(".records.jsonl"), "w", encoding="utf-8") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        with open(self.out.with_suffix(".json"), "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")


def run_tasks(tasks: list[Task], sink: ResultSink, workers: int = 1) -> None:
    """Execute tasks in order; rows reach the sink in task order.

    On failure the completed rows stay in the sink and the error propagates.
    """
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            futures = [pool.submit(_execute, t) for t in tasks]
            for fut in futures:
                sink.add(*fut.result())
    else:
        for t in tasks:
            sink.add(*_execute(t))


def grid_tasks(cfg: ExperimentConfig, thetas=None) -> list[Task]:
    thetas = [cfg.theta] if thetas is None else thetas
    return [Task(cfg, algo, k, th, run)
            for algo in cfg.algorithms for k in cfg.ks for th in thetas
            for run in range(cfg.runs)]


def _finish(sink: ResultSink, meta: dict, tasks_total: int, error: Exception | None) -> int:
    meta["completed_runs"] = len(sink.rows)
    meta["planned_runs"] = tasks_total
    sink.write(meta, stream=None if sink.out else sys.stdout)
    if error is not None:
        print(f"error: {error}", file=sys.stderr)
        return 1
    return 0


def _run_grid(cfgs: list[tuple[ExperimentConfig, list | None]], meta: dict, out: str | None) -> int:
    sink = ResultSink(out)
    tasks = [t for cfg, thetas in cfgs for t in grid_tasks(cfg, thetas)]
    try:
        run_tasks(tasks, sink, cfgs[0][0].workers)
    except Exception as exc:  # partial grids keep completed rows
        return _finish(sink, meta, len(tasks), exc)
    return _finish(sink, meta, len(tasks), None)


def cmd_run(cfg: ExperimentConfig) -> int:
    cfg.runs = 1
    cfg.ks = cfg.ks[:1]
    cfg.algorithms = cfg.algorithms[:1]
    return _run_grid([(cfg, None)], {"command": "run", "config": asdict(cfg)}, cfg.out)


def cmd_experiment(cfg: ExperimentConfig) -> int:
    return _run_grid([(cfg, None)], {"command": "experiment", "config": asdict(cfg)}, cfg.out)


def cmd_noise_sweep(cfg: ExperimentConfig, levels=None) -> int:
    levels = SWEEP_LEVELS[cfg.kind] if levels is None else levels
    cfgs = []
    for level in levels:
        c = ExperimentConfig(**{**asdict(cfg), "level": float(level)})
        if cfg.kind == "graph":
            c.sims_noisy = int(level)
        elif cfg.kind == "tabular":
            c.sample_size = int(level)
        else:
            c.epsilon = float(level)
        cfgs.append((c, None))
    meta = {"command": "noise-sweep", "levels": list(levels), "config": asdict(cfg)}
    return _run_grid(cfgs, meta, cfg.out)


def cmd_theta_sweep(cfg: ExperimentConfig, thetas=None) -> int:
    thetas = THETA_GRID if thetas is None else thetas
    bad = [a for a in cfg.algorithms if a not in ("ponss", "pore")]
    if bad:
        raise CliError(f"theta sweep supports ponss and pore only, got {bad}")
    cfg.extra = {**cfg.extra, "theta_grid": list(thetas)}
    meta = {"command": "theta-sweep", "thetas": list(thetas), "config": asdict(cfg)}
    return _run_grid([(cfg, list(thetas))], meta, cfg.out)


def cmd_eval(cfg: ExperimentConfig, subset: list[int]) -> float:
    obj = build_objective(cfg)
    n = obj.ground_size
    bad = [i for i in subset if not 0 <= i < n]
    if bad:
        raise CliError(f"subset indices out of range [0, {n}): {bad}")
    return obj.exact_eval(ItemSet.from_indices(n, subset))


def _int_list(text: str) -> list[int]:
    """Parse ``5,6,7`` or ``5-10`` or ``10-20:2``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            rng, _, step = part.partition(":")
            lo, hi = rng.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1, int(step) if step else 1))
        elif part:
            out.append(int(part))
    return out


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisysubset", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--dataset", required=True)
        p.add_argument("--kind", choices=["graph", "tabular", "coverage"])
        p.add_argument("--undirected", action="store_true")
        p.add_argument("--sims-noisy", type=int, default=10)
        p.add_argument("--sims-exact", type=int, default=10_000)
        p.add_argument("--sample-size", type=int)
        p.add_argument("--fixed-sample", action="store_true",
                       help="draw one row sample per run instead of per evaluation")
        p.add_argument("--no-normalize", action="store_true")
        p.add_argument("--epsilon", type=float, default=0.0,
                       help="multiplicative noise half-width for coverage datasets")

    def runner(p, many=True):
        common(p)
        p.add_argument("--algo", action="append", choices=ALGO_CHOICES)
        p.add_argument("--k", type=_int_list)
        p.add_argument("--theta", type=float)
        p.add_argument("--B", type=int)
        p.add_argument("--runs", type=int, default=30 if many else 1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--budget", type=int)
        p.add_argument("--checkpoint-kn", type=float)
        p.add_argument("--robust-singleton", choices=["literal", "fallback"], default="fallback")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out")

    runner(sub.add_parser("run", help="one seeded run"), many=False)
    runner(sub.add_parser("experiment", help="algorithm x k x run grid"))
    p = sub.add_parser("noise-sweep", help="one grid per noise level")
    runner(p)
    p.add_argument("--levels", type=_float_list)
    p = sub.add_parser("theta-sweep", help="theta grid for ponss/pore")
    runner(p)
    p.add_argument("--thetas", type=_float_list)
    p = sub.add_parser("eval", help="exact value of a subset")
    common(p)
    p.add_argument("--subset", default="", help="comma-separated item indices")
    return parser


def config_from_args(args) -> ExperimentConfig:
    path = resolve_dataset(args.dataset)
    kind = args.kind or infer_kind(path)
    command = args.command
    algos = getattr(args, "algo", None)
    if not algos:
        algos = {"run": ["pore"], "theta-sweep": ["pore"]}.get(
            command, ["greedy", "poss", "ponss", "pore"])
    ks = getattr(args, "k", None)
    if not ks:
        if command in ("noise-sweep", "theta-sweep") or kind == "coverage":
            ks = [SWEEP_K[kind]]
        else:
            ks = DEFAULT_K[kind]
    theta = getattr(args, "theta", None)
    if theta is None:
        theta = {"graph": 0.15, "tabular": 0.05}.get(kind, 0.15)
    if not 0.0 <= theta < 1.0:
        raise CliError("--theta must lie in [0, 1)")
    return ExperimentConfig(
        dataset=str(args.dataset), kind=kind, algorithms=algos, ks=ks, theta=theta,
        B=getattr(args, "B", None), runs=getattr(args, "runs", 1),
        seed=getattr(args, "seed", 0), budget=getattr(args, "budget", None),
        undirected=args.undirected, sims_noisy=args.sims_noisy, sims_exact=args.sims_exact,
        sample_size=args.sample_size, fixed_sample=args.fixed_sample,
        normalize=not args.no_normalize, epsilon=args.epsilon,
        checkpoint_kn=getattr(args, "checkpoint_kn", None),
        robust_singleton=getattr(args, "robust_singleton", "fallback"),
        workers=getattr(args, "workers", 1), out=getattr(args, "out", None),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "experiment":
            return cmd_experiment(cfg)
        if args.command == "noise-sweep":
            return cmd_noise_sweep(cfg, args.levels)
        if args.command == "theta-sweep":
            return cmd_theta_sweep(cfg, args.thetas)
        subset = [int(t) for t in args.subset.split(",") if t.strip()]
        print(repr(cmd_eval(cfg, subset)))
        return 0
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
