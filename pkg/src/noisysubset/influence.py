"""Influence spread under the Independent Cascade model.

Graphs are stored as compressed out-adjacency (CSR). Edge probabilities
follow the weighted-cascade rule ``p(u, v) = weight(u, v) / indegree(v)``
where the in-degree is weighted (it equals the plain in-edge count for
unit weights).
"""

from __future__ import annotations

import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import ItemSet
from .objectives import Objective

#: Seed of the dedicated stream used for exact (reporting) estimates.
DEFAULT_EXACT_SEED = 20240917
_EXACT_CHUNKS = 16


class ParseError(ValueError):
    pass


@dataclass
class Graph:
    """Directed graph with per-edge activation probabilities.

    ``targets[indptr[u]:indptr[u+1]]`` are the out-neighbours of ``u`` in
    ascending order and ``probs`` holds the matching probabilities.
    ``node_ids`` maps dense ids back to the ids of the input file.
    """

    indptr: np.ndarray
    targets: np.ndarray
    probs: np.ndarray
    node_ids: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def edge_count(self) -> int:
        return len(self.targets)

    def out_edges(self, u: int):
        lo, hi = self.indptr[u], self.indptr[u + 1]
        return self.targets[lo:hi], self.probs[lo:hi]

    def prob(self, u: int, v: int) -> float:
        tg, pr = self.out_edges(u)
        pos = np.searchsorted(tg, v)
        if pos < len(tg) and tg[pos] == v:
            return float(pr[pos])
        return 0.0

    @classmethod
    def from_edges(cls, n: int, src, dst, weights=None, node_ids=None) -> "Graph":
        """Build a graph from dense-id edge arrays.

        Self-loops are dropped and parallel edges merged by summing weights
        before probabilities are computed.
        """
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        w = np.ones(len(src)) if weights is None else np.asarray(weights, dtype=float)
        keep = src != dst
        src, dst, w = src[keep], dst[keep], w[keep]
        if len(src):
            key = src * n + dst
            uniq, inverse = np.unique(key, return_inverse=True)
            merged = np.zeros(len(uniq))
            np.add.at(merged, inverse, w)
            src, dst, w = uniq // n, uniq % n, merged
        indeg = np.zeros(n)
        np.add.at(indeg, dst, w)
        probs = np.divide(w, indeg[dst], out=np.zeros_like(w), where=indeg[dst] > 0)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        # unique() sorted by (src, dst), which is already CSR order
        return cls(indptr, dst.astype(np.int64), probs, node_ids)

    @classmethod
    def from_probabilities(cls, n: int, edges) -> "Graph":
        """Graph with explicit probabilities, ``edges`` = iterable of (u, v, p)."""
        edges = sorted((int(u), int(v), float(p)) for u, v, p in edges)
        indptr = np.zeros(n + 1, dtype=np.int64)
        for u, _, _ in edges:
            indptr[u + 1] += 1
        np.cumsum(indptr, out=indptr)
        targets = np.array([v for _, v, _ in edges], dtype=np.int64)
        probs = np.array([p for _, _, p in edges], dtype=float)
        return cls(indptr, targets, probs)


def load_edge_list(source, undirected: bool = False) -> Graph:
    """Read a SNAP-style edge list (``u v`` or ``u v w`` per line).

    Lines starting with ``#`` and blank lines are skipped. Node ids may be
    any nonnegative integers; they are remapped to ``[0, n)`` in ascending
    order of the original id.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return load_edge_list(fh, undirected)
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    us, vs, ws = [], [], []
    for lineno, raw in enumerate(source, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"line {lineno}: expected 'u v [w]', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
        if u < 0 or v < 0 or w < 0:
            raise ParseError(f"line {lineno}: ids and weights must be nonnegative")
        us.append(u)
        vs.append(v)
        ws.append(w)
    if not us:
        raise ParseError("edge list contains no edges")
    u_arr, v_arr, w_arr = np.array(us), np.array(vs), np.array(ws)
    ids, inverse = np.unique(np.concatenate([u_arr, v_arr]), return_inverse=True)
    src, dst = inverse[: len(us)], inverse[len(us):]
    if undirected:
        src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
        w_arr = np.concatenate([w_arr, w_arr])
    return Graph.from_edges(len(ids), src, dst, w_arr, node_ids=ids)


def simulate_ic_once(g: Graph, seeds: ItemSet, rng: np.random.Generator,
                     attempts: np.ndarray | None = None) -> int:
    """Run one cascade and return the number of activated nodes (seeds included).

    The frontier is processed level by level; within a level, activation
    attempts draw random numbers in ascending ``(u, v)`` order. If
    ``attempts`` is given (an int array with one slot per edge), it is
    incremented for every attempted edge.
    """
    active = np.array(seeds.bits, dtype=bool, copy=True)
    frontier = np.flatnonzero(active)
    indptr, targets, probs = g.indptr, g.targets, g.probs
    while frontier.size:
        starts = indptr[frontier]
        lens = indptr[frontier + 1] - starts
        total = int(lens.sum())
        if total == 0:
            break
        offsets = np.repeat(starts - np.cumsum(lens) + lens, lens)
        edge_idx = offsets + np.arange(total)
        if attempts is not None:
            np.add.at(attempts, edge_idx, 1)
        hit = targets[edge_idx[rng.random(total) < probs[edge_idx]]]
        hit = hit[~active[hit]]
        if hit.size == 0:
            break
        frontier = np.unique(hit)
        active[frontier] = True
    return int(np.count_nonzero(active))


@dataclass
class SpreadEstimate:
    mean: float
    simulations: int
    std: float


def estimate_spread(g: Graph, seeds: ItemSet, m: int, rng: np.random.Generator) -> SpreadEstimate:
    counts = np.array([simulate_ic_once(g, seeds, rng) for _ in range(m)], dtype=float)
    return SpreadEstimate(float(counts.mean()), m, float(counts.std()))


class InfluenceObjective(Objective):
    """Expected spread; noisy = mean of ``m_noisy`` cascades, exact = ``m_exact``.

    One noisy call is one budget unit whatever ``m_noisy`` is. The exact
    channel always uses streams derived from ``exact_seed`` split into a
    fixed number of chunks, so its value does not depend on the run or on
    ``workers``.
    """

    def __init__(self, graph: Graph, m_noisy: int = 10, m_exact: int = 10_000,
                 exact_seed: int = DEFAULT_EXACT_SEED, workers: int = 1):
        if m_noisy < 1:
            raise ValueError("m_noisy must be >= 1")
        if m_exact < m_noisy:
            raise ValueError("m_exact must be >= m_noisy")
        self.graph = graph
        self.ground_size = graph.n
        self.m_noisy = m_noisy
        self.m_exact = m_exact
        self.exact_seed = exact_seed
        self.workers = workers

    def _noisy(self, s, rng):
        g = self.graph
        return sum(simulate_ic_once(g, s, rng) for _ in range(self.m_noisy)) / self.m_noisy

    def _exact(self, s):
        chunks = min(_EXACT_CHUNKS, self.m_exact)
        sizes = [len(c) for c in np.array_split(np.arange(self.m_exact), chunks)]
        streams = np.random.SeedSequence(self.exact_seed).spawn(chunks)

        def run(i):
            rng = np.random.default_rng(streams[i])
            return sum(simulate_ic_once(self.graph, s, rng) for _ in range(sizes[i]))

        if self.workers > 1:
            with ThreadPoolExecutor(self.workers) as pool:
                totals = list(pool.map(run, range(chunks)))
        else:
            totals = [run(i) for i in range(chunks)]
        return sum(totals) / self.m_exact


def make_influence_objective(graph: Graph, m_noisy: int = 10, m_exact: int = 10_000,
                             **kwargs) -> InfluenceObjective:
    return InfluenceObjective(graph, m_noisy, m_exact, **kwargs)
