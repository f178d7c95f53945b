"""Influence maximization under the Independent Cascade model.

Builds a random directed graph, turns edge weights into propagation
probabilities (weight over weighted in-degree) and compares optimizers that
only see 10-simulation estimates.
"""

import io

import numpy as np

from noisysubset.algorithms import AlgoConfig, run_algorithm
from noisysubset.core import ItemSet
from noisysubset.influence import estimate_spread, load_edge_list, make_influence_objective

rng = np.random.default_rng(3)
n_nodes, n_edges = 120, 600
# hubs get more out-edges
src = rng.choice(n_nodes, n_edges, p=np.arange(n_nodes, 0, -1) / (n_nodes * (n_nodes + 1) / 2))
dst = rng.integers(0, n_nodes, n_edges)
text = "".join(f"{u} {v}\n" for u, v in zip(src, dst))
graph = load_edge_list(io.StringIO(text))
print(f"graph: {graph.n} nodes, {graph.edge_count} edges after dropping self-loops and merging duplicates")

# one estimate vs many
seeds = ItemSet.from_indices(graph.n, [0, 1, 2])
for m in (10, 1000):
    est = estimate_spread(graph, seeds, m, rng)
    print(f"spread of {{0,1,2}} from {m:>4} cascades: {est.mean:.2f} (per-cascade std {est.std:.2f})")

obj = make_influence_objective(graph, m_noisy=10, m_exact=2000)
k = 4
cfg = AlgoConfig(k, theta=0.15)
# budget cut to k*n*4 to keep the demo short
budget = 4 * k * graph.n
for name in ("greedy", "poss", "pore"):
    vals = [run_algorithm(name, obj, cfg, s, budget=None if name == "greedy" else budget).exact_value
            for s in range(3)]
    print(f"{name:>6}: exact spreads {np.round(vals, 2)}")
