import io
import itertools

import numpy as np
import pytest

from noisysubset.core import ItemSet
from noisysubset.influence import (
    Graph,
    ParseError,
    estimate_spread,
    load_edge_list,
    make_influence_objective,
    simulate_ic_once,
)


def enumerate_spread(n, edges, seeds):
    """Exact E|IC(S)| by summing over all live/blocked outcomes of every edge."""
    total = 0.0
    for outcome in itertools.product((0, 1), repeat=len(edges)):
        prob = 1.0
        adj = {u: [] for u in range(n)}
        for live, (u, v, p) in zip(outcome, edges):
            prob *= p if live else 1.0 - p
            if live:
                adj[u].append(v)
        if prob == 0.0:
            continue
        reached = set(seeds)
        stack = list(seeds)
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in reached:
                    reached.add(v)
                    stack.append(v)
        total += prob * len(reached)
    return total


def random_small_graph(rng, n=8, m=11):
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    chosen = rng.choice(len(pairs), m, replace=False)
    return [(pairs[i][0], pairs[i][1], float(rng.uniform(0.1, 0.9))) for i in chosen]


class TestLoad:
    def test_directed_path(self):
        g = load_edge_list(io.BytesIO(b"0 1\n1 2\n"))
        assert g.n == 3 and g.edge_count == 2
        assert g.prob(0, 1) == 1.0 and g.prob(1, 2) == 1.0
        assert g.prob(1, 0) == 0.0

    def test_weight_over_indegree(self):
        g = load_edge_list(io.BytesIO(b"# comment\n0 2\n1 2\n"))
        assert g.prob(0, 2) == 0.5 and g.prob(1, 2) == 0.5

    def test_weighted_and_duplicates(self):
        g = load_edge_list(io.BytesIO(b"0 2 3\n1 2 1\n0 2 1\n"))
        assert g.prob(0, 2) == pytest.approx(4 / 5)
        assert g.prob(1, 2) == pytest.approx(1 / 5)

    def test_undirected_and_remap(self):
        g = load_edge_list(io.BytesIO(b"10 20\n20 35\n7 7\n"), undirected=True)
        assert g.n == 4
        assert list(g.node_ids) == [7, 10, 20, 35]
        assert g.edge_count == 4  # self-loop dropped
        assert g.prob(1, 2) == 0.5 and g.prob(2, 1) == 1.0

    def test_errors(self):
        with pytest.raises(ParseError, match="line 2"):
            load_edge_list(io.BytesIO(b"0 1\n0 x\n"))
        with pytest.raises(ParseError, match="line 1"):
            load_edge_list(io.BytesIO(b"0 1 2 3\n"))
        with pytest.raises(ParseError, match="no edges"):
            load_edge_list(io.BytesIO(b"# empty\n"))

    def test_probabilities_in_unit_interval(self):
        rng = np.random.default_rng(0)
        src, dst = rng.integers(0, 30, 200), rng.integers(0, 30, 200)
        g = Graph.from_edges(30, src, dst, rng.uniform(0, 5, 200))
        assert np.all((g.probs >= 0) & (g.probs <= 1 + 1e-12))
        indeg = np.zeros(30)
        np.add.at(indeg, g.targets, g.probs)
        assert np.all((indeg == 0) | np.isclose(indeg, 1.0))


class TestCascade:
    def test_empty_seeds(self, rng):
        g = Graph.from_probabilities(3, [(0, 1, 1.0)])
        assert simulate_ic_once(g, ItemSet(3), rng) == 0

    def test_deterministic_path(self, rng):
        g = Graph.from_probabilities(3, [(0, 1, 1.0), (1, 2, 1.0)])
        assert all(simulate_ic_once(g, ItemSet.from_indices(3, [0]), rng) == 3 for _ in range(100))

    def test_bounds_and_single_attempt(self):
        rng = np.random.default_rng(2)
        src, dst = rng.integers(0, 40, 300), rng.integers(0, 40, 300)
        g = Graph.from_edges(40, src, dst)
        for _ in range(200):
            seeds = ItemSet(40, rng.random(40) < 0.1)
            attempts = np.zeros(g.edge_count, dtype=int)
            count = simulate_ic_once(g, seeds, rng, attempts)
            assert len(seeds) <= count <= 40
            assert attempts.max(initial=0) <= 1

    def test_seeded_determinism(self):
        g = Graph.from_edges(20, *np.random.default_rng(1).integers(0, 20, (2, 60)))
        s = ItemSet.from_indices(20, [0, 5])
        a = [simulate_ic_once(g, s, np.random.default_rng(4)) for _ in range(3)]
        r1, r2 = np.random.default_rng(8), np.random.default_rng(8)
        assert [simulate_ic_once(g, s, r1) for _ in range(50)] == [simulate_ic_once(g, s, r2) for _ in range(50)]
        assert len(set(a)) == 1

    def test_enumeration_oracle_small(self):
        edges = [(0, 1, 0.5), (1, 2, 0.5), (0, 2, 0.25)]
        # P(1 active) = .5; P(2 active) = 1 - (1 - .25)(1 - .5 * .5) = .4375
        assert enumerate_spread(3, edges, [0]) == pytest.approx(1 + 0.5 + 0.4375)

    def test_monotone_enumerated(self):
        rng = np.random.default_rng(3)
        edges = random_small_graph(rng, 6, 9)
        values = {c: enumerate_spread(6, edges, c)
                  for r in range(4) for c in itertools.combinations(range(6), r)}
        for a, fa in values.items():
            for b, fb in values.items():
                if set(a) <= set(b):
                    assert fa <= fb + 1e-12


class TestObjective:
    def test_deterministic_cascades(self, rng):
        g = Graph.from_probabilities(4, [(0, 1, 1.0), (1, 2, 1.0), (3, 0, 1.0)])
        obj = make_influence_objective(g, 10, 100)
        s = ItemSet.from_indices(4, [0])
        assert obj.noisy_eval(s, rng) == 3 == obj.exact_eval(s)

    def test_exact_reproducible_and_thread_independent(self):
        g = Graph.from_probabilities(2, [(0, 1, 0.5)])
        s = ItemSet.from_indices(2, [0])
        a = make_influence_objective(g, 5, 2000).exact_eval(s)
        b = make_influence_objective(g, 5, 2000, workers=4).exact_eval(s)
        assert a == b == make_influence_objective(g, 5, 2000).exact_eval(s)

    def test_validation(self):
        g = Graph.from_probabilities(2, [(0, 1, 0.5)])
        with pytest.raises(ValueError):
            make_influence_objective(g, 0, 10)
        with pytest.raises(ValueError):
            make_influence_objective(g, 20, 10)

    def test_estimate_spread(self, rng):
        g = Graph.from_probabilities(2, [(0, 1, 0.5)])
        est = estimate_spread(g, ItemSet.from_indices(2, [0]), 4000, rng)
        assert est.simulations == 4000
        assert 1.0 <= est.mean <= 2.0
        assert est.std == pytest.approx(0.5, abs=0.02)

    def test_fewer_simulations_means_more_noise(self):
        rng = np.random.default_rng(6)
        g = Graph.from_edges(30, *np.random.default_rng(2).integers(0, 30, (2, 120)))
        s = ItemSet.from_indices(30, [0, 1, 2])
        spread = {}
        for m in (5, 20):
            obj = make_influence_objective(g, m, 1000)
            spread[m] = np.std([obj.noisy_eval(s, rng) for _ in range(400)])
        assert spread[20] < spread[5]
