"""Random similarity graphs and exhaustive reference matchers for tests."""

from functools import lru_cache

import numpy as np

from readmefeat.align import SimilarityGraph, graph_from_matrix


def brute_force_max_matching(graph: SimilarityGraph) -> int:
    """Largest matching found by trying every choice for every generated node."""
    nbrs = [frozenset(e.gold for e in graph.edges if e.gen == i) for i in range(graph.n_gen)]

    @lru_cache(maxsize=None)
    def best(i: int, used: frozenset) -> int:
        if i == graph.n_gen:
            return 0
        top = best(i + 1, used)
        for j in nbrs[i] - used:
            top = max(top, 1 + best(i + 1, used | {j}))
        return top

    return best(0, frozenset())


def brute_force_best_gen(graph: SimilarityGraph) -> dict[int, int]:
    """For each gold node, the neighbour with top similarity (lowest index on ties)."""
    out = {}
    for j in range(graph.n_gold):
        cands = [(e.similarity, -e.gen) for e in graph.edges if e.gold == j]
        if cands:
            out[j] = -max(cands)[1]
    return out


def random_matrices(n: int, seed: int, max_side: int = 8):
    """Similarity matrices with at most ``max_side`` nodes per side.

    Half are continuous uniform draws; the rest are coarse (one decimal) so
    ties and values sitting exactly on a threshold are common.
    """
    rng = np.random.default_rng(seed)
    for k in range(n):
        shape = (int(rng.integers(0, max_side + 1)), int(rng.integers(0, max_side + 1)))
        sim = rng.random(shape)
        if k % 2:
            sim = np.round(sim, 1)
        yield sim


def random_edge_sets(n: int, seed: int, max_side: int = 8):
    """Graphs from random adjacency with random density, all similarities 1."""
    rng = np.random.default_rng(seed)
    for _ in range(n):
        shape = (int(rng.integers(0, max_side + 1)), int(rng.integers(0, max_side + 1)))
        adj = rng.random(shape) < rng.random()
        yield graph_from_matrix(adj.astype(float), 0.5)
