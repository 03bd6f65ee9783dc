"""Bipartite alignment of generated features against gold features.

Generated features sit on one side of the graph and gold features on the
other; an edge exists when their sentence embeddings reach a cosine
threshold. Three matchings are scored:

``one2one`` (#)
    maximum-cardinality matching, each node used at most once.
``many2one`` (*)
    every gold node with a neighbour goes to its most similar generated
    feature, so one generated feature may absorb several golds.
``weighted`` (+)
    the many-to-one pairing, with each edge into a generated feature that
    absorbed ``k`` golds weighted ``1/k``.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .embed import cosine

__all__ = [
    "DEFAULT_THRESHOLD",
    "SWEEP_THRESHOLDS",
    "Scheme",
    "Edge",
    "SimilarityGraph",
    "Pair",
    "MatchResult",
    "SchemeScores",
    "graph_from_matrix",
    "similarity_matrix",
    "build_similarity_graph",
    "match_one_to_one",
    "match_many_to_one",
    "weight_many_to_one",
    "match",
    "scheme_scores",
]

DEFAULT_THRESHOLD = 0.3
SWEEP_THRESHOLDS = (0.3, 0.4, 0.5)


class Scheme(str, Enum):
    ONE_TO_ONE = "one2one"
    MANY_TO_ONE = "many2one"
    WEIGHTED = "weighted"

    @property
    def symbol(self) -> str:
        return {"one2one": "#", "many2one": "*", "weighted": "+"}[self.value]


@dataclass(frozen=True)
class Edge:
    gen: int
    gold: int
    similarity: float


@dataclass(frozen=True)
class SimilarityGraph:
    n_gen: int
    n_gold: int
    edges: tuple[Edge, ...]
    threshold: float

    def __post_init__(self) -> None:
        seen = set()
        for e in self.edges:
            if not (0 <= e.gen < self.n_gen and 0 <= e.gold < self.n_gold):
                raise ValueError(f"edge {e} out of range")
            if e.similarity < self.threshold:
                raise ValueError(f"edge {e} below threshold {self.threshold}")
            if (e.gen, e.gold) in seen:
                raise ValueError(f"duplicate edge ({e.gen}, {e.gold})")
            seen.add((e.gen, e.gold))

    def gen_adjacency(self) -> list[list[Edge]]:
        """Edges per generated node, ordered by similarity desc then gold index."""
        adj: list[list[Edge]] = [[] for _ in range(self.n_gen)]
        for e in self.edges:
            adj[e.gen].append(e)
        for row in adj:
            row.sort(key=lambda e: (-e.similarity, e.gold))
        return adj


@dataclass(frozen=True)
class Pair:
    gen: int
    gold: int
    weight: Fraction = Fraction(1)


@dataclass(frozen=True)
class MatchResult:
    scheme: Scheme
    pairs: tuple[Pair, ...]
    threshold: float | None = None

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def credit(self) -> Fraction:
        return sum((p.weight for p in self.pairs), Fraction(0))

    def gen_weight_sums(self) -> dict[int, Fraction]:
        sums: dict[int, Fraction] = {}
        for p in self.pairs:
            sums[p.gen] = sums.get(p.gen, Fraction(0)) + p.weight
        return sums


@dataclass(frozen=True)
class SchemeScores:
    scheme: Scheme
    precision: float
    recall: float
    f1: float
    threshold: float | None = None

    def to_json(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


def _check_threshold(threshold: float) -> None:
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")


def graph_from_matrix(sim, threshold: float = DEFAULT_THRESHOLD) -> SimilarityGraph:
    """Threshold an ``n_gen x n_gold`` similarity matrix into a graph."""
    _check_threshold(threshold)
    sim = np.asarray(sim, dtype=float)
    if sim.ndim != 2:
        raise ValueError("similarity matrix must be 2-D")
    n_gen, n_gold = sim.shape
    edges = tuple(
        Edge(int(i), int(j), float(sim[i, j]))
        for i in range(n_gen)
        for j in range(n_gold)
        if sim[i, j] >= threshold
    )
    return SimilarityGraph(n_gen, n_gold, edges, threshold)


_BELOW_ONE = float(np.nextafter(1.0, 0.0))


def similarity_matrix(gen: Sequence[str], gold: Sequence[str], embedder) -> np.ndarray:
    sim = np.zeros((len(gen), len(gold)))
    if not len(gen) or not len(gold):
        return sim
    vectors = embedder.embed_sentences(list(gen) + list(gold))
    gen_vecs, gold_vecs = vectors[: len(gen)], vectors[len(gen) :]
    for i, u in enumerate(gen_vecs):
        for j, v in enumerate(gold_vecs):
            # 1.0 is reserved for identical text (even when it embeds to zero), so
            # distinct strings with equal vectors never tie with an exact copy
            sim[i, j] = 1.0 if gen[i] == gold[j] else min(cosine(u, v), _BELOW_ONE)
    return sim


def build_similarity_graph(
    gen: Sequence[str], gold: Sequence[str], embedder, threshold: float = DEFAULT_THRESHOLD
) -> SimilarityGraph:
    _check_threshold(threshold)
    return graph_from_matrix(similarity_matrix(gen, gold, embedder), threshold)


def match_one_to_one(graph: SimilarityGraph) -> MatchResult:
    """Maximum-cardinality matching by augmenting paths.

    Generated nodes are processed in index order and each tries its
    neighbours best-similarity first, so ties resolve the same way every run.
    """
    adj = graph.gen_adjacency()
    gold_owner: dict[int, int] = {}

    def augment(gen: int, visited: set[int]) -> bool:
        for e in adj[gen]:
            if e.gold in visited:
                continue
            visited.add(e.gold)
            if e.gold not in gold_owner or augment(gold_owner[e.gold], visited):
                gold_owner[e.gold] = gen
                return True
        return False

    for gen in range(graph.n_gen):
        if adj[gen]:
            augment(gen, set())
    pairs = tuple(sorted((Pair(g, j) for j, g in gold_owner.items()), key=lambda p: (p.gen, p.gold)))
    return MatchResult(Scheme.ONE_TO_ONE, pairs, graph.threshold)


def match_many_to_one(graph: SimilarityGraph) -> MatchResult:
    """Send each gold node to its most similar generated neighbour (lowest index on ties)."""
    best: dict[int, Edge] = {}
    for e in graph.edges:
        cur = best.get(e.gold)
        if cur is None or e.similarity > cur.similarity or (
            e.similarity == cur.similarity and e.gen < cur.gen
        ):
            best[e.gold] = e
    pairs = tuple(sorted((Pair(e.gen, e.gold) for e in best.values()), key=lambda p: (p.gen, p.gold)))
    return MatchResult(Scheme.MANY_TO_ONE, pairs, graph.threshold)


def weight_many_to_one(result: MatchResult) -> MatchResult:
    if result.scheme is not Scheme.MANY_TO_ONE:
        raise ValueError(f"expected a many2one match, got {result.scheme.value}")
    k = Counter(p.gen for p in result.pairs)
    pairs = tuple(Pair(p.gen, p.gold, Fraction(1, k[p.gen])) for p in result.pairs)
    return MatchResult(Scheme.WEIGHTED, pairs, result.threshold)


def match(graph: SimilarityGraph, scheme: Scheme | str) -> MatchResult:
    scheme = Scheme(scheme)
    if scheme is Scheme.ONE_TO_ONE:
        return match_one_to_one(graph)
    many = match_many_to_one(graph)
    return many if scheme is Scheme.MANY_TO_ONE else weight_many_to_one(many)


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def scheme_scores(result: MatchResult, n_gen: int, n_gold: int) -> SchemeScores:
    """Precision, recall and F1 from matched-edge credit.

    Precision divides the summed pair weights by ``n_gen`` (clamped at 1 for
    many2one, where edge count can exceed the number of generated nodes).
    Recall counts matched gold nodes, which is why weighted and many2one
    recall coincide: every gold node sits on exactly one edge either way.
    """
    if n_gen < 0 or n_gold < 0:
        raise ValueError("counts must be non-negative")
    credit = result.credit
    p = min(1.0, float(credit / n_gen)) if n_gen else 0.0
    r = len(result.pairs) / n_gold if n_gold else 0.0
    return SchemeScores(result.scheme, p, r, _f1(p, r), result.threshold)
