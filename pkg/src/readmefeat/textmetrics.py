"""Lexical (ROUGE-1/2/L) and greedy token-embedding scores for matched pairs."""

from __future__ import annotations

import re
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Score",
    "PairScore",
    "tokenize",
    "rouge_n",
    "rouge_l",
    "lcs_length",
    "semantic_score",
    "score_pair",
    "aggregate_pair_metrics",
    "NO_MATCHED_PAIRS",
]

NO_MATCHED_PAIRS = "no matched pairs"

_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on every maximal run of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass(frozen=True)
class Score:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> Score:
        return cls(precision, recall, _f1(precision, recall))

    def to_json(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


ZERO = Score(0.0, 0.0, 0.0)
ONE = Score(1.0, 1.0, 1.0)


@dataclass(frozen=True)
class PairScore:
    rouge1: Score
    rouge2: Score
    rougeL: Score
    semantic: Score

    def to_json(self) -> dict:
        return {
            "rouge1": self.rouge1.to_json(),
            "rouge2": self.rouge2.to_json(),
            "rougeL": self.rougeL.to_json(),
            "semantic": self.semantic.to_json(),
        }


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: str, reference: str, n: int = 1) -> Score:
    if n not in (1, 2):
        raise ValueError(f"rouge_n supports n in {{1, 2}}, got {n}")
    cand_toks, ref_toks = tokenize(candidate), tokenize(reference)
    cand = _ngrams(cand_toks, n)
    ref = _ngrams(ref_toks, n)
    if not cand and not ref:
        # too short for any n-gram on either side: only exact agreement counts
        return ONE if cand_toks == ref_toks else ZERO
    overlap = sum((cand & ref).values())
    n_cand = sum(cand.values())
    n_ref = sum(ref.values())
    p = overlap / n_cand if n_cand else 0.0
    r = overlap / n_ref if n_ref else 0.0
    return Score.from_pr(p, r)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> Score:
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand and not ref:
        return ONE
    lcs = lcs_length(cand, ref)
    p = lcs / len(cand) if cand else 0.0
    r = lcs / len(ref) if ref else 0.0
    return Score.from_pr(p, r)


def _unit_rows(vectors: Sequence[np.ndarray]) -> np.ndarray:
    mat = np.asarray(vectors, dtype=float)
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    return np.divide(mat, norms, out=np.zeros_like(mat), where=norms > 0)


def semantic_score(candidate: str, reference: str, embedder) -> Score:
    """Greedy token-alignment score in the style of BERTScore.

    Each reference token is credited with its best cosine against any
    candidate token (recall) and vice versa (precision). No idf weighting,
    no baseline rescaling. Negative similarities count as 0. Two texts
    without any tokens agree perfectly.
    """
    cand = embedder.embed_tokens(candidate)
    ref = embedder.embed_tokens(reference)
    if not cand and not ref:
        return ONE
    if not cand or not ref:
        return ZERO
    c = _unit_rows([v for _, v in cand])
    r = _unit_rows([v for _, v in ref])
    sim = np.clip(c @ r.T, 0.0, 1.0)
    # identical token vectors are exact matches, whatever the rounding in the product
    for i, (tok_c, vec_c) in enumerate(cand):
        for j, (tok_r, vec_r) in enumerate(ref):
            if tok_c == tok_r and np.array_equal(vec_c, vec_r):
                sim[i, j] = 1.0
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    return Score.from_pr(precision, recall)


def score_pair(candidate: str, reference: str, embedder) -> PairScore:
    return PairScore(
        rouge1=rouge_n(candidate, reference, 1),
        rouge2=rouge_n(candidate, reference, 2),
        rougeL=rouge_l(candidate, reference),
        semantic=semantic_score(candidate, reference, embedder),
    )


def _mean_score(scores: Sequence[Score]) -> Score:
    n = len(scores)
    return Score(
        sum(s.precision for s in scores) / n,
        sum(s.recall for s in scores) / n,
        sum(s.f1 for s in scores) / n,
    )


def aggregate_pair_metrics(pair_scores: Iterable[PairScore]) -> PairScore | None:
    """Unweighted mean of every component; ``None`` when there are no pairs."""
    scores = list(pair_scores)
    if not scores:
        return None
    return PairScore(
        rouge1=_mean_score([s.rouge1 for s in scores]),
        rouge2=_mean_score([s.rouge2 for s in scores]),
        rougeL=_mean_score([s.rougeL for s in scores]),
        semantic=_mean_score([s.semantic for s in scores]),
    )
