import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from readmefeat.textmetrics import (
    PairScore,
    Score,
    aggregate_pair_metrics,
    lcs_length,
    rouge_l,
    rouge_n,
    score_pair,
    semantic_score,
    tokenize,
)


class TableEmbedder:
    """Token embedder backed by a fixed token -> vector table."""

    def __init__(self, table):
        self.table = {k: np.asarray(v, dtype=float) for k, v in table.items()}

    def embed_tokens(self, text):
        return [(t, self.table[t]) for t in text.split()]


def test_tokenize():
    assert tokenize("The cat-sat.") == ["the", "cat", "sat"]
    assert tokenize("") == []
    assert tokenize("a  b") == ["a", "b"]
    assert tokenize("snake_case v2.0") == ["snake", "case", "v2", "0"]


def test_rouge_n_examples():
    assert rouge_n("a b c", "a b c", 1) == Score(1.0, 1.0, 1.0)
    assert rouge_n("a b", "c d", 2) == Score(0.0, 0.0, 0.0)
    s = rouge_n("the cat sat", "the cat slept", 1)
    assert (s.precision, s.recall) == (2 / 3, 2 / 3)
    assert s.f1 == pytest.approx(2 / 3, abs=1e-12)


def test_rouge_n_clipped_counts():
    s = rouge_n("the the the", "the cat", 1)
    assert s.precision == 1 / 3 and s.recall == 1 / 2


def test_rouge_2():
    s = rouge_n("the cat sat down", "the cat sat up", 2)
    assert s.precision == s.recall == 2 / 3
    with pytest.raises(ValueError):
        rouge_n("a", "a", 3)


def test_rouge_l_examples():
    s = rouge_l("a b c d", "a c b d")
    assert s.precision == 0.75 and s.recall == 0.75
    assert rouge_l("x y", "x y").f1 == 1.0
    assert rouge_l("", "x y") == Score(0.0, 0.0, 0.0)


def _lcs_brute(a, b):
    best = 0
    for r in range(len(a) + 1):
        for idx in itertools.combinations(range(len(a)), r):
            sub = [a[i] for i in idx]
            it = iter(b)
            if all(any(x == y for y in it) for x in sub):
                best = max(best, r)
    return best


words = st.lists(st.sampled_from(["a", "b", "c", "d"]), max_size=7)


@settings(max_examples=200, deadline=None)
@given(words, words)
def test_lcs_matches_brute_force(a, b):
    assert lcs_length(a, b) == _lcs_brute(a, b)
    assert lcs_length(a, b) <= min(len(a), len(b))


sentences = words.map(" ".join)


@settings(max_examples=200, deadline=None)
@given(sentences, sentences)
def test_rouge_symmetry_and_range(x, y):
    for fn in (lambda c, r: rouge_n(c, r, 1), lambda c, r: rouge_n(c, r, 2), rouge_l):
        a, b = fn(x, y), fn(y, x)
        assert a.precision == b.recall and a.recall == b.precision
        assert a.f1 == pytest.approx(b.f1, abs=1e-15)
        assert 0.0 <= a.f1 <= 1.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(["a", "b", "c", "d"]), min_size=1, max_size=7).map(" ".join))
def test_self_scores_are_one(x):
    assert rouge_n(x, x, 1).f1 == 1.0
    assert rouge_n(x, x, 2).f1 == 1.0
    assert rouge_l(x, x).f1 == 1.0


def test_degenerate_inputs():
    # no bigram on either side: identical tokens agree, different ones do not
    assert rouge_n("deploy", "Deploy!", 2) == Score(1.0, 1.0, 1.0)
    assert rouge_n("deploy", "build", 2) == Score(0.0, 0.0, 0.0)
    assert rouge_n("deploy", "deploy now", 2) == Score(0.0, 0.0, 0.0)
    for fn in (lambda c, r: rouge_n(c, r, 1), rouge_l):
        assert fn("...", "---") == Score(1.0, 1.0, 1.0)
        assert fn("...", "x") == Score(0.0, 0.0, 0.0)


# -- semantic -------------------------------------------------------------------


def test_semantic_identical_is_one(embedder):
    assert semantic_score("buy or sell shares", "buy or sell shares", embedder) == Score(1.0, 1.0, 1.0)


def test_semantic_orthogonal_is_zero():
    emb = TableEmbedder({"u": [1, 0], "w": [0, 1]})
    assert semantic_score("u", "w", emb) == Score(0.0, 0.0, 0.0)


def test_semantic_hand_example():
    emb = TableEmbedder({"u": [1.0, 0.0], "w": [0.5, np.sqrt(3) / 2]})
    s = semantic_score("u", "u w", emb)
    assert s.precision == pytest.approx(1.0, abs=1e-12)
    assert s.recall == pytest.approx(0.75, abs=1e-12)
    assert s.f1 == pytest.approx(0.857, abs=1e-3)


def test_semantic_empty_side(embedder):
    assert semantic_score("", "a", embedder) == Score(0.0, 0.0, 0.0)
    assert semantic_score("...", "a", embedder) == Score(0.0, 0.0, 0.0)
    assert semantic_score("", "...", embedder) == Score(1.0, 1.0, 1.0)


def test_semantic_identical_tokens_with_zero_vector():
    emb = TableEmbedder({"z": [0.0, 0.0], "u": [1.0, 0.0]})
    assert semantic_score("z", "z", emb) == Score(1.0, 1.0, 1.0)
    assert semantic_score("z", "u", emb) == Score(0.0, 0.0, 0.0)


def _greedy_oracle(cand, ref):
    """Recompute per-token maxima with an explicit double loop."""
    def cos(a, b):
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        return 0.0 if na == 0 or nb == 0 else max(0.0, min(1.0, float(a @ b / (na * nb))))

    r = np.mean([max(cos(c, x) for c in cand) for x in ref])
    p = np.mean([max(cos(c, x) for x in ref) for c in cand])
    return p, r


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(["p", "q", "r", "s"]), min_size=1, max_size=5),
       st.lists(st.sampled_from(["p", "q", "r", "s"]), min_size=1, max_size=5))
def test_semantic_matches_double_loop(cand, ref):
    rng = np.random.default_rng(0)
    emb = TableEmbedder({k: rng.normal(size=4) for k in "pqrs"})
    s = semantic_score(" ".join(cand), " ".join(ref), emb)
    p, r = _greedy_oracle([emb.table[t] for t in cand], [emb.table[t] for t in ref])
    assert s.precision == pytest.approx(p, abs=1e-12)
    assert s.recall == pytest.approx(r, abs=1e-12)


# -- aggregation ------------------------------------------------------------------


def _ps(f1):
    s = Score(f1, f1, f1)
    return PairScore(s, s, s, s)


def test_aggregate():
    assert aggregate_pair_metrics([_ps(1.0), _ps(0.5)]).rouge1.f1 == 0.75
    assert aggregate_pair_metrics([_ps(0.4)]) == _ps(0.4)
    assert aggregate_pair_metrics([]) is None


def test_score_pair(embedder):
    ps = score_pair("export csv reports", "export csv reports", embedder)
    assert ps == _ps(1.0)
