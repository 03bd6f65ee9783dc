"""Sentence and token embedders.

Two implementations share one duck-typed surface (``embed_sentence``,
``embed_sentences``, ``embed_tokens``):

* :class:`HashEmbedder` -- deterministic feature hashing of tokens and their
  character trigrams. Needs no model and gives byte-identical vectors on
  every platform, which keeps evaluation reports reproducible.
* :class:`HttpEmbedder` -- forwards to an external embedding service so a
  transformer model can be plugged in.
"""

from __future__ import annotations

import hashlib
import math
from collections import Counter
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import httpx
import numpy as np

from .textmetrics import tokenize

__all__ = [
    "EmbedError",
    "EmbedderSpec",
    "HashEmbedder",
    "HttpEmbedder",
    "make_embedder",
    "cosine",
]

DEFAULT_DIM = 512


class EmbedError(RuntimeError):
    """The embedding backend failed or returned an unusable payload."""


@dataclass(frozen=True)
class EmbedderSpec:
    kind: str = "builtin-hash"
    dim: int = DEFAULT_DIM
    endpoint: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("builtin-hash", "http-service"):
            raise ValueError(f"unknown embedder kind {self.kind!r}")
        if self.kind == "http-service" and not self.endpoint:
            raise ValueError("http-service embedder requires an endpoint")
        if self.kind == "builtin-hash" and self.dim <= 0:
            raise ValueError("dim must be positive")

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "dim": self.dim}
        if self.endpoint:
            out["endpoint"] = self.endpoint
        return out


def cosine(u, v) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    if np.array_equal(u, v):
        return 1.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


# Approximate occurrences per million words of general English and README
# prose. Frequent words are damped so content words dominate the vector.
_FREQ_PER_MILLION: dict[str, float] = {
    "the": 50000, "of": 28000, "and": 27000, "to": 25000, "a": 22000, "in": 17000,
    "is": 10000, "it": 9000, "you": 9000, "that": 8500, "for": 8000, "this": 6000,
    "with": 6000, "on": 6000, "as": 5500, "be": 5500, "are": 5000, "can": 4500,
    "by": 4500, "or": 4500, "from": 4000, "an": 3800, "at": 3500, "not": 3500,
    "your": 3500, "use": 3000, "will": 3000, "if": 3000, "all": 2800, "which": 2500,
    "has": 2500, "have": 2500, "its": 2200, "also": 2000, "more": 2000, "was": 2000,
    "we": 2000, "but": 2000, "i": 2000, "so": 1800, "one": 1800, "there": 1600,
    "their": 1500, "they": 1500, "them": 1200, "these": 1200, "other": 1200,
    "any": 1200, "into": 1200, "some": 1200, "using": 1200, "used": 1100, "how": 1100,
    "new": 1100, "my": 1000, "our": 1000, "only": 1000, "may": 1000, "what": 1000,
    "do": 1000, "up": 1000, "out": 1000, "about": 1000, "when": 1000, "than": 900,
    "then": 900, "who": 900, "each": 900, "should": 800, "would": 800, "such": 800,
    "via": 700, "e": 600, "g": 600, "etc": 500, "s": 800, "t": 500, "support": 600,
    "supports": 400, "allows": 400, "provides": 400, "users": 500, "user": 600,
    "features": 300, "feature": 300, "based": 500, "well": 600, "just": 700,
    "like": 800, "make": 600, "easy": 400, "simple": 400, "file": 500, "files": 400,
    "data": 600, "code": 400, "application": 300, "app": 300, "project": 400,
}
_N_REF = 1_000_000.0
_LOG_N_REF = math.log(_N_REF + 1.0)


def _damping(token: str) -> float:
    freq = _FREQ_PER_MILLION.get(token, 0.0)
    return math.log((_N_REF + 1.0) / (freq + 1.0)) / _LOG_N_REF


def _slot(key: str, dim: int) -> tuple[int, float]:
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    h = int.from_bytes(digest, "little")
    return (h >> 1) % dim, (1.0 if h & 1 else -1.0)


def _trigrams(token: str) -> list[str]:
    padded = f"<{token}>"
    return [padded[i : i + 3] for i in range(len(padded) - 2)]


@lru_cache(maxsize=65536)
def _token_features(token: str, dim: int) -> tuple[tuple[int, float], ...]:
    """Signed hash slots for a token: the whole word at weight 1, its trigrams sharing weight 1."""
    feats: dict[int, float] = {}
    idx, sign = _slot("w:" + token, dim)
    feats[idx] = feats.get(idx, 0.0) + sign
    grams = _trigrams(token)
    share = 1.0 / len(grams)
    for gram in grams:
        idx, sign = _slot("c:" + gram, dim)
        feats[idx] = feats.get(idx, 0.0) + sign * share
    return tuple(sorted(feats.items()))


def _frozen(vec: np.ndarray) -> np.ndarray:
    vec.setflags(write=False)
    return vec


def _normalize(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm > 0:
        vec /= norm
    return vec


class HashEmbedder:
    """Feature-hashing embedder over tokens and character trigrams."""

    def __init__(self, dim: int = DEFAULT_DIM) -> None:
        if dim <= 0:
            raise ValueError("dim must be positive")
        self._dim = dim
        self.spec = EmbedderSpec("builtin-hash", dim)

    @property
    def dim(self) -> int:
        return self._dim

    def _token_vector(self, token: str, weight: float = 1.0) -> np.ndarray:
        vec = np.zeros(self._dim)
        for idx, value in _token_features(token, self._dim):
            vec[idx] += weight * value
        return vec

    def embed_sentence(self, text: str) -> np.ndarray:
        vec = np.zeros(self._dim)
        counts = Counter(tokenize(text))
        # first-occurrence order fixes the float summation order
        for token, count in counts.items():
            weight = (1.0 + math.log(count)) * _damping(token)
            for idx, value in _token_features(token, self._dim):
                vec[idx] += weight * value
        return _frozen(_normalize(vec))

    def embed_sentences(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self.embed_sentence(t) for t in texts]

    def embed_tokens(self, text: str) -> list[tuple[str, np.ndarray]]:
        return [(tok, _frozen(_normalize(self._token_vector(tok)))) for tok in tokenize(text)]

    def __repr__(self) -> str:
        return f"HashEmbedder(dim={self._dim})"


class HttpEmbedder:
    """Client for an external embedding service.

    ``POST {endpoint}/embed`` with ``{"texts": [...], "granularity": ...}``;
    sentence responses carry ``{"vectors": [[...]]}``, token responses
    ``{"tokens": [[...]], "vectors": [[[...]]]}``. Requests are batched and at
    most ``max_in_flight`` batches run at once.
    """

    def __init__(
        self,
        endpoint: str,
        dim: int | None = None,
        *,
        batch_size: int = 64,
        max_in_flight: int = 4,
        timeout: float = 30.0,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        self.endpoint = endpoint.rstrip("/")
        self._dim = dim
        self.batch_size = batch_size
        self.max_in_flight = max_in_flight
        self._client = httpx.Client(timeout=timeout, transport=transport)
        self.spec = EmbedderSpec("http-service", dim or 0, self.endpoint)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> HttpEmbedder:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _post(self, texts: list[str], granularity: str) -> dict:
        try:
            resp = self._client.post(
                f"{self.endpoint}/embed", json={"texts": texts, "granularity": granularity}
            )
        except httpx.HTTPError as exc:
            raise EmbedError(f"embedding service unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise EmbedError(f"embedding service returned HTTP {resp.status_code}")
        try:
            return resp.json()
        except ValueError as exc:
            raise EmbedError("embedding service returned invalid JSON") from exc

    def _check(self, vec) -> np.ndarray:
        arr = np.asarray(vec, dtype=float)
        if arr.ndim != 1 or not np.all(np.isfinite(arr)):
            raise EmbedError("embedding service returned a malformed vector")
        if self._dim and arr.shape[0] != self._dim:
            raise EmbedError(f"expected dim {self._dim}, got {arr.shape[0]}")
        return _frozen(arr)

    def _batched(self, texts: Sequence[str], granularity: str) -> list[dict]:
        batches = [list(texts[i : i + self.batch_size]) for i in range(0, len(texts), self.batch_size)]
        if len(batches) <= 1:
            return [self._post(b, granularity) for b in batches]
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            return list(pool.map(lambda b: self._post(b, granularity), batches))

    def embed_sentences(self, texts: Sequence[str]) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for payload in self._batched(texts, "sentence"):
            try:
                out.extend(self._check(v) for v in payload["vectors"])
            except (KeyError, TypeError) as exc:
                raise EmbedError("embedding service response lacks 'vectors'") from exc
        if len(out) != len(texts):
            raise EmbedError(f"asked for {len(texts)} vectors, got {len(out)}")
        return out

    def embed_sentence(self, text: str) -> np.ndarray:
        return self.embed_sentences([text])[0]

    def embed_tokens(self, text: str) -> list[tuple[str, np.ndarray]]:
        payload = self._post([text], "token")
        try:
            tokens, vectors = payload["tokens"][0], payload["vectors"][0]
        except (KeyError, IndexError, TypeError) as exc:
            raise EmbedError("embedding service response lacks 'tokens'/'vectors'") from exc
        if len(tokens) != len(vectors):
            raise EmbedError("token and vector counts differ")
        return [(str(t), self._check(v)) for t, v in zip(tokens, vectors)]


def make_embedder(spec: EmbedderSpec, **kwargs) -> HashEmbedder | HttpEmbedder:
    if spec.kind == "builtin-hash":
        return HashEmbedder(spec.dim)
    return HttpEmbedder(spec.endpoint, spec.dim or None, **kwargs)
