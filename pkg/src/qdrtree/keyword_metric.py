"""Keyword dissimilarity: a weighted blend of edit distance and embedding distance."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_DELTA = 0.5
_FALLBACK_DIM = 16


def levenshtein(a: str, b: str) -> int:
    """Plain dynamic-programming edit distance (insert/delete/substitute)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def textual_distance(k1: str, k2: str) -> float:
    """Edit distance normalized by the longer string; 0 iff equal, at most 1."""
    if k1 == k2:
        return 0.0
    return levenshtein(k1, k2) / max(len(k1), len(k2))


class EmbeddingStore:
    """Immutable word -> unit vector map with a deterministic fallback.

    Words missing from the store get a pseudo-vector seeded from a hash of the
    string, so unknown keywords still have a stable, reproducible distance.
    """

    def __init__(self, vectors: dict[str, np.ndarray] | None = None,
                 dimension: int = _FALLBACK_DIM):
        self._vectors: dict[str, np.ndarray] = {}
        self.dimension = dimension
        if vectors:
            dims = {len(v) for v in vectors.values()}
            if len(dims) != 1:
                raise ValueError(f"inconsistent embedding dimensions: {sorted(dims)}")
            self.dimension = dims.pop()
            for word, vec in vectors.items():
                self._vectors[word] = _unit(np.asarray(vec, dtype=np.float64))
        self._fallback_cache: dict[str, np.ndarray] = {}

    @classmethod
    def load(cls, path) -> "EmbeddingStore":
        """Read the usual word-vector text layout: "word v1 v2 ... vd" per line.

        An optional "count dimension" first line is detected and skipped.
        """
        vectors: dict[str, list[float]] = {}
        with open(path, encoding="utf-8") as fh:
            first = fh.readline()
            parts = first.split()
            if parts and not (len(parts) == 2 and _all_numeric(parts)):
                vectors[parts[0]] = [float(x) for x in parts[1:]]
            for line in fh:
                parts = line.split()
                if not parts:
                    continue
                vectors[parts[0]] = [float(x) for x in parts[1:]]
        return cls(vectors)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{len(self._vectors)} {self.dimension}\n")
            for word in sorted(self._vectors):
                vec = " ".join(repr(float(x)) for x in self._vectors[word])
                fh.write(f"{word} {vec}\n")

    def __contains__(self, word: str) -> bool:
        return word in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def known_words(self) -> list[str]:
        return sorted(self._vectors)

    def vector(self, word: str) -> np.ndarray:
        vec = self._vectors.get(word)
        if vec is not None:
            return vec
        vec = self._fallback_cache.get(word)
        if vec is None:
            vec = self._pseudo_vector(word)
            self._fallback_cache[word] = vec
        return vec

    def _pseudo_vector(self, word: str) -> np.ndarray:
        digest = hashlib.sha256(word.encode("utf-8")).digest()
        seed = int.from_bytes(digest[:8], "little")
        rng = np.random.default_rng(seed)
        return _unit(rng.standard_normal(self.dimension))


def _unit(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        out = np.zeros_like(vec)
        out[0] = 1.0
        return out
    # Already-unit vectors pass through untouched so persisted stores round-trip
    # bit-identically.
    if abs(norm - 1.0) < 1e-12:
        return np.asarray(vec, dtype=np.float64)
    return vec / norm


def _all_numeric(parts) -> bool:
    try:
        for p in parts:
            float(p)
    except ValueError:
        return False
    return True


def semantic_distance(k1: str, k2: str, store: EmbeddingStore) -> float:
    """Euclidean distance between unit vectors, scaled into [0, 1]."""
    if k1 == k2:
        return 0.0
    d = float(np.linalg.norm(store.vector(k1) - store.vector(k2)))
    return min(d / 2.0, 1.0)


@dataclass(frozen=True)
class MetricParams:
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must be in [0, 1], got {self.delta}")


def keyword_distance(k1: str, k2: str, params: MetricParams,
                     store: EmbeddingStore) -> float:
    """Blend of textual and semantic distance; symmetric, zero on equal strings."""
    if k1 == k2:
        return 0.0
    return (params.delta * textual_distance(k1, k2)
            + (1.0 - params.delta) * semantic_distance(k1, k2, store))


class KeywordMetric:
    """Memoizing front end over keyword_distance.

    Clustering recomputes cluster diameters constantly; the cache keeps that
    O(n^2) work from repeating. Cached values are bit-identical to direct calls.
    """

    def __init__(self, store: EmbeddingStore | None = None,
                 params: MetricParams | None = None):
        self.store = store if store is not None else EmbeddingStore()
        self.params = params if params is not None else MetricParams()
        self._cache: dict[tuple[str, str], float] = {}

    def distance(self, k1: str, k2: str) -> float:
        if k1 == k2:
            return 0.0
        key = (k1, k2) if k1 < k2 else (k2, k1)
        d = self._cache.get(key)
        if d is None:
            d = keyword_distance(key[0], key[1], self.params, self.store)
            self._cache[key] = d
        return d

    def pairwise_matrix(self, words: list[str]) -> np.ndarray:
        n = len(words)
        mat = np.zeros((n, n), dtype=np.float64)
        for i in range(n):
            for j in range(i + 1, n):
                mat[i, j] = mat[j, i] = self.distance(words[i], words[j])
        return mat

    def diameter(self, words) -> float:
        ws = list(words)
        best = 0.0
        for i in range(len(ws)):
            for j in range(i + 1, len(ws)):
                d = self.distance(ws[i], ws[j])
                if d > best:
                    best = d
        return best

    def medoid(self, words) -> str:
        """Member minimizing total distance to the others; lexicographic ties."""
        ws = sorted(words)
        if not ws:
            raise ValueError("medoid of empty keyword set")
        best_word, best_cost = ws[0], math.inf
        for w in ws:
            cost = sum(self.distance(w, other) for other in ws)
            if cost < best_cost:
                best_word, best_cost = w, cost
        return best_word
