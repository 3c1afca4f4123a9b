"""Keyword bitmaps over a leaf universe: encoding, relevance, search relaxation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .keyword_metric import KeywordMetric


@dataclass(frozen=True)
class KeywordBitmap:
    """Fixed-width bit vector; bit i corresponds to universe position i."""

    universe_size: int
    bits: int

    def __post_init__(self):
        if self.universe_size <= 0:
            raise ValueError(f"universe_size must be positive, got {self.universe_size}")
        if self.bits < 0 or self.bits >> self.universe_size:
            raise ValueError("bits outside bitmap width")

    def popcount(self) -> int:
        return self.bits.bit_count()

    def is_set(self, i: int) -> bool:
        return bool(self.bits >> i & 1)

    def union(self, other: "KeywordBitmap") -> "KeywordBitmap":
        _check_widths(self, other)
        return KeywordBitmap(self.universe_size, self.bits | other.bits)

    def to_bytes(self) -> bytes:
        nbytes = (self.universe_size + 7) // 8
        return self.bits.to_bytes(nbytes, "little")

    @classmethod
    def from_bytes(cls, data: bytes, universe_size: int) -> "KeywordBitmap":
        return cls(universe_size, int.from_bytes(data, "little"))


def _check_widths(a: KeywordBitmap, b: KeywordBitmap) -> None:
    if a.universe_size != b.universe_size:
        raise ValueError(
            f"bitmap width mismatch ({a.universe_size} vs {b.universe_size}); "
            "bitmaps from different leaf clusters cannot be combined")


def encode(keywords: Iterable[str], universe: Sequence[str],
           index: Mapping[str, int] | None = None) -> KeywordBitmap:
    """Bitmap of the keywords present in both the set and the universe."""
    if index is None:
        index = {k: i for i, k in enumerate(universe)}
    bits = 0
    for k in keywords:
        pos = index.get(k)
        if pos is not None:
            bits |= 1 << pos
    return KeywordBitmap(len(universe), bits)


def relevance_phi(a: KeywordBitmap, b: KeywordBitmap) -> int:
    """Keyword relevance: popcount of the bitwise AND."""
    _check_widths(a, b)
    return (a.bits & b.bits).bit_count()


def search_relaxation(bmq: KeywordBitmap, universe: Sequence[str], tau_relax: float,
                      metric: KeywordMetric,
                      source_keywords: Iterable[str] | None = None) -> KeywordBitmap:
    """Relax a query bitmap: set the bit of every universe keyword within
    tau_relax of a query keyword.

    `source_keywords`, when given, supplies the query keywords directly so that
    keywords absent from the universe (no set bit to start from) still relax
    onto their near matches.
    """
    if bmq.universe_size != len(universe):
        raise ValueError(f"bitmap width {bmq.universe_size} != universe size {len(universe)}")
    if source_keywords is None:
        source_keywords = [universe[i] for i in range(len(universe)) if bmq.is_set(i)]
    bits = bmq.bits
    if tau_relax > 0:
        for k in source_keywords:
            for j, u in enumerate(universe):
                if metric.distance(k, u) < tau_relax:
                    bits |= 1 << j
    return KeywordBitmap(len(universe), bits)


def relax_query(keywords: Iterable[str], universe: Sequence[str], tau_relax: float,
                metric: KeywordMetric,
                index: Mapping[str, int] | None = None) -> KeywordBitmap:
    """Encode the query keywords over the universe and relax in one step."""
    kws = list(keywords)
    bmq = encode(kws, universe, index)
    return search_relaxation(bmq, universe, tau_relax, metric, source_keywords=kws)
