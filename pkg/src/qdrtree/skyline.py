"""Skyline (dominance) computation over attribute vectors, plus point compression."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

Point = tuple[float, ...]


@dataclass(frozen=True)
class SkylineSet:
    points: tuple[Point, ...]
    compressed: bool = False


def dominates(p: Sequence[float], q: Sequence[float]) -> bool:
    """p dominates q: no worse everywhere, strictly better somewhere."""
    if len(p) != len(q):
        raise ValueError(f"dimension mismatch: {len(p)} vs {len(q)}")
    strict = False
    for a, b in zip(p, q):
        if a > b:
            return False
        if a < b:
            strict = True
    return strict


def compute_skyline(points: Iterable[Sequence[float]]) -> SkylineSet:
    """Sort-filter skyline: exactly the non-dominated points, duplicates collapsed.

    Sorting by component sum guarantees a point can only be dominated by one
    already kept, so a single scan suffices.
    """
    pts = sorted({tuple(float(v) for v in p) for p in points},
                 key=lambda p: (sum(p), p))
    if not pts:
        raise ValueError("skyline of empty point set")
    kept: list[Point] = []
    for p in pts:
        if not any(dominates(k, p) for k in kept):
            kept.append(p)
    return SkylineSet(points=tuple(sorted(kept)), compressed=False)


def cosine_similarity(p: Sequence[float], q: Sequence[float]) -> float:
    # Zero vectors absorb merges: the all-zero point dominates everything anyway.
    np_ = math.sqrt(sum(v * v for v in p))
    nq = math.sqrt(sum(v * v for v in q))
    if np_ == 0.0 or nq == 0.0:
        return 1.0
    dot = sum(a * b for a, b in zip(p, q))
    return dot / (np_ * nq)


def compress_skyline(s: SkylineSet, tau_merge: float) -> SkylineSet:
    """Merge near-parallel skyline points into their component-wise minimum.

    Repeats to fixpoint. Every input point stays dominated-or-equaled by some
    output point, which is what keeps node bounds admissible.
    """
    if s.compressed:
        raise ValueError("skyline set already compressed")
    if not 0.0 <= tau_merge <= 1.0:
        raise ValueError(f"tau_merge must be in [0, 1], got {tau_merge}")
    pts = sorted(set(s.points))
    merged = True
    while merged:
        merged = False
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if cosine_similarity(pts[i], pts[j]) >= tau_merge:
                    low = tuple(min(a, b) for a, b in zip(pts[i], pts[j]))
                    rest = [p for idx, p in enumerate(pts) if idx not in (i, j)]
                    pts = sorted(set(rest + [low]))
                    merged = True
                    break
            if merged:
                break
    return SkylineSet(points=tuple(pts), compressed=True)


def min_weighted_attribute(s: SkylineSet, weights: Sequence[float]) -> float:
    """Smallest weighted attribute sum over the stored points."""
    if not s.points:
        raise ValueError("empty skyline set")
    return min(sum(w * v for w, v in zip(weights, p)) for p in s.points)
