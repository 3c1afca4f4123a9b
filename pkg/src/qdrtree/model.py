"""Domain types and the two ranking functions (object score and node bound)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .skyline import SkylineSet, min_weighted_attribute

DEFAULT_ALPHA = 0.5
DEFAULT_BETA = 0.67
DEFAULT_KAPPA = 10
DEFAULT_TAU_RELAX = 0.3

Location = tuple[float, float]


@dataclass(frozen=True)
class GeoObject:
    """An indexed entity: location, keyword set, normalized attribute vector.

    Attributes are in [0, 1] with smaller preferable; higher-is-better
    dimensions are flipped at ingest.
    """

    id: str
    location: Location
    keywords: frozenset[str]
    attributes: tuple[float, ...]

    def __post_init__(self):
        x, y = self.location
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"object {self.id}: non-finite location {self.location}")
        if not self.keywords:
            raise ValueError(f"object {self.id}: empty keyword set")
        for a in self.attributes:
            if not (0.0 <= a <= 1.0):
                raise ValueError(f"object {self.id}: attribute {a} outside [0, 1]")


@dataclass(frozen=True)
class Query:
    location: Location
    keywords: frozenset[str]
    weights: tuple[float, ...]
    kappa: int = DEFAULT_KAPPA
    d_max: float | None = None
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    tau_relax: float = DEFAULT_TAU_RELAX

    def __post_init__(self):
        x, y = self.location
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"non-finite query location {self.location}")
        if not self.keywords:
            raise ValueError("query keyword set is empty")
        if any(w < 0 for w in self.weights):
            raise ValueError(f"negative attribute weight in {self.weights}")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError(f"attribute weights must sum to 1, got {sum(self.weights)}")
        # kappa = 0 is tolerated as an explicit "no results" request.
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.d_max is not None and not self.d_max > 0:
            raise ValueError(f"d_max must be positive, got {self.d_max}")
        if not 0.0 <= self.alpha <= 1.0 or not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"alpha/beta must be in [0, 1]: {self.alpha}, {self.beta}")
        if self.tau_relax < 0:
            raise ValueError(f"tau_relax must be >= 0, got {self.tau_relax}")

    def resolved(self, default_d_max: float) -> "Query":
        """Fill in d_max from the dataset default when the query omits it."""
        if self.d_max is not None:
            return self
        return Query(location=self.location, keywords=self.keywords,
                     weights=self.weights, kappa=self.kappa, d_max=default_d_max,
                     alpha=self.alpha, beta=self.beta, tau_relax=self.tau_relax)


@dataclass(frozen=True)
class ScoreParams:
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    d_max: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0 or not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"alpha/beta must be in [0, 1]: {self.alpha}, {self.beta}")
        if not self.d_max > 0:
            raise ValueError(f"d_max must be positive, got {self.d_max}")


@dataclass(frozen=True, order=True)
class ScoredResult:
    # Field order makes (score, id) the natural sort key.
    score: float
    object_id: str = field(compare=True)


def euclidean_distance(a: Location, b: Location) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


@dataclass(frozen=True)
class Mbr:
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self):
        if self.min_x > self.max_x or self.min_y > self.max_y:
            raise ValueError(f"inverted MBR: {self}")

    def contains(self, p: Location) -> bool:
        return self.min_x <= p[0] <= self.max_x and self.min_y <= p[1] <= self.max_y

    def union(self, other: "Mbr") -> "Mbr":
        return Mbr(min(self.min_x, other.min_x), min(self.min_y, other.min_y),
                   max(self.max_x, other.max_x), max(self.max_y, other.max_y))

    @classmethod
    def of_points(cls, points) -> "Mbr":
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        return cls(min(xs), min(ys), max(xs), max(ys))


def min_dist(p: Location, mbr: Mbr) -> float:
    """Distance from a point to the nearest point of the rectangle (0 inside)."""
    dx = max(mbr.min_x - p[0], 0.0, p[0] - mbr.max_x)
    dy = max(mbr.min_y - p[1], 0.0, p[1] - mbr.max_y)
    return math.hypot(dx, dy)


def score_object(q: Query, o: GeoObject, phi: int) -> float:
    """Ranking score of an object; lower is better, +inf when phi = 0."""
    if len(q.weights) != len(o.attributes):
        raise ValueError(
            f"weight/attribute dimension mismatch: {len(q.weights)} vs {len(o.attributes)}")
    if phi <= 0:
        return math.inf
    spatial = euclidean_distance(q.location, o.location) / q.d_max
    attr = sum(w * a for w, a in zip(q.weights, o.attributes))
    return (q.alpha * q.beta * spatial
            + (1.0 - q.beta) * (1.0 / phi)
            + (1.0 - q.alpha) * q.beta * attr)


def score_node(q: Query, node, phi_node: int) -> float:
    """Lower bound on the score of any object under an internal/leaf index node.

    `node` must expose .mbr (Mbr) and .sp (SkylineSet).
    """
    if phi_node <= 0:
        return math.inf
    sp: SkylineSet = node.sp
    if not sp.points:
        raise ValueError("non-empty node with empty skyline set")
    spatial = min_dist(q.location, node.mbr) / q.d_max
    attr = min_weighted_attribute(sp, q.weights)
    return (q.alpha * q.beta * spatial
            + (1.0 - q.beta) * (1.0 / phi_node)
            + (1.0 - q.alpha) * q.beta * attr)
