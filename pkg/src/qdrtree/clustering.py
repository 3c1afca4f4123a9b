"""Hierarchical quad clustering of the keyword universe.

Repeated 4-way kernel k-means splits, stopping on a diameter threshold, with a
duplication pass that copies keywords near-equidistant from the four sibling
centers into all four sibling leaves.
"""

from __future__ import annotations

import statistics
import zlib
from dataclasses import dataclass, field

import numpy as np

from .keyword_metric import KeywordMetric

DEFAULT_TAU_CLUSTER = 0.3
DEFAULT_TAU_DUP = 0.05
DEFAULT_KERNEL_SIGMA = 0.5
DEFAULT_MAX_ITERS = 50

QUAD = 4


@dataclass(frozen=True)
class ClusterParams:
    tau_cluster: float = DEFAULT_TAU_CLUSTER
    tau_dup: float = DEFAULT_TAU_DUP
    kernel_sigma: float = DEFAULT_KERNEL_SIGMA
    seed: int = 0
    max_iters: int = DEFAULT_MAX_ITERS

    def __post_init__(self):
        if not self.tau_cluster > 0:
            raise ValueError(f"tau_cluster must be positive, got {self.tau_cluster}")
        if self.tau_dup < 0:
            raise ValueError(f"tau_dup must be >= 0, got {self.tau_dup}")
        if not self.kernel_sigma > 0:
            raise ValueError(f"kernel_sigma must be positive, got {self.kernel_sigma}")


@dataclass(frozen=True)
class KeywordCluster:
    keywords: frozenset[str]
    center: str
    diameter: float


def make_cluster(keywords, metric: KeywordMetric) -> KeywordCluster:
    kws = frozenset(keywords)
    if not kws:
        raise ValueError("empty keyword cluster")
    return KeywordCluster(keywords=kws, center=metric.medoid(kws),
                          diameter=metric.diameter(kws))


# Leaf reasons: "diameter" = stopped by the tightness rule, "small" = too few
# members to quad-split.
@dataclass
class ClusterNode:
    cluster: KeywordCluster
    children: list["ClusterNode"] = field(default_factory=list)
    leaf_reason: str | None = None
    # Keywords copied in by duplication; they extend leaf universes but are
    # never fed back into further splits, so the split tree is tau_dup-free.
    duplicated: frozenset[str] = frozenset()

    @property
    def is_leaf(self) -> bool:
        return not self.children


def _subset_seed(base_seed: int, words: list[str]) -> int:
    # Seed depends on the set content, not on traversal order, so a subtree's
    # split is the same no matter where the set shows up in the hierarchy.
    blob = "\x00".join(sorted(words)).encode("utf-8")
    return (base_seed & 0xFFFFFFFF) ^ zlib.crc32(blob)


def kernel_kmeans(keywords, k: int, params: ClusterParams,
                  metric: KeywordMetric) -> list[list[str]]:
    """Partition keywords into k non-empty groups, RBF kernel over keyword distance.

    Deterministic for a fixed seed: farthest-first seeding, index-order ties.
    """
    words = sorted(set(keywords))
    n = len(words)
    if n < k:
        raise ValueError(f"cannot split {n} keywords into {k} clusters")
    if n == k:
        return [[w] for w in words]

    dist = metric.pairwise_matrix(words)
    kernel = np.exp(-(dist ** 2) / (2.0 * params.kernel_sigma ** 2))

    rng = np.random.default_rng(_subset_seed(params.seed, words))
    # Farthest-first seeding in feature space: ||phi(i)-phi(j)||^2 = 2 - 2K[i,j].
    centers = [int(rng.integers(n))]
    feat_dist = 2.0 - 2.0 * kernel
    while len(centers) < k:
        mins = feat_dist[:, centers].min(axis=1)
        centers.append(int(np.argmax(mins)))
    labels = np.argmin(feat_dist[:, centers], axis=1)

    for _ in range(params.max_iters):
        labels = _repair_empty(labels, kernel, k)
        # Feature-space distance to each cluster mean:
        #   K[i,i] - 2 mean_j K[i,j] + mean_{j,l} K[j,l]   (constant K[i,i] dropped)
        penalty = np.empty((n, k))
        for c in range(k):
            members = np.flatnonzero(labels == c)
            m = members.size
            cross = kernel[:, members].sum(axis=1) / m
            within = kernel[np.ix_(members, members)].sum() / (m * m)
            penalty[:, c] = within - 2.0 * cross
        new_labels = np.argmin(penalty, axis=1)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    labels = _repair_empty(labels, kernel, k)

    groups: list[list[str]] = [[] for _ in range(k)]
    for idx, lab in enumerate(labels):
        groups[int(lab)].append(words[idx])
    return [sorted(g) for g in groups]


def _repair_empty(labels: np.ndarray, kernel: np.ndarray, k: int) -> np.ndarray:
    """Refill empty clusters with the point farthest from its own cluster mean."""
    labels = labels.copy()
    for c in range(k):
        if np.any(labels == c):
            continue
        candidates = np.flatnonzero(np.bincount(labels, minlength=k)[labels] > 1)
        worst, worst_pen = candidates[0], -np.inf
        for i in candidates:
            members = np.flatnonzero(labels == labels[i])
            m = members.size
            pen = (kernel[np.ix_(members, members)].sum() / (m * m)
                   - 2.0 * kernel[i, members].sum() / m)
            if pen > worst_pen:
                worst, worst_pen = int(i), pen
        labels[worst] = c
    return labels


def duplicate(siblings: list[list[str]], tau_dup: float,
              metric: KeywordMetric) -> list[set[str]]:
    """Keywords whose distances to the four sibling centers have population
    variance below tau_dup get copied into every sibling they are missing from.

    Returns, per sibling, the set of keywords to add.
    """
    if len(siblings) != QUAD:
        raise ValueError(f"duplication expects {QUAD} siblings, got {len(siblings)}")
    centers = [metric.medoid(s) for s in siblings]
    union = sorted(set().union(*map(set, siblings)))
    added: list[set[str]] = [set() for _ in siblings]
    for k in union:
        var = statistics.pvariance([metric.distance(k, cen) for cen in centers])
        if var < tau_dup:
            for j, sib in enumerate(siblings):
                if k not in sib:
                    added[j].add(k)
    return added


def build_cluster_hierarchy(universe, params: ClusterParams,
                            metric: KeywordMetric) -> ClusterNode:
    """Quad-split the keyword universe until every cluster is tight or too small."""
    words = sorted(set(universe))
    if not words:
        raise ValueError("empty keyword universe")
    root = ClusterNode(cluster=make_cluster(words, metric))
    stack = [root]
    while stack:
        node = stack.pop()
        members = sorted(node.cluster.keywords)
        if len(members) < QUAD:
            node.leaf_reason = "small"
            continue
        if node.cluster.diameter < params.tau_cluster:
            node.leaf_reason = "diameter"
            continue
        parts = kernel_kmeans(members, QUAD, params, metric)
        child_clusters = [make_cluster(p, metric) for p in parts]
        if any(c.diameter < params.tau_cluster for c in child_clusters):
            added = duplicate(parts, params.tau_dup, metric)
        else:
            added = [set() for _ in parts]
        for cluster, extra in zip(child_clusters, added):
            child = ClusterNode(cluster=cluster, duplicated=frozenset(extra))
            node.children.append(child)
            stack.append(child)
    return root


def iter_leaves(root: ClusterNode):
    """Yield (leaf, inherited_duplicates) in a stable depth-first order.

    Duplicates attached to an internal ancestor flow down to every leaf below it.
    """
    def walk(node: ClusterNode, inherited: frozenset[str]):
        carried = inherited | node.duplicated
        if node.is_leaf:
            yield node, carried
        else:
            for child in node.children:
                yield from walk(child, carried)
    yield from walk(root, frozenset())
