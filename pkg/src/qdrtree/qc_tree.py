"""Keyword-cluster layer: quad tree routing queries to leaf clusters, each leaf
owning a keyword universe and one DR-tree over the objects it covers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import dr_tree
from .clustering import ClusterNode, KeywordCluster, iter_leaves
from .dr_tree import DrTree
from .keyword_metric import KeywordMetric
from .model import GeoObject, Query

QUAD = 4


@dataclass
class QcLeaf:
    leaf_id: int
    cluster: KeywordCluster
    universe: list[str]                     # lexicographic; fixes bitmap bit order
    index_of: dict[str, int]
    tree: DrTree
    leaf_reason: str = "diameter"


@dataclass
class QcInternal:
    center: str
    children: list = field(default_factory=list)   # exactly 4 QcInternal/QcLeaf


QcNode = QcInternal | QcLeaf


@dataclass
class QcTree:
    root: QcNode
    leaves: list[QcLeaf]


def build_qc_tree(hierarchy: ClusterNode, objects: Sequence[GeoObject],
                  metric: KeywordMetric,
                  fanout: int = dr_tree.DEFAULT_FANOUT,
                  tau_merge: float | None = dr_tree.DEFAULT_TAU_MERGE) -> QcTree:
    """Mirror the cluster hierarchy; every object lands in each leaf whose
    universe intersects its keywords (possibly several)."""
    objects = list(objects)
    leaves: list[QcLeaf] = []
    leaf_payload: dict[int, tuple[ClusterNode, frozenset[str]]] = {}
    for node, inherited in iter_leaves(hierarchy):
        leaf_payload[id(node)] = (node, inherited)

    def convert(node: ClusterNode) -> QcNode:
        if node.is_leaf:
            _, inherited = leaf_payload[id(node)]
            universe = sorted(node.cluster.keywords | inherited)
            index_of = {k: i for i, k in enumerate(universe)}
            members = [o for o in objects if any(k in index_of for k in o.keywords)]
            tree = dr_tree.bulk_build(members, universe, fanout, tau_merge)
            leaf = QcLeaf(leaf_id=len(leaves), cluster=node.cluster,
                          universe=universe, index_of=index_of, tree=tree,
                          leaf_reason=node.leaf_reason or "diameter")
            leaves.append(leaf)
            return leaf
        if len(node.children) != QUAD:
            raise ValueError(f"internal cluster node with {len(node.children)} children")
        return QcInternal(center=node.cluster.center,
                          children=[convert(c) for c in node.children])

    root = convert(hierarchy)
    tree = QcTree(root=root, leaves=leaves)

    covered = set()
    for leaf in leaves:
        covered.update(leaf.universe)
    for o in objects:
        if not (o.keywords & covered):
            raise ValueError(f"object {o.id}: no keyword covered by any leaf universe")
    return tree


def find_leaf_cluster(q: Query, tree: QcTree, metric: KeywordMetric) -> list[QcLeaf]:
    """Descend once per query keyword, always into the child with the nearest
    center (lexicographic center on ties); union of reached leaves."""
    reached: dict[int, QcLeaf] = {}
    for k in sorted(q.keywords):
        node = tree.root
        while isinstance(node, QcInternal):
            node = min(node.children,
                       key=lambda c: (metric.distance(k, _center_of(c)), _center_of(c)))
        reached[node.leaf_id] = node
    return [reached[i] for i in sorted(reached)]


def _center_of(node: QcNode) -> str:
    return node.center if isinstance(node, QcInternal) else node.cluster.center
