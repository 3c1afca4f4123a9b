"""Build orchestration: cluster the keyword universe, attach DR-trees, and keep
everything a query needs (metric, objects, dataset defaults) in one handle."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from . import dr_tree
from .baselines import dataset_universe
from .clustering import ClusterParams, build_cluster_hierarchy
from .keyword_metric import EmbeddingStore, KeywordMetric, MetricParams
from .model import GeoObject, Query, ScoredResult
from .qc_tree import QcTree, build_qc_tree
from .query_engine import SearchStats, qdr_search


@dataclass(frozen=True)
class BuildParams:
    cluster: ClusterParams = ClusterParams()
    metric: MetricParams = MetricParams()
    fanout: int = dr_tree.DEFAULT_FANOUT
    tau_merge: float | None = dr_tree.DEFAULT_TAU_MERGE

    def __post_init__(self):
        if self.fanout < 2:
            raise ValueError(f"fanout must be >= 2, got {self.fanout}")


@dataclass
class QdrIndex:
    tree: QcTree
    metric: KeywordMetric
    objects: dict[str, GeoObject]
    params: BuildParams
    default_d_max: float
    build_seconds: float = 0.0

    def search(self, q: Query) -> tuple[list[ScoredResult], SearchStats]:
        return qdr_search(q, self.tree, self.metric, self.default_d_max)

    @property
    def universe(self) -> list[str]:
        return dataset_universe(list(self.objects.values()))

    @property
    def leaf_count(self) -> int:
        return len(self.tree.leaves)

    @property
    def dr_node_count(self) -> int:
        return sum(leaf.tree.node_count for leaf in self.tree.leaves)

    @property
    def duplication_ratio(self) -> float:
        """Total keyword occurrences across leaves over the universe size."""
        occurrences = sum(len(leaf.universe) for leaf in self.tree.leaves)
        return occurrences / max(len(self.universe), 1)

    @property
    def indexed_object_slots(self) -> int:
        return sum(leaf.tree.size for leaf in self.tree.leaves)


def bounding_diagonal(objects) -> float:
    xs = [o.location[0] for o in objects]
    ys = [o.location[1] for o in objects]
    diag = math.hypot(max(xs) - min(xs), max(ys) - min(ys))
    return diag if diag > 0 else 1.0


def build_index(objects, store: EmbeddingStore | None = None,
                params: BuildParams | None = None) -> QdrIndex:
    objects = list(objects)
    if not objects:
        raise ValueError("cannot index an empty object collection")
    params = params or BuildParams()
    metric = KeywordMetric(store=store, params=params.metric)
    start = time.perf_counter()
    universe = dataset_universe(objects)
    hierarchy = build_cluster_hierarchy(universe, params.cluster, metric)
    tree = build_qc_tree(hierarchy, objects, metric,
                         fanout=params.fanout, tau_merge=params.tau_merge)
    elapsed = time.perf_counter() - start
    return QdrIndex(tree=tree, metric=metric,
                    objects={o.id: o for o in objects}, params=params,
                    default_d_max=bounding_diagonal(objects),
                    build_seconds=elapsed)
