"""Best-first top-k search over the two-layer index."""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field

from .bitmap import KeywordBitmap, relax_query, relevance_phi
from .dr_tree import DrTree
from .keyword_metric import KeywordMetric
from .model import Query, ScoredResult, score_node, score_object
from .qc_tree import QcTree, find_leaf_cluster

OBJECT = 1
NODE = 0


@dataclass
class SearchStats:
    node_accesses: int = 0
    objects_scored: int = 0
    leaves_searched: int = 0
    elapsed: float = 0.0

    def merge(self, other: "SearchStats") -> None:
        self.node_accesses += other.node_accesses
        self.objects_scored += other.objects_scored
        self.leaves_searched += other.leaves_searched
        self.elapsed += other.elapsed


def best_first_leaf_search(q: Query, bmr: KeywordBitmap, tree: DrTree,
                           kappa: int, stats: SearchStats | None = None
                           ) -> list[ScoredResult]:
    """Exact top-kappa over one DR-tree via a score min-heap.

    Heap keys are (score, kind, tiebreak) with nodes popping before objects of
    equal score, and equal-scored objects popping in id order; that reproduces
    the brute-force (score, id) ranking exactly.
    """
    if stats is None:
        stats = SearchStats()
    if tree.is_empty or kappa <= 0:
        return []
    results: list[ScoredResult] = []
    counter = itertools.count()
    heap: list = []

    root_score = score_node(q, tree.root, relevance_phi(bmr, tree.root.kb))
    if root_score != float("inf"):
        heapq.heappush(heap, (root_score, NODE, "", next(counter), tree.root))

    while heap:
        score, kind, tiebreak, _, payload = heapq.heappop(heap)
        if kind == OBJECT:
            results.append(ScoredResult(score=score, object_id=tiebreak))
            if len(results) >= kappa:
                break
            continue
        # Expand only while the node bound can still contribute to the top-k.
        if len(results) >= kappa and score >= results[kappa - 1].score:
            continue
        stats.node_accesses += 1
        node = payload
        if node.is_leaf:
            for o in node.objects:
                phi = relevance_phi(bmr, tree.object_bitmaps[o.id])
                s = score_object(q, o, phi)
                stats.objects_scored += 1
                if s == float("inf"):
                    continue
                if len(results) < kappa or s < results[kappa - 1].score:
                    heapq.heappush(heap, (s, OBJECT, o.id, next(counter), None))
        else:
            for child in node.children:
                s = score_node(q, child, relevance_phi(bmr, child.kb))
                if s == float("inf"):
                    continue
                if len(results) < kappa or s < results[kappa - 1].score:
                    heapq.heappush(heap, (s, NODE, "", next(counter), child))
    return results


def qdr_search(q: Query, tree: QcTree, metric: KeywordMetric,
               default_d_max: float | None = None
               ) -> tuple[list[ScoredResult], SearchStats]:
    """Full query pipeline: route to leaf clusters, relax the keyword bitmap per
    leaf, search each DR-tree best-first, merge deduplicated by best score."""
    start = time.perf_counter()
    stats = SearchStats()
    if q.d_max is None:
        if default_d_max is None:
            raise ValueError("query has no d_max and no dataset default was given")
        q = q.resolved(default_d_max)
    if q.kappa == 0:
        stats.elapsed = time.perf_counter() - start
        return [], stats

    located = find_leaf_cluster(q, tree, metric)
    best: dict[str, float] = {}
    for leaf in located:
        if leaf.tree.is_empty:
            continue
        stats.leaves_searched += 1
        bmr = relax_query(q.keywords, leaf.universe, q.tau_relax, metric,
                          index=leaf.index_of)
        for r in best_first_leaf_search(q, bmr, leaf.tree, q.kappa, stats):
            prev = best.get(r.object_id)
            if prev is None or r.score < prev:
                best[r.object_id] = r.score
    merged = sorted(ScoredResult(score=s, object_id=i) for i, s in best.items())
    stats.elapsed = time.perf_counter() - start
    return merged[:q.kappa], stats
