"""Reference searchers: exhaustive linear scan (ground truth), a per-keyword
R-tree baseline, and a keyword-only (attribute-blind) R-tree baseline."""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from typing import Sequence

from . import dr_tree
from .bitmap import relax_query, relevance_phi
from .dr_tree import DrTree, bulk_build
from .keyword_metric import KeywordMetric
from .model import GeoObject, Query, ScoredResult, min_dist, score_object
from .query_engine import SearchStats


def dataset_universe(objects: Sequence[GeoObject]) -> list[str]:
    universe: set[str] = set()
    for o in objects:
        universe.update(o.keywords)
    return sorted(universe)


def linear_scan(q: Query, objects: Sequence[GeoObject], metric: KeywordMetric,
                universe: Sequence[str] | None = None) -> list[ScoredResult]:
    """Score every object against the relaxed query bitmap over the full
    dataset universe; exact top-kappa, ties by id."""
    if universe is None:
        universe = dataset_universe(objects)
    index = {k: i for i, k in enumerate(universe)}
    bmr = relax_query(q.keywords, universe, q.tau_relax, metric, index=index)
    scored = []
    for o in objects:
        phi = relevance_phi(bmr, _encode(o, universe, index))
        s = score_object(q, o, phi)
        if s != float("inf"):
            scored.append(ScoredResult(score=s, object_id=o.id))
    scored.sort()
    return scored[:q.kappa]


def scoped_linear_scan(q: Query, leaves, metric: KeywordMetric
                       ) -> list[ScoredResult]:
    """Flat-scan counterpart of the index search: per located leaf, score that
    leaf's objects over the leaf universe, then merge keeping best scores.

    Shares no traversal code with the tree search; used to validate it.
    """
    best: dict[str, float] = {}
    for leaf in leaves:
        if leaf.tree.is_empty:
            continue
        bmr = relax_query(q.keywords, leaf.universe, q.tau_relax, metric,
                          index=leaf.index_of)
        for o in leaf.tree.iter_objects():
            phi = relevance_phi(bmr, _encode(o, leaf.universe, leaf.index_of))
            s = score_object(q, o, phi)
            if s == float("inf"):
                continue
            if o.id not in best or s < best[o.id]:
                best[o.id] = s
    merged = sorted(ScoredResult(score=s, object_id=i) for i, s in best.items())
    return merged[:q.kappa]


def _encode(o: GeoObject, universe, index):
    from .bitmap import encode
    return encode(o.keywords, universe, index)


@dataclass
class PerKeywordIndex:
    """One plain R-tree per dataset keyword; objects duplicated per keyword."""

    trees: dict[str, DrTree]
    universe: list[str]
    index_of: dict[str, int]
    objects: dict[str, GeoObject]


def build_per_keyword_index(objects: Sequence[GeoObject],
                            fanout: int = dr_tree.DEFAULT_FANOUT) -> PerKeywordIndex:
    universe = dataset_universe(objects)
    trees = {}
    for kw in universe:
        members = [o for o in objects if kw in o.keywords]
        trees[kw] = bulk_build(members, universe, fanout, tau_merge=None)
    return PerKeywordIndex(trees=trees, universe=universe,
                           index_of={k: i for i, k in enumerate(universe)},
                           objects={o.id: o for o in objects})


def per_keyword_rtree_search(q: Query, index: PerKeywordIndex,
                             metric: KeywordMetric
                             ) -> tuple[list[ScoredResult], SearchStats]:
    """Search every tree whose keyword matches (exactly or within tau_relax) a
    query keyword, take top-kappa per tree, merge and deduplicate."""
    start = time.perf_counter()
    stats = SearchStats()
    bmr = relax_query(q.keywords, index.universe, q.tau_relax, metric,
                      index=index.index_of)
    matched = [index.universe[i] for i in range(len(index.universe)) if bmr.is_set(i)]
    best: dict[str, float] = {}
    for kw in matched:
        tree = index.trees[kw]
        if tree.is_empty:
            continue
        stats.leaves_searched += 1
        for r in _spatial_best_first(q, tree, bmr, stats):
            if r.object_id not in best or r.score < best[r.object_id]:
                best[r.object_id] = r.score
    merged = sorted(ScoredResult(score=s, object_id=i) for i, s in best.items())
    stats.elapsed = time.perf_counter() - start
    return merged[:q.kappa], stats


def _spatial_best_first(q: Query, tree: DrTree, bmr, stats: SearchStats
                        ) -> list[ScoredResult]:
    """Best-first over a plain R-tree with a spatial-only node bound.

    The bound ignores the keyword and attribute terms (both >= 0), so it stays
    admissible; it just prunes far less than the dual-filtering bound.
    """
    results: list[ScoredResult] = []
    counter = itertools.count()
    spatial_weight = q.alpha * q.beta / q.d_max
    heap = [(spatial_weight * min_dist(q.location, tree.root.mbr),
             0, "", next(counter), tree.root)]
    while heap:
        score, kind, tiebreak, _, node = heapq.heappop(heap)
        if kind == 1:
            results.append(ScoredResult(score=score, object_id=tiebreak))
            if len(results) >= q.kappa:
                break
            continue
        stats.node_accesses += 1
        if node.is_leaf:
            for o in node.objects:
                phi = relevance_phi(bmr, tree.object_bitmaps[o.id])
                s = score_object(q, o, phi)
                stats.objects_scored += 1
                if s != float("inf"):
                    heapq.heappush(heap, (s, 1, o.id, next(counter), None))
        else:
            for child in node.children:
                bound = spatial_weight * min_dist(q.location, child.mbr)
                heapq.heappush(heap, (bound, 0, "", next(counter), child))
    return results


@dataclass
class KeywordOnlyIndex:
    """Single R-tree over all objects with node keyword bitmaps but no skyline
    points; attributes are ignored during traversal."""

    tree: DrTree
    universe: list[str]
    index_of: dict[str, int]


def build_keyword_only_index(objects: Sequence[GeoObject],
                             fanout: int = dr_tree.DEFAULT_FANOUT) -> KeywordOnlyIndex:
    universe = dataset_universe(objects)
    return KeywordOnlyIndex(tree=bulk_build(objects, universe, fanout, tau_merge=None),
                            universe=universe,
                            index_of={k: i for i, k in enumerate(universe)})


def keyword_only_search(q: Query, index: KeywordOnlyIndex, metric: KeywordMetric
                        ) -> tuple[list[ScoredResult], SearchStats]:
    """Extract every object with relaxed keyword overlap (pruning only subtrees
    with zero overlap), then rank the candidates by the full score."""
    start = time.perf_counter()
    stats = SearchStats()
    bmr = relax_query(q.keywords, index.universe, q.tau_relax, metric,
                      index=index.index_of)
    candidates: list[ScoredResult] = []
    if not index.tree.is_empty:
        stats.leaves_searched = 1
        stack = [index.tree.root]
        while stack:
            node = stack.pop()
            if relevance_phi(bmr, node.kb) == 0:
                continue
            stats.node_accesses += 1
            if node.is_leaf:
                for o in node.objects:
                    phi = relevance_phi(bmr, index.tree.object_bitmaps[o.id])
                    if phi == 0:
                        continue
                    stats.objects_scored += 1
                    candidates.append(
                        ScoredResult(score=score_object(q, o, phi), object_id=o.id))
            else:
                stack.extend(node.children)
    candidates.sort()
    stats.elapsed = time.perf_counter() - start
    return candidates[:q.kappa], stats
