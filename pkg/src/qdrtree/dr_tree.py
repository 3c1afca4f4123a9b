"""Dual-filtering R-tree: STR-packed spatial tree whose nodes carry a keyword
bitmap and compressed skyline points for pruning."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .bitmap import KeywordBitmap, encode
from .model import GeoObject, Mbr, min_dist
from .skyline import SkylineSet, compress_skyline, compute_skyline

DEFAULT_FANOUT = 25
DEFAULT_TAU_MERGE = 0.99

__all__ = ["DrNode", "DrTree", "bulk_build", "min_dist", "DEFAULT_FANOUT",
           "DEFAULT_TAU_MERGE"]


@dataclass
class DrNode:
    mbr: Mbr
    kb: KeywordBitmap
    sp: SkylineSet
    children: list["DrNode"] = field(default_factory=list)
    objects: list[GeoObject] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def entries(self):
        return self.objects if self.is_leaf else self.children


@dataclass
class DrTree:
    root: DrNode | None
    universe: list[str]
    size: int
    node_count: int
    object_bitmaps: dict[str, KeywordBitmap] = field(default_factory=dict)

    @property
    def is_empty(self) -> bool:
        return self.root is None

    def iter_nodes(self):
        if self.root is None:
            return
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children)

    def iter_objects(self):
        for node in self.iter_nodes():
            yield from node.objects


def _str_chunks(items: list, fanout: int,
                x_key, y_key) -> list[list]:
    """Sort-Tile-Recursive grouping: vertical slices by x, packs by y within."""
    n = len(items)
    pages = math.ceil(n / fanout)
    slices = math.ceil(math.sqrt(pages))
    per_slice = math.ceil(n / slices)
    by_x = sorted(items, key=x_key)
    chunks: list[list] = []
    for s in range(0, n, per_slice):
        strip = sorted(by_x[s:s + per_slice], key=y_key)
        for o in range(0, len(strip), fanout):
            chunks.append(strip[o:o + fanout])
    return chunks


def _compress(points, tau_merge: float | None) -> SkylineSet:
    sky = compute_skyline(points)
    if tau_merge is None:
        return sky
    return compress_skyline(sky, tau_merge)


def bulk_build(objects: Sequence[GeoObject], universe: Sequence[str],
               fanout: int = DEFAULT_FANOUT,
               tau_merge: float | None = DEFAULT_TAU_MERGE) -> DrTree:
    """Build the tree bottom-up with STR packing.

    tau_merge=None keeps skyline sets uncompressed (useful for audits).
    """
    universe = list(universe)
    if fanout < 2:
        raise ValueError(f"fanout must be >= 2, got {fanout}")
    objects = list(objects)
    if not objects:
        return DrTree(root=None, universe=universe, size=0, node_count=0)

    index = {k: i for i, k in enumerate(universe)}
    obj_bitmaps = {o.id: encode(o.keywords, universe, index) for o in objects}
    node_count = 0

    def make_leaf(group: list[GeoObject]) -> DrNode:
        kb = KeywordBitmap(len(universe), 0)
        for o in group:
            kb = kb.union(obj_bitmaps[o.id])
        return DrNode(
            mbr=Mbr.of_points([o.location for o in group]),
            kb=kb,
            sp=_compress([o.attributes for o in group], tau_merge),
            objects=group,
        )

    def make_internal(group: list[DrNode]) -> DrNode:
        mbr = group[0].mbr
        kb = group[0].kb
        pts: list = []
        for child in group:
            pts.extend(child.sp.points)
        for child in group[1:]:
            mbr = mbr.union(child.mbr)
            kb = kb.union(child.kb)
        return DrNode(mbr=mbr, kb=kb, sp=_compress(pts, tau_merge), children=group)

    ordered = sorted(objects, key=lambda o: (o.location[0], o.location[1], o.id))
    if len(ordered) <= fanout:
        nodes = [make_leaf(ordered)]
    else:
        groups = _str_chunks(ordered, fanout,
                             x_key=lambda o: (o.location[0], o.location[1], o.id),
                             y_key=lambda o: (o.location[1], o.location[0], o.id))
        nodes = [make_leaf(g) for g in groups]
    node_count += len(nodes)

    def center(node: DrNode):
        return ((node.mbr.min_x + node.mbr.max_x) / 2.0,
                (node.mbr.min_y + node.mbr.max_y) / 2.0)

    while len(nodes) > 1:
        groups = _str_chunks(nodes, fanout,
                             x_key=lambda n: (center(n)[0], center(n)[1]),
                             y_key=lambda n: (center(n)[1], center(n)[0]))
        nodes = [make_internal(g) for g in groups]
        node_count += len(nodes)

    return DrTree(root=nodes[0], universe=universe, size=len(objects),
                  node_count=node_count, object_bitmaps=obj_bitmaps)
