"""Dataset ingestion, synthetic data generation, and index persistence."""

from __future__ import annotations

import json
import math
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .bitmap import KeywordBitmap
from .clustering import ClusterParams, KeywordCluster
from .dr_tree import DrNode, DrTree
from .index import BuildParams, QdrIndex
from .keyword_metric import EmbeddingStore, KeywordMetric, MetricParams
from .model import GeoObject, Mbr
from .qc_tree import QcInternal, QcLeaf, QcTree
from .skyline import SkylineSet

MAGIC = b"QDR1"
FORMAT_VERSION = 1

LOWER_BETTER = "lower"
HIGHER_BETTER = "higher"


class IngestError(ValueError):
    """Raised when one or more dataset records fail to parse."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


class IndexFormatError(ValueError):
    """Raised on magic/version/checksum failures while loading an index."""


@dataclass(frozen=True)
class DatasetManifest:
    object_count: int
    attribute_dimension: int
    attribute_directions: tuple[str, ...]
    bounding_rect: tuple[float, float, float, float]   # min_x, min_y, max_x, max_y
    keyword_universe_size: int


def normalize_attributes(raw: list[float], mins: list[float], maxs: list[float],
                         directions) -> tuple[float, ...]:
    """Min-max normalize into [0, 1], then flip higher-is-better dimensions.

    A constant dimension (min == max) normalizes to 0 for everyone.
    """
    out = []
    for v, lo, hi, direction in zip(raw, mins, maxs, directions):
        x = 0.0 if hi == lo else (v - lo) / (hi - lo)
        if direction == HIGHER_BETTER:
            x = 1.0 - x
        out.append(min(max(x, 0.0), 1.0))
    return tuple(out)


def load_objects(path, directions=None) -> tuple[list[GeoObject], DatasetManifest]:
    """Read line-delimited JSON records: id, x, y, keywords, attrs."""
    raw_records = []
    problems: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                oid = str(rec["id"])
                x, y = float(rec["x"]), float(rec["y"])
                if not (math.isfinite(x) and math.isfinite(y)):
                    raise ValueError("non-finite coordinate")
                keywords = frozenset(str(k).lower() for k in rec["keywords"])
                if not keywords:
                    raise ValueError("empty keyword list")
                attrs = [float(a) for a in rec["attrs"]]
            except (KeyError, TypeError, ValueError) as exc:
                problems.append(f"line {lineno}: {exc}")
                continue
            raw_records.append((oid, (x, y), keywords, attrs))

    if not problems and raw_records:
        dims = {len(r[3]) for r in raw_records}
        if len(dims) != 1:
            problems.append(f"inconsistent attribute dimensions: {sorted(dims)}")
    if problems:
        raise IngestError(problems)
    if not raw_records:
        raise IngestError(["dataset is empty"])

    dim = len(raw_records[0][3])
    if directions is None:
        directions = (LOWER_BETTER,) * dim
    directions = tuple(directions)
    if len(directions) != dim:
        raise IngestError(
            [f"{len(directions)} attribute directions for {dim} dimensions"])

    mins = [min(r[3][i] for r in raw_records) for i in range(dim)]
    maxs = [max(r[3][i] for r in raw_records) for i in range(dim)]
    objects = [
        GeoObject(id=oid, location=loc, keywords=kws,
                  attributes=normalize_attributes(attrs, mins, maxs, directions))
        for oid, loc, kws, attrs in raw_records
    ]
    universe = set()
    for o in objects:
        universe.update(o.keywords)
    xs = [o.location[0] for o in objects]
    ys = [o.location[1] for o in objects]
    manifest = DatasetManifest(
        object_count=len(objects), attribute_dimension=dim,
        attribute_directions=directions,
        bounding_rect=(min(xs), min(ys), max(xs), max(ys)),
        keyword_universe_size=len(universe))
    return objects, manifest


def write_objects(objects, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for o in objects:
            fh.write(json.dumps({
                "id": o.id, "x": o.location[0], "y": o.location[1],
                "keywords": sorted(o.keywords), "attrs": list(o.attributes),
            }) + "\n")


# ---------------------------------------------------------------------------
# Synthetic data
# ---------------------------------------------------------------------------

_TOPIC_BASES = ["food", "music", "sport", "coffee", "hotel", "repair", "health",
                "travel", "craft", "garden", "cinema", "market"]
_SUFFIX = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class SynthParams:
    object_count: int = 1000
    coord_range: tuple[float, float] = (0.0, 10000.0)
    topic_count: int = 6
    keywords_per_topic: int = 25
    keyword_ratio: float = 0.12          # object keyword count / topic size
    attr_dim: int = 4
    attr_mean: float = 0.5
    attr_std: float = 0.15
    embedding_dim: int = 16
    embedding_noise: float = 0.12
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.keyword_ratio <= 1.0:
            raise ValueError(f"keyword_ratio must be in (0, 1], got {self.keyword_ratio}")
        if self.coord_range[1] <= self.coord_range[0]:
            raise ValueError(f"bad coord_range {self.coord_range}")
        if self.topic_count < 1 or self.object_count < 1 or self.attr_dim < 1:
            raise ValueError("counts must be positive")


@dataclass
class SynthDataset:
    objects: list[GeoObject]
    store: EmbeddingStore
    topics: list[list[str]]
    params: SynthParams


def _topic_name(i: int) -> str:
    base = _TOPIC_BASES[i % len(_TOPIC_BASES)]
    return base if i < len(_TOPIC_BASES) else f"{base}{i // len(_TOPIC_BASES)}"


def _member_name(topic: str, j: int) -> str:
    return f"{topic}{_SUFFIX[j // 26]}{_SUFFIX[j % 26]}"


def generate_synthetic(params: SynthParams) -> SynthDataset:
    """Uniform coordinates, topic-grouped keywords, clipped-normal attributes.

    Topic groups are latent clusters both textually (shared prefix) and
    semantically (embeddings scattered around a shared direction), so the
    keyword universe actually clusters.
    """
    rng = np.random.default_rng(params.seed)
    topics: list[list[str]] = []
    vectors: dict[str, np.ndarray] = {}
    for t in range(params.topic_count):
        name = _topic_name(t)
        direction = rng.standard_normal(params.embedding_dim)
        direction /= np.linalg.norm(direction)
        group = []
        for j in range(params.keywords_per_topic):
            word = _member_name(name, j)
            group.append(word)
            vec = direction + params.embedding_noise * rng.standard_normal(
                params.embedding_dim)
            vectors[word] = vec
        topics.append(group)

    lo, hi = params.coord_range
    per_object = max(1, math.ceil(params.keyword_ratio * params.keywords_per_topic))
    objects = []
    for i in range(params.object_count):
        x = float(rng.uniform(lo, hi))
        y = float(rng.uniform(lo, hi))
        topic = topics[int(rng.integers(params.topic_count))]
        picks = rng.choice(len(topic), size=min(per_object, len(topic)), replace=False)
        keywords = frozenset(topic[p] for p in sorted(picks))
        attrs = np.clip(rng.normal(params.attr_mean, params.attr_std, params.attr_dim),
                        0.0, 1.0)
        objects.append(GeoObject(id=f"o{i:06d}", location=(x, y), keywords=keywords,
                                 attributes=tuple(float(a) for a in attrs)))
    return SynthDataset(objects=objects, store=EmbeddingStore(vectors),
                        topics=topics, params=params)


# ---------------------------------------------------------------------------
# Index container: MAGIC, version, section table, CRC-32 per section
# ---------------------------------------------------------------------------

def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<H", len(raw)) + raw


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise IndexFormatError("truncated section payload")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def read_str(self) -> str:
        (n,) = self.unpack("<H")
        return self.take(n).decode("utf-8")


def _dump_dr_tree(tree: DrTree, out: bytearray) -> None:
    if tree.is_empty:
        out += struct.pack("<B", 0)
        return
    out += struct.pack("<B", 1)

    def dump_node(node: DrNode) -> None:
        kind = 1 if node.is_leaf else 0
        out.extend(struct.pack("<BH", kind, len(node.entries)))
        out.extend(struct.pack("<4d", node.mbr.min_x, node.mbr.min_y,
                               node.mbr.max_x, node.mbr.max_y))
        kb_bytes = node.kb.to_bytes()
        out.extend(struct.pack("<II", node.kb.universe_size, len(kb_bytes)))
        out.extend(kb_bytes)
        pts = node.sp.points
        dim = len(pts[0]) if pts else 0
        out.extend(struct.pack("<BHH", int(node.sp.compressed), len(pts), dim))
        for p in pts:
            out.extend(struct.pack(f"<{dim}d", *p))
        if node.is_leaf:
            for o in node.objects:
                out.extend(_pack_str(o.id))
        else:
            for child in node.children:
                dump_node(child)

    dump_node(tree.root)


def _load_dr_tree(r: _Reader, universe: list[str],
                  objects: dict[str, GeoObject]) -> DrTree:
    (flag,) = r.unpack("<B")
    if flag == 0:
        return DrTree(root=None, universe=list(universe), size=0, node_count=0)
    index = {k: i for i, k in enumerate(universe)}
    counts = {"nodes": 0, "objects": 0}
    bitmaps: dict[str, KeywordBitmap] = {}

    def load_node() -> DrNode:
        counts["nodes"] += 1
        kind, n_entries = r.unpack("<BH")
        mbr = Mbr(*r.unpack("<4d"))
        width, nbytes = r.unpack("<II")
        kb = KeywordBitmap.from_bytes(r.take(nbytes), width)
        compressed, n_pts, dim = r.unpack("<BHH")
        pts = tuple(r.unpack(f"<{dim}d") for _ in range(n_pts))
        sp = SkylineSet(points=pts, compressed=bool(compressed))
        if kind == 1:
            members = []
            for _ in range(n_entries):
                oid = r.read_str()
                if oid not in objects:
                    raise IndexFormatError(f"tree references unknown object {oid}")
                members.append(objects[oid])
            counts["objects"] += len(members)
            for o in members:
                from .bitmap import encode
                bitmaps[o.id] = encode(o.keywords, universe, index)
            return DrNode(mbr=mbr, kb=kb, sp=sp, objects=members)
        children = [load_node() for _ in range(n_entries)]
        return DrNode(mbr=mbr, kb=kb, sp=sp, children=children)

    root = load_node()
    return DrTree(root=root, universe=list(universe), size=counts["objects"],
                  node_count=counts["nodes"], object_bitmaps=bitmaps)


_LEAF_REASONS = ["diameter", "small"]


def _dump_qc(node, out: bytearray) -> None:
    if isinstance(node, QcLeaf):
        out += struct.pack("<B", 1)
        out += struct.pack("<I", node.leaf_id)
        out += struct.pack("<B", _LEAF_REASONS.index(node.leaf_reason))
        out += struct.pack("<I", len(node.universe))
        for k in node.universe:
            out += _pack_str(k)
        core = sorted(node.cluster.keywords)
        out += struct.pack("<I", len(core))
        for k in core:
            out += _pack_str(k)
        out += _pack_str(node.cluster.center)
        out += struct.pack("<d", node.cluster.diameter)
        _dump_dr_tree(node.tree, out)
    else:
        out += struct.pack("<B", 0)
        out += _pack_str(node.center)
        for child in node.children:
            _dump_qc(child, out)


def _load_qc(r: _Reader, objects: dict[str, GeoObject], leaves: list[QcLeaf]):
    (kind,) = r.unpack("<B")
    if kind == 0:
        center = r.read_str()
        children = [_load_qc(r, objects, leaves) for _ in range(4)]
        return QcInternal(center=center, children=children)
    (leaf_id,) = r.unpack("<I")
    (reason_code,) = r.unpack("<B")
    (n_universe,) = r.unpack("<I")
    universe = [r.read_str() for _ in range(n_universe)]
    (n_core,) = r.unpack("<I")
    core = frozenset(r.read_str() for _ in range(n_core))
    center = r.read_str()
    (diameter,) = r.unpack("<d")
    tree = _load_dr_tree(r, universe, objects)
    leaf = QcLeaf(leaf_id=leaf_id,
                  cluster=KeywordCluster(keywords=core, center=center,
                                         diameter=diameter),
                  universe=universe,
                  index_of={k: i for i, k in enumerate(universe)},
                  tree=tree,
                  leaf_reason=_LEAF_REASONS[reason_code])
    leaves.append(leaf)
    return leaf


def _write_sections(path, sections: list[bytes]) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HH", FORMAT_VERSION, len(sections)))
        for payload in sections:
            fh.write(struct.pack("<II", len(payload), zlib.crc32(payload)))
            fh.write(payload)


def _read_sections(path) -> list[bytes]:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise IndexFormatError("bad magic bytes; not an index file")
    version, count = struct.unpack_from("<HH", data, 4)
    if version != FORMAT_VERSION:
        raise IndexFormatError(f"unsupported format version {version}")
    pos = 8
    sections = []
    for _ in range(count):
        if pos + 8 > len(data):
            raise IndexFormatError("truncated section table")
        length, crc = struct.unpack_from("<II", data, pos)
        pos += 8
        payload = data[pos:pos + length]
        if len(payload) != length:
            raise IndexFormatError("truncated section payload")
        if zlib.crc32(payload) != crc:
            raise IndexFormatError("section checksum mismatch")
        pos += length
        sections.append(payload)
    return sections


def save_index(index: QdrIndex, path) -> None:
    meta = {
        "metric": {"delta": index.metric.params.delta},
        "cluster": {
            "tau_cluster": index.params.cluster.tau_cluster,
            "tau_dup": index.params.cluster.tau_dup,
            "kernel_sigma": index.params.cluster.kernel_sigma,
            "seed": index.params.cluster.seed,
            "max_iters": index.params.cluster.max_iters,
        },
        "fanout": index.params.fanout,
        "tau_merge": index.params.tau_merge,
        "default_d_max": index.default_d_max,
    }
    objects_payload = json.dumps([
        {"id": o.id, "x": o.location[0], "y": o.location[1],
         "keywords": sorted(o.keywords), "attrs": list(o.attributes)}
        for o in sorted(index.objects.values(), key=lambda o: o.id)
    ]).encode("utf-8")
    store = index.metric.store
    emb_payload = json.dumps({
        "dimension": store.dimension,
        "vectors": {w: [float(v) for v in store.vector(w)]
                    for w in store.known_words()},
    }).encode("utf-8")
    tree_payload = bytearray()
    _dump_qc(index.tree.root, tree_payload)
    _write_sections(path, [json.dumps(meta).encode("utf-8"), objects_payload,
                           emb_payload, bytes(tree_payload)])


def load_index(path) -> QdrIndex:
    sections = _read_sections(path)
    if len(sections) != 4:
        raise IndexFormatError(f"expected 4 sections, found {len(sections)}")
    meta = json.loads(sections[0])
    obj_records = json.loads(sections[1])
    emb = json.loads(sections[2])

    objects = {
        rec["id"]: GeoObject(id=rec["id"], location=(rec["x"], rec["y"]),
                             keywords=frozenset(rec["keywords"]),
                             attributes=tuple(rec["attrs"]))
        for rec in obj_records
    }
    store = (EmbeddingStore({w: np.asarray(v) for w, v in emb["vectors"].items()})
             if emb["vectors"] else EmbeddingStore(dimension=emb["dimension"]))
    metric = KeywordMetric(store=store, params=MetricParams(**meta["metric"]))
    params = BuildParams(cluster=ClusterParams(**meta["cluster"]),
                         metric=metric.params,
                         fanout=meta["fanout"], tau_merge=meta["tau_merge"])

    leaves: list[QcLeaf] = []
    root = _load_qc(_Reader(sections[3]), objects, leaves)
    leaves.sort(key=lambda l: l.leaf_id)
    tree = QcTree(root=root, leaves=leaves)
    return QdrIndex(tree=tree, metric=metric, objects=objects, params=params,
                    default_d_max=meta["default_d_max"])
