"""Benchmark harness: sweep parameters, run query batches on every engine,
verify agreement against the linear-scan ground truth, and emit a report."""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import baselines
from .baselines import (build_keyword_only_index, build_per_keyword_index,
                        keyword_only_search, linear_scan, per_keyword_rtree_search,
                        scoped_linear_scan)
from .clustering import ClusterParams
from .data_io import SynthParams, generate_synthetic, load_objects
from .index import BuildParams, QdrIndex, bounding_diagonal, build_index
from .keyword_metric import EmbeddingStore, KeywordMetric, MetricParams
from .model import Query, ScoredResult
from .qc_tree import find_leaf_cluster
from .query_engine import SearchStats

ENGINES = ("qdr", "linear", "per_keyword", "keyword_only")
SWEEP_AXES = ("kappa", "objects", "attr_dim", "tau_cluster", "tau_dup")

SCORE_TOL = 1e-9


@dataclass
class BenchConfig:
    engines: tuple[str, ...] = ENGINES
    dataset: dict = field(default_factory=lambda: {"source": "synthetic"})
    sweeps: dict = field(default_factory=lambda: {"kappa": [10, 20, 30, 40, 50]})
    queries: int = 100
    seed: int = 7
    kappa: int = 10
    tau_cluster: float = 0.3
    tau_dup: float = 0.05
    tau_relax: float = 0.3
    fanout: int = 25
    single_leaf: bool = False

    def __post_init__(self):
        unknown = set(self.engines) - set(ENGINES)
        if unknown:
            raise ValueError(f"unknown engines: {sorted(unknown)}")
        bad_axes = set(self.sweeps) - set(SWEEP_AXES)
        if bad_axes:
            raise ValueError(f"unknown sweep axes: {sorted(bad_axes)}")

    @classmethod
    def from_file(cls, path) -> "BenchConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "BenchConfig":
        cfg = cls()
        for key, value in raw.items():
            if not hasattr(cfg, key):
                raise ValueError(f"unknown bench config key: {key}")
            if key == "engines":
                value = tuple(value)
            setattr(cfg, key, value)
        cfg.__post_init__()
        return cfg


@dataclass
class BenchRow:
    axis: str
    value: float
    engine: str
    queries: int
    median_ms: float
    median_node_accesses: float
    median_objects_scored: float
    agreement_failures: int


@dataclass
class BenchReport:
    config: BenchConfig
    rows: list[BenchRow]
    failures: list[str]
    qdr_total_nodes: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def _build_dataset(cfg: BenchConfig, objects_override=None, attr_dim_override=None):
    ds = dict(cfg.dataset)
    source = ds.pop("source", "synthetic")
    if source == "synthetic":
        params = SynthParams(
            object_count=objects_override or ds.get("objects", 10000),
            topic_count=ds.get("topics", 6),
            keywords_per_topic=ds.get("keywords_per_topic", 25),
            keyword_ratio=ds.get("keyword_ratio", 0.12),
            attr_dim=attr_dim_override or ds.get("attr_dim", 4),
            seed=ds.get("seed", cfg.seed),
        )
        synth = generate_synthetic(params)
        return synth.objects, synth.store
    if source == "file":
        objects, _ = load_objects(ds["objects_path"],
                                  directions=ds.get("directions"))
        store = (EmbeddingStore.load(ds["embeddings_path"])
                 if ds.get("embeddings_path") else None)
        return objects, store
    raise ValueError(f"unknown dataset source: {source}")


def _build_params(cfg: BenchConfig, tau_cluster=None, tau_dup=None) -> BuildParams:
    tau_c = tau_cluster if tau_cluster is not None else cfg.tau_cluster
    if cfg.single_leaf:
        tau_c = 10.0  # keyword distances top out at 1, so the root stays a leaf
    return BuildParams(
        cluster=ClusterParams(tau_cluster=tau_c,
                              tau_dup=tau_dup if tau_dup is not None else cfg.tau_dup,
                              seed=cfg.seed),
        fanout=cfg.fanout)


def make_queries(objects, count: int, seed: int, kappa: int,
                 tau_relax: float) -> list[Query]:
    """Deterministic random query batch drawn from the dataset's own pool."""
    rng = np.random.default_rng(seed)
    universe = baselines.dataset_universe(objects)
    dim = len(objects[0].attributes)
    xs = [o.location[0] for o in objects]
    ys = [o.location[1] for o in objects]
    d_max = bounding_diagonal(objects)
    queries = []
    for _ in range(count):
        x = float(rng.uniform(min(xs), max(xs)))
        y = float(rng.uniform(min(ys), max(ys)))
        n_kw = int(rng.integers(1, 4))
        picks = rng.choice(len(universe), size=min(n_kw, len(universe)),
                           replace=False)
        keywords = frozenset(universe[p] for p in sorted(picks))
        weights = tuple([1.0 / dim] * dim)
        queries.append(Query(location=(x, y), keywords=keywords, weights=weights,
                             kappa=kappa, d_max=d_max, tau_relax=tau_relax))
    return queries


def _results_match(a: list[ScoredResult], b: list[ScoredResult]) -> bool:
    if len(a) != len(b):
        return False
    return all(x.object_id == y.object_id and abs(x.score - y.score) <= SCORE_TOL
               for x, y in zip(a, b))


def _describe_query(q: Query) -> str:
    return json.dumps({
        "location": list(q.location), "keywords": sorted(q.keywords),
        "weights": list(q.weights), "kappa": q.kappa, "d_max": q.d_max,
        "alpha": q.alpha, "beta": q.beta, "tau_relax": q.tau_relax,
    })


@dataclass
class _EngineSet:
    qdr: QdrIndex | None = None
    per_keyword: object = None
    keyword_only: object = None
    metric: KeywordMetric | None = None
    objects: list = None


def _prepare_engines(cfg: BenchConfig, objects, store, params: BuildParams
                     ) -> _EngineSet:
    es = _EngineSet(objects=objects)
    es.qdr = build_index(objects, store, params) if "qdr" in cfg.engines else None
    metric = es.qdr.metric if es.qdr else KeywordMetric(store=store)
    es.metric = metric
    if "per_keyword" in cfg.engines:
        es.per_keyword = build_per_keyword_index(objects, cfg.fanout)
    if "keyword_only" in cfg.engines:
        es.keyword_only = build_keyword_only_index(objects, cfg.fanout)
    return es


def _run_cell(cfg: BenchConfig, engine: str, es: _EngineSet, queries,
              axis: str, value, failures: list[str]) -> BenchRow:
    times, accesses, scored = [], [], []
    n_failed = 0
    for q in queries:
        if engine == "qdr":
            results, stats = es.qdr.search(q)
            located = find_leaf_cluster(q, es.qdr.tree, es.metric)
            expected = scoped_linear_scan(q, located, es.metric)
        elif engine == "linear":
            t0 = time.perf_counter()
            results = linear_scan(q, es.objects, es.metric)
            stats = SearchStats(objects_scored=len(es.objects),
                                elapsed=time.perf_counter() - t0)
            expected = results
        elif engine == "per_keyword":
            results, stats = per_keyword_rtree_search(q, es.per_keyword, es.metric)
            expected = linear_scan(q, es.objects, es.metric)
        elif engine == "keyword_only":
            results, stats = keyword_only_search(q, es.keyword_only, es.metric)
            expected = linear_scan(q, es.objects, es.metric)
        else:
            raise ValueError(engine)
        if not _results_match(results, expected):
            n_failed += 1
            failures.append(
                f"{axis}={value} engine={engine} disagreed with linear scan "
                f"on query {_describe_query(q)}")
        times.append(stats.elapsed * 1000.0)
        accesses.append(stats.node_accesses)
        scored.append(stats.objects_scored)
    return BenchRow(axis=axis, value=value, engine=engine, queries=len(queries),
                    median_ms=statistics.median(times),
                    median_node_accesses=statistics.median(accesses),
                    median_objects_scored=statistics.median(scored),
                    agreement_failures=n_failed)


def run_bench(cfg: BenchConfig) -> BenchReport:
    rows: list[BenchRow] = []
    failures: list[str] = []
    report = BenchReport(config=cfg, rows=rows, failures=failures)

    base_objects, base_store = _build_dataset(cfg)

    for axis, values in cfg.sweeps.items():
        for value in values:
            objects, store = base_objects, base_store
            kappa = cfg.kappa
            tau_cluster = tau_dup = None
            if axis == "kappa":
                kappa = int(value)
            elif axis == "objects":
                objects, store = _build_dataset(cfg, objects_override=int(value))
            elif axis == "attr_dim":
                objects, store = _build_dataset(cfg, attr_dim_override=int(value))
            elif axis == "tau_cluster":
                tau_cluster = float(value)
            elif axis == "tau_dup":
                tau_dup = float(value)
            params = _build_params(cfg, tau_cluster=tau_cluster, tau_dup=tau_dup)
            es = _prepare_engines(cfg, objects, store, params)
            if es.qdr is not None:
                report.qdr_total_nodes[f"{axis}={value}"] = es.qdr.dr_node_count
            queries = make_queries(objects, cfg.queries, cfg.seed, kappa,
                                   cfg.tau_relax)
            for engine in cfg.engines:
                rows.append(_run_cell(cfg, engine, es, queries, axis, value,
                                      failures))
    return report


def write_report(report: BenchReport, out_dir, plots: bool = True) -> Path:
    """Write the tab-separated table, the summary block, and (optionally) the
    trend figures. Returns the table path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table_path = out_dir / "report.tsv"
    columns = ["axis", "value", "engine", "queries", "median_ms",
               "median_node_accesses", "median_objects_scored",
               "agreement_failures"]
    with open(table_path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(columns) + "\n")
        for row in report.rows:
            fh.write("\t".join(str(getattr(row, c)) for c in columns) + "\n")

    summary_path = out_dir / "summary.txt"
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write("[config]\n")
        for key, value in asdict(report.config).items():
            fh.write(f"{key} = {json.dumps(value)}\n")
        fh.write("\n[agreement]\n")
        fh.write(f"status = {'PASS' if report.ok else 'FAIL'}\n")
        fh.write(f"failed_queries = {len(report.failures)}\n")
        for msg in report.failures:
            fh.write(f"failure: {msg}\n")
        fh.write("\n[index]\n")
        for key, value in report.qdr_total_nodes.items():
            fh.write(f"qdr_dr_nodes[{key}] = {value}\n")

    if plots:
        from .plots import render_report_figures
        render_report_figures(report, out_dir)
    return table_path
