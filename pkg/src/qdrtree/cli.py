"""Command-line surface: synth, build, query, bench, stats.

Every parameter can come from a JSON config file (--config); explicit flags win.
Exit codes: 0 ok, 1 failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as bench_mod
from .clustering import ClusterParams
from .data_io import (EmbeddingStore, IndexFormatError, IngestError, SynthParams,
                      generate_synthetic, load_index, load_objects, save_index,
                      write_objects)
from .index import BuildParams, build_index
from .keyword_metric import MetricParams
from .model import Query

OK, FAILURE, USAGE = 0, 1, 2


def _merge_config(args: argparse.Namespace, defaults: dict) -> dict:
    """Resolution order: flag > config file > built-in default."""
    cfg = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    merged = {}
    for key, fallback in defaults.items():
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
        elif key in cfg:
            merged[key] = cfg[key]
        else:
            merged[key] = fallback
    return merged


def _add_config_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file supplying defaults for any flag")


def cmd_synth(args) -> int:
    opts = _merge_config(args, {
        "objects": 1000, "topics": 6, "keywords_per_topic": 25,
        "keyword_ratio": 0.12, "attr_dim": 4, "seed": 0,
    })
    params = SynthParams(object_count=opts["objects"], topic_count=opts["topics"],
                         keywords_per_topic=opts["keywords_per_topic"],
                         keyword_ratio=opts["keyword_ratio"],
                         attr_dim=opts["attr_dim"], seed=opts["seed"])
    dataset = generate_synthetic(params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_objects(dataset.objects, out / "objects.jsonl")
    dataset.store.save(out / "embeddings.txt")
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump({"objects": params.object_count, "attr_dim": params.attr_dim,
                   "topics": params.topic_count, "seed": params.seed,
                   "directions": ["lower"] * params.attr_dim}, fh, indent=2)
    print(f"wrote {len(dataset.objects)} objects, "
          f"{sum(len(t) for t in dataset.topics)} keywords -> {out}")
    return OK


def cmd_build(args) -> int:
    opts = _merge_config(args, {
        "tau_cluster": 0.3, "tau_dup": 0.05, "tau_relax": 0.3, "fanout": 25,
        "tau_merge": 0.99, "delta": 0.5, "kernel_sigma": 0.5, "seed": 0,
        "single_leaf": False, "embeddings": None, "directions": None,
    })
    try:
        objects, manifest = load_objects(args.dataset, directions=opts["directions"])
    except (IngestError, OSError) as exc:
        print(f"ingest failed: {exc}", file=sys.stderr)
        return FAILURE
    store = EmbeddingStore.load(opts["embeddings"]) if opts["embeddings"] else None
    tau_cluster = 10.0 if opts["single_leaf"] else opts["tau_cluster"]
    params = BuildParams(
        cluster=ClusterParams(tau_cluster=tau_cluster, tau_dup=opts["tau_dup"],
                              kernel_sigma=opts["kernel_sigma"], seed=opts["seed"]),
        metric=MetricParams(delta=opts["delta"]),
        fanout=opts["fanout"], tau_merge=opts["tau_merge"])
    try:
        index = build_index(objects, store, params)
        save_index(index, args.out)
    except (ValueError, OSError) as exc:
        print(f"build failed: {exc}", file=sys.stderr)
        return FAILURE
    size = Path(args.out).stat().st_size
    print(f"objects            {manifest.object_count}")
    print(f"keyword_universe   {manifest.keyword_universe_size}")
    print(f"leaf_clusters      {index.leaf_count}")
    print(f"dr_nodes           {index.dr_node_count}")
    print(f"duplication_ratio  {index.duplication_ratio:.4f}")
    print(f"build_seconds      {index.build_seconds:.3f}")
    print(f"index_bytes        {size}")
    return OK


def cmd_query(args) -> int:
    opts = _merge_config(args, {
        "kappa": 10, "alpha": 0.5, "beta": 0.67, "tau_relax": 0.3, "d_max": None,
        "weights": None,
    })
    try:
        index = load_index(args.index)
    except (IndexFormatError, OSError) as exc:
        print(f"cannot load index: {exc}", file=sys.stderr)
        return FAILURE
    dim = len(next(iter(index.objects.values())).attributes)
    weights = opts["weights"] or [1.0 / dim] * dim
    try:
        x, y = (float(v) for v in args.at.split(","))
        keywords = frozenset(k.strip().lower() for k in args.keywords.split(",")
                             if k.strip())
        q = Query(location=(x, y), keywords=keywords, weights=tuple(weights),
                  kappa=opts["kappa"], d_max=opts["d_max"], alpha=opts["alpha"],
                  beta=opts["beta"], tau_relax=opts["tau_relax"])
    except ValueError as exc:
        print(f"malformed query spec: {exc}", file=sys.stderr)
        return USAGE
    results, stats = index.search(q)
    q = q.resolved(index.default_d_max)
    print("rank\tid\tscore\tdistance\tphi\tattr_term")
    from .model import euclidean_distance
    for rank, r in enumerate(results, start=1):
        o = index.objects[r.object_id]
        dist = euclidean_distance(q.location, o.location)
        attr = sum(w * a for w, a in zip(q.weights, o.attributes))
        spatial = q.alpha * q.beta * dist / q.d_max
        attr_term = (1.0 - q.alpha) * q.beta * attr
        keyword_term = r.score - spatial - attr_term
        phi = (1.0 - q.beta) / keyword_term if keyword_term > 0 else float("inf")
        print(f"{rank}\t{r.object_id}\t{r.score:.9f}\t{dist:.3f}"
              f"\t{phi:.2f}\t{attr:.4f}")
    print(f"# node_accesses={stats.node_accesses} objects_scored={stats.objects_scored}"
          f" leaves_searched={stats.leaves_searched} elapsed_ms={stats.elapsed*1000:.2f}")
    return OK


def cmd_bench(args) -> int:
    try:
        cfg = (bench_mod.BenchConfig.from_file(args.config) if args.config
               else bench_mod.BenchConfig())
    except (ValueError, OSError) as exc:
        print(f"bad bench config: {exc}", file=sys.stderr)
        return USAGE
    report = bench_mod.run_bench(cfg)
    table = bench_mod.write_report(report, args.out, plots=not args.no_plots)
    print(f"report written to {table}")
    if not report.ok:
        print(f"AGREEMENT FAILURES: {len(report.failures)}", file=sys.stderr)
        for msg in report.failures[:10]:
            print(msg, file=sys.stderr)
        return FAILURE
    print("all engines agree with the linear-scan ground truth")
    return OK


def cmd_stats(args) -> int:
    try:
        index = load_index(args.index)
    except (IndexFormatError, OSError) as exc:
        print(f"cannot load index: {exc}", file=sys.stderr)
        return FAILURE
    print(f"objects            {len(index.objects)}")
    print(f"keyword_universe   {len(index.universe)}")
    print(f"leaf_clusters      {index.leaf_count}")
    print(f"indexed_slots      {index.indexed_object_slots}")
    print(f"dr_nodes           {index.dr_node_count}")
    print(f"duplication_ratio  {index.duplication_ratio:.4f}")
    print(f"default_d_max      {index.default_d_max:.3f}")
    for leaf in index.tree.leaves:
        print(f"leaf {leaf.leaf_id}: universe={len(leaf.universe)} "
              f"objects={leaf.tree.size} nodes={leaf.tree.node_count} "
              f"reason={leaf.leaf_reason}")
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdrtree",
        description="Attribute-aware top-k spatial keyword search over a "
                    "keyword-cluster / dual-filtering R-tree index")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--objects", type=int)
    p.add_argument("--topics", type=int)
    p.add_argument("--keywords-per-topic", dest="keywords_per_topic", type=int)
    p.add_argument("--keyword-ratio", dest="keyword_ratio", type=float)
    p.add_argument("--attr-dim", dest="attr_dim", type=int)
    p.add_argument("--seed", type=int)
    _add_config_flag(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("build", help="build and persist an index")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--tau-cluster", dest="tau_cluster", type=float)
    p.add_argument("--tau-dup", dest="tau_dup", type=float)
    p.add_argument("--tau-merge", dest="tau_merge", type=float)
    p.add_argument("--fanout", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--kernel-sigma", dest="kernel_sigma", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--single-leaf", dest="single_leaf", action="store_const",
                   const=True)
    _add_config_flag(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="run one query against a saved index")
    p.add_argument("--index", required=True)
    p.add_argument("--at", required=True, help="x,y query location")
    p.add_argument("--keywords", required=True, help="comma-separated keywords")
    p.add_argument("--weights", type=lambda s: [float(v) for v in s.split(",")])
    p.add_argument("--kappa", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--d-max", dest="d_max", type=float)
    p.add_argument("--tau-relax", dest="tau_relax", type=float)
    _add_config_flag(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="run benchmark sweeps and write a report")
    p.add_argument("--config", help="JSON bench configuration")
    p.add_argument("--out", required=True, help="report directory")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stats", help="introspect a saved index")
    p.add_argument("--index", required=True)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
