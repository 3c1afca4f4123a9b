import json

import pytest

from qdrtree.bench import (BenchConfig, make_queries, run_bench, write_report)
from qdrtree.data_io import SynthParams, generate_synthetic


@pytest.fixture(scope="module")
def tiny_report():
    cfg = BenchConfig(
        dataset={"source": "synthetic", "objects": 150, "topics": 3,
                 "keywords_per_topic": 10},
        sweeps={"kappa": [5, 10]},
        queries=8, seed=3)
    return run_bench(cfg)


class TestConfig:
    def test_defaults_valid(self):
        cfg = BenchConfig()
        assert cfg.kappa == 10 and "qdr" in cfg.engines

    def test_unknown_engine_rejected(self):
        with pytest.raises(ValueError, match="unknown engines"):
            BenchConfig(engines=("qdr", "oracle9000"))

    def test_unknown_axis_rejected(self):
        with pytest.raises(ValueError, match="unknown sweep axes"):
            BenchConfig(sweeps={"zeta": [1]})

    def test_from_dict_round_trip(self):
        cfg = BenchConfig.from_dict({"queries": 12, "kappa": 3,
                                     "engines": ["qdr", "linear"]})
        assert cfg.queries == 12 and cfg.kappa == 3
        assert cfg.engines == ("qdr", "linear")

    def test_from_dict_unknown_key(self):
        with pytest.raises(ValueError, match="unknown bench config key"):
            BenchConfig.from_dict({"speed": "max"})

    def test_from_file(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"queries": 4, "sweeps": {"kappa": [2]}}),
                     encoding="utf-8")
        cfg = BenchConfig.from_file(p)
        assert cfg.queries == 4 and cfg.sweeps == {"kappa": [2]}


class TestMakeQueries:
    def test_deterministic_and_in_bounds(self):
        ds = generate_synthetic(SynthParams(object_count=60, seed=2))
        a = make_queries(ds.objects, 10, 5, 7, 0.3)
        b = make_queries(ds.objects, 10, 5, 7, 0.3)
        assert a == b
        universe = {k for o in ds.objects for k in o.keywords}
        xs = [o.location[0] for o in ds.objects]
        ys = [o.location[1] for o in ds.objects]
        for q in a:
            assert q.kappa == 7 and q.tau_relax == 0.3
            assert 1 <= len(q.keywords) <= 3 and q.keywords <= universe
            assert min(xs) <= q.location[0] <= max(xs)
            assert min(ys) <= q.location[1] <= max(ys)
            assert q.d_max is not None


class TestRunBench:
    def test_all_engines_agree(self, tiny_report):
        assert tiny_report.ok, tiny_report.failures
        assert all(r.agreement_failures == 0 for r in tiny_report.rows)

    def test_row_grid_complete(self, tiny_report):
        cells = {(r.axis, r.value, r.engine) for r in tiny_report.rows}
        assert cells == {("kappa", v, e) for v in (5, 10)
                         for e in ("qdr", "linear", "per_keyword",
                                   "keyword_only")}
        assert all(r.queries == 8 for r in tiny_report.rows)

    def test_node_totals_recorded(self, tiny_report):
        assert set(tiny_report.qdr_total_nodes) == {"kappa=5", "kappa=10"}
        assert all(v > 0 for v in tiny_report.qdr_total_nodes.values())


class TestWriteReport:
    def test_files_written(self, tiny_report, tmp_path):
        table = write_report(tiny_report, tmp_path, plots=True)
        assert table == tmp_path / "report.tsv"
        lines = table.read_text(encoding="utf-8").splitlines()
        assert lines[0].split("\t")[:3] == ["axis", "value", "engine"]
        assert len(lines) == 1 + len(tiny_report.rows)

        summary = (tmp_path / "summary.txt").read_text(encoding="utf-8")
        assert "[config]" in summary and "status = PASS" in summary

        figures = sorted(p.name for p in tmp_path.glob("*.png"))
        assert figures == ["kappa_median_ms.png",
                           "kappa_median_node_accesses.png"]
        for p in tmp_path.glob("*.png"):
            assert p.stat().st_size > 0
            assert p.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_no_plots(self, tiny_report, tmp_path):
        write_report(tiny_report, tmp_path, plots=False)
        assert list(tmp_path.glob("*.png")) == []
        assert (tmp_path / "report.tsv").exists()
