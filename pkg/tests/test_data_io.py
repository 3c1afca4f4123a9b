import json
import statistics

import pytest

from qdrtree.clustering import ClusterParams
from qdrtree.bench import make_queries
from qdrtree.data_io import (HIGHER_BETTER, LOWER_BETTER, IndexFormatError,
                             IngestError, SynthParams, generate_synthetic,
                             load_index, load_objects, normalize_attributes,
                             save_index, write_objects)
from qdrtree.index import BuildParams, build_index


class TestNormalize:
    def test_lower_better_passthrough(self):
        assert normalize_attributes([5.0], [0.0], [10.0],
                                    (LOWER_BETTER,)) == (0.5,)

    def test_higher_better_flips(self):
        # a perfect rating becomes the best (lowest) normalized cost
        assert normalize_attributes([1.0], [0.0], [1.0],
                                    (HIGHER_BETTER,)) == (0.0,)
        assert normalize_attributes([0.0], [0.0], [1.0],
                                    (HIGHER_BETTER,)) == (1.0,)

    def test_constant_dimension_is_zero(self):
        assert normalize_attributes([7.0], [7.0], [7.0],
                                    (LOWER_BETTER,)) == (0.0,)


class TestLoadObjects:
    def write(self, tmp_path, lines):
        p = tmp_path / "data.jsonl"
        p.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return p

    def test_three_record_hand_fixture(self, tmp_path):
        recs = [
            {"id": "a", "x": 0.0, "y": 0.0, "keywords": ["Pizza"],
             "attrs": [10.0, 1.0]},
            {"id": "b", "x": 1.0, "y": 1.0, "keywords": ["steak"],
             "attrs": [20.0, 5.0]},
            {"id": "c", "x": 2.0, "y": 2.0, "keywords": ["pizza", "steak"],
             "attrs": [30.0, 3.0]},
        ]
        path = self.write(tmp_path, [json.dumps(r) for r in recs])
        objs, manifest = load_objects(path, directions=(LOWER_BETTER,
                                                        HIGHER_BETTER))
        by_id = {o.id: o for o in objs}
        # first dim min-maxed over [10, 30]; second flipped over [1, 5]
        assert by_id["a"].attributes == (0.0, 1.0)
        assert by_id["b"].attributes == (0.5, 0.0)
        assert by_id["c"].attributes == (1.0, 0.5)
        assert by_id["a"].keywords == frozenset({"pizza"})  # lower-cased
        assert manifest.object_count == 3
        assert manifest.attribute_dimension == 2
        assert manifest.bounding_rect == (0.0, 0.0, 2.0, 2.0)
        assert manifest.keyword_universe_size == 2

    def test_per_line_error_report(self, tmp_path):
        path = self.write(tmp_path, [
            json.dumps({"id": "ok", "x": 0, "y": 0, "keywords": ["k"],
                        "attrs": [1]}),
            "not json at all",
            json.dumps({"id": "bad", "x": "NaN", "y": 0, "keywords": ["k"],
                        "attrs": [1]}),
            json.dumps({"id": "nokw", "x": 0, "y": 0, "keywords": [],
                        "attrs": [1]}),
        ])
        with pytest.raises(IngestError) as exc:
            load_objects(path)
        msgs = exc.value.problems
        assert len(msgs) == 3
        assert msgs[0].startswith("line 2:")
        assert msgs[1].startswith("line 3:")
        assert msgs[2].startswith("line 4:")

    def test_inconsistent_attr_dims(self, tmp_path):
        path = self.write(tmp_path, [
            json.dumps({"id": "a", "x": 0, "y": 0, "keywords": ["k"],
                        "attrs": [1, 2]}),
            json.dumps({"id": "b", "x": 0, "y": 0, "keywords": ["k"],
                        "attrs": [1]}),
        ])
        with pytest.raises(IngestError, match="inconsistent"):
            load_objects(path)

    def test_empty_file(self, tmp_path):
        path = self.write(tmp_path, [""])
        with pytest.raises(IngestError, match="empty"):
            load_objects(path)

    def test_write_then_read_round_trip(self, tmp_path):
        ds = generate_synthetic(SynthParams(object_count=50, seed=4))
        path = tmp_path / "out.jsonl"
        write_objects(ds.objects, path)
        objs, manifest = load_objects(path)
        assert manifest.object_count == 50
        got = {o.id: o for o in objs}
        for o in ds.objects:
            assert got[o.id].location == o.location
            assert got[o.id].keywords == o.keywords


class TestSynthetic:
    def test_deterministic(self):
        p = SynthParams(object_count=80, seed=9)
        a, b = generate_synthetic(p), generate_synthetic(p)
        assert [(o.id, o.location, o.keywords, o.attributes)
                for o in a.objects] == \
               [(o.id, o.location, o.keywords, o.attributes) for o in b.objects]
        for w in a.store.known_words():
            assert list(a.store.vector(w)) == list(b.store.vector(w))

    def test_shapes_and_ranges(self):
        p = SynthParams(object_count=500, topic_count=3, keywords_per_topic=10,
                        attr_dim=5, seed=1)
        ds = generate_synthetic(p)
        assert len(ds.objects) == 500
        assert len(ds.topics) == 3 and all(len(t) == 10 for t in ds.topics)
        universe = {k for t in ds.topics for k in t}
        for o in ds.objects:
            assert len(o.attributes) == 5
            assert all(0.0 <= a <= 1.0 for a in o.attributes)
            assert o.keywords <= universe
            x, y = o.location
            assert 0.0 <= x <= 10000.0 and 0.0 <= y <= 10000.0

    def test_attribute_mean_near_target(self):
        ds = generate_synthetic(SynthParams(object_count=2000, seed=6))
        vals = [a for o in ds.objects for a in o.attributes]
        assert abs(statistics.fmean(vals) - 0.5) < 0.02

    def test_bad_params_rejected(self):
        with pytest.raises(ValueError):
            SynthParams(keyword_ratio=0.0)
        with pytest.raises(ValueError):
            SynthParams(coord_range=(5.0, 5.0))
        with pytest.raises(ValueError):
            SynthParams(object_count=0)


@pytest.fixture(scope="module")
def saved(tmp_path_factory, small_dataset, small_index):
    path = tmp_path_factory.mktemp("idx") / "index.qdr"
    save_index(small_index, path)
    return path


class TestPersistence:
    def test_round_trip_identical_results(self, saved, small_dataset,
                                          small_index):
        loaded = load_index(saved)
        assert loaded.leaf_count == small_index.leaf_count
        assert loaded.dr_node_count == small_index.dr_node_count
        assert loaded.default_d_max == small_index.default_d_max
        for q in make_queries(small_dataset.objects, 15, 42, 10, 0.3):
            r1, s1 = small_index.search(q)
            r2, s2 = loaded.search(q)
            assert r1 == r2
            assert s1.node_accesses == s2.node_accesses

    def test_params_survive(self, saved, small_index):
        loaded = load_index(saved)
        assert loaded.params.cluster == small_index.params.cluster
        assert loaded.params.fanout == small_index.params.fanout
        assert loaded.params.tau_merge == small_index.params.tau_merge
        assert loaded.metric.params == small_index.metric.params

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "junk.qdr"
        p.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(IndexFormatError, match="magic"):
            load_index(p)

    def test_corrupted_byte_fails_checksum(self, saved, tmp_path):
        data = bytearray(saved.read_bytes())
        # flip one payload byte past the header and section table entry
        data[len(data) // 2] ^= 0xFF
        p = tmp_path / "corrupt.qdr"
        p.write_bytes(bytes(data))
        with pytest.raises(IndexFormatError, match="checksum|truncated"):
            load_index(p)

    def test_truncated_file(self, saved, tmp_path):
        data = saved.read_bytes()
        p = tmp_path / "trunc.qdr"
        p.write_bytes(data[: len(data) // 2])
        with pytest.raises(IndexFormatError):
            load_index(p)

    def test_empty_leaf_tree_survives(self, tmp_path):
        # a dataset where one clustered leaf can end up owning few objects
        ds = generate_synthetic(SynthParams(object_count=30, topic_count=2,
                                            keywords_per_topic=8, seed=12))
        idx = build_index(ds.objects, ds.store,
                          BuildParams(cluster=ClusterParams(seed=12)))
        path = tmp_path / "small.qdr"
        save_index(idx, path)
        loaded = load_index(path)
        q = make_queries(ds.objects, 1, 3, 5, 0.3)[0]
        assert loaded.search(q)[0] == idx.search(q)[0]
