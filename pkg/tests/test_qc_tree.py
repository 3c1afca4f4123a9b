import pytest

from qdrtree.clustering import ClusterParams, build_cluster_hierarchy
from qdrtree.data_io import SynthParams, generate_synthetic
from qdrtree.keyword_metric import KeywordMetric
from qdrtree.model import GeoObject, Query
from qdrtree.qc_tree import QcInternal, QcLeaf, build_qc_tree, find_leaf_cluster


@pytest.fixture(scope="module")
def two_topic_setup():
    ds = generate_synthetic(SynthParams(object_count=120, topic_count=2,
                                        keywords_per_topic=10, seed=13))
    metric = KeywordMetric(store=ds.store)
    universe = sorted({k for o in ds.objects for k in o.keywords})
    hierarchy = build_cluster_hierarchy(universe, ClusterParams(seed=13), metric)
    tree = build_qc_tree(hierarchy, ds.objects, metric)
    return ds, metric, tree


def query_for(keywords, dim=4):
    return Query(location=(0.0, 0.0), keywords=frozenset(keywords),
                 weights=(1.0 / dim,) * dim, d_max=100.0)


class TestBuild:
    def test_single_leaf_holds_everything(self):
        ds = generate_synthetic(SynthParams(object_count=40, topic_count=2,
                                            keywords_per_topic=8, seed=3))
        metric = KeywordMetric(store=ds.store)
        universe = sorted({k for o in ds.objects for k in o.keywords})
        hierarchy = build_cluster_hierarchy(
            universe, ClusterParams(tau_cluster=10.0, seed=3), metric)
        tree = build_qc_tree(hierarchy, ds.objects, metric)
        assert len(tree.leaves) == 1
        assert tree.leaves[0].tree.size == len(ds.objects)

    def test_multi_membership_consistency(self, two_topic_setup):
        ds, _, tree = two_topic_setup
        indexed = {leaf.leaf_id: {o.id for o in leaf.tree.iter_objects()}
                   for leaf in tree.leaves}
        for o in ds.objects:
            for leaf in tree.leaves:
                should = bool(o.keywords & set(leaf.universe))
                assert (o.id in indexed[leaf.leaf_id]) == should

    def test_internal_nodes_have_four_children(self, two_topic_setup):
        _, _, tree = two_topic_setup

        def walk(node):
            if isinstance(node, QcInternal):
                assert len(node.children) == 4
                for c in node.children:
                    walk(c)

        walk(tree.root)

    def test_leaf_universe_is_sorted(self, two_topic_setup):
        _, _, tree = two_topic_setup
        for leaf in tree.leaves:
            assert leaf.universe == sorted(leaf.universe)
            assert leaf.index_of == {k: i for i, k in enumerate(leaf.universe)}

    def test_uncovered_object_rejected(self, metric):
        hierarchy = build_cluster_hierarchy(["aa", "ab"], ClusterParams(), metric)
        stranger = GeoObject(id="x", location=(0.0, 0.0),
                             keywords=frozenset({"zzzz"}), attributes=(0.5,))
        with pytest.raises(ValueError):
            build_qc_tree(hierarchy, [stranger], metric)


class TestFindLeafCluster:
    def test_single_leaf_tree(self):
        ds = generate_synthetic(SynthParams(object_count=30, topic_count=2,
                                            keywords_per_topic=8, seed=3))
        metric = KeywordMetric(store=ds.store)
        universe = sorted({k for o in ds.objects for k in o.keywords})
        hierarchy = build_cluster_hierarchy(
            universe, ClusterParams(tau_cluster=10.0, seed=3), metric)
        tree = build_qc_tree(hierarchy, ds.objects, metric)
        located = find_leaf_cluster(query_for({"anything"}), tree, metric)
        assert located == tree.leaves

    def test_single_keyword_locates_single_leaf(self, two_topic_setup):
        ds, metric, tree = two_topic_setup
        universe = {k for o in ds.objects for k in o.keywords}
        for k in sorted(universe):
            located = find_leaf_cluster(query_for({k}), tree, metric)
            assert len(located) == 1

    def test_cross_topic_keywords_split_leaves(self, two_topic_setup):
        ds, metric, tree = two_topic_setup
        if len(tree.leaves) == 1:
            pytest.skip("degenerate clustering")
        located = find_leaf_cluster(
            query_for({ds.topics[0][0], ds.topics[1][0]}), tree, metric)
        assert 1 <= len(located) <= 2

    def test_located_bounded_by_query_keywords(self, two_topic_setup):
        ds, metric, tree = two_topic_setup
        q = query_for({ds.topics[0][0], ds.topics[0][3], ds.topics[1][5]})
        located = find_leaf_cluster(q, tree, metric)
        assert 1 <= len(located) <= len(q.keywords)

    def test_routing_soundness(self, two_topic_setup):
        """Every descent step picks a child at least as close as its siblings."""
        ds, metric, tree = two_topic_setup
        from qdrtree.qc_tree import _center_of

        for k in [ds.topics[0][2], ds.topics[1][7], "unrelatedword"]:
            node = tree.root
            while isinstance(node, QcInternal):
                chosen = min(node.children,
                             key=lambda c: (metric.distance(k, _center_of(c)),
                                            _center_of(c)))
                d_chosen = metric.distance(k, _center_of(chosen))
                assert all(d_chosen <= metric.distance(k, _center_of(c))
                           for c in node.children)
                node = chosen
            assert isinstance(node, QcLeaf)
