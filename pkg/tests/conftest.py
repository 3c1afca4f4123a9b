import pytest

from qdrtree.clustering import ClusterParams
from qdrtree.data_io import SynthParams, generate_synthetic
from qdrtree.index import BuildParams, build_index
from qdrtree.keyword_metric import KeywordMetric


@pytest.fixture
def metric():
    return KeywordMetric()


@pytest.fixture(scope="session")
def small_dataset():
    return generate_synthetic(SynthParams(object_count=300, topic_count=4, seed=11))


@pytest.fixture(scope="session")
def small_index(small_dataset):
    return build_index(small_dataset.objects, small_dataset.store,
                       BuildParams(cluster=ClusterParams(seed=11)))


class TableMetric(KeywordMetric):
    """Metric backed by an explicit pairwise distance table (tests only)."""

    def __init__(self, table):
        super().__init__()
        self.table = {}
        for (a, b), d in table.items():
            self.table[(a, b)] = d
            self.table[(b, a)] = d

    def distance(self, k1, k2):
        if k1 == k2:
            return 0.0
        return self.table[(k1, k2)]
