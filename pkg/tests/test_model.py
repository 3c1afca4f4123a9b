import math

import pytest
from hypothesis import given, strategies as st

from qdrtree.model import (GeoObject, Mbr, Query, ScoredResult,
                           euclidean_distance, min_dist, score_object)


def make_obj(oid="o1", loc=(0.0, 0.0), kws=("pizza",), attrs=(0.5, 0.5)):
    return GeoObject(id=oid, location=loc, keywords=frozenset(kws),
                     attributes=tuple(attrs))


def make_query(loc=(0.0, 0.0), kws=("pizza",), weights=(0.5, 0.5), **kw):
    kw.setdefault("d_max", 10.0)
    return Query(location=loc, keywords=frozenset(kws), weights=weights, **kw)


class TestEuclideanDistance:
    def test_identity(self):
        assert euclidean_distance((0, 0), (0, 0)) == 0

    def test_345_triangle(self):
        assert euclidean_distance((0, 0), (3, 4)) == 5

    def test_offset_345(self):
        # sqrt((4.5-1.5)^2 + (6.5-2.5)^2) = sqrt(9+16)
        assert euclidean_distance((1.5, 2.5), (4.5, 6.5)) == pytest.approx(5.0)

    def test_symmetric(self):
        assert euclidean_distance((1, 2), (7, -3)) == euclidean_distance((7, -3), (1, 2))


class TestScoreObject:
    def test_forced_arithmetic(self):
        # alpha=0.5, beta=0.67, psi/d_max=0.5, phi=2, weighted attrs=0.4
        q = make_query(loc=(0, 0), weights=(1.0, 0.0), d_max=10.0,
                       alpha=0.5, beta=0.67)
        o = make_obj(loc=(5.0, 0.0), attrs=(0.4, 0.9))
        assert score_object(q, o, phi=2) == pytest.approx(0.4665, abs=1e-12)

    def test_zero_phi_is_infinite(self):
        q = make_query()
        o = make_obj()
        assert score_object(q, o, phi=0) == math.inf

    def test_all_nonspatial_terms_vanish(self):
        q = make_query(loc=(3.0, 4.0), alpha=1.0, beta=1.0)
        o = make_obj(loc=(3.0, 4.0), attrs=(0.9, 0.9))
        assert score_object(q, o, phi=5) == 0.0

    def test_dimension_mismatch_rejected(self):
        q = make_query(weights=(1.0,))
        o = make_obj(attrs=(0.1, 0.2))
        with pytest.raises(ValueError):
            score_object(q, o, phi=1)

    def test_scale_coherence(self):
        q1 = make_query(loc=(10.0, 20.0), d_max=50.0)
        o1 = make_obj(loc=(40.0, 60.0), attrs=(0.3, 0.7))
        k = 37.5
        q2 = make_query(loc=(10.0 * k, 20.0 * k), d_max=50.0 * k)
        o2 = make_obj(loc=(40.0 * k, 60.0 * k), attrs=(0.3, 0.7))
        assert score_object(q1, o1, 3) == pytest.approx(score_object(q2, o2, 3),
                                                        abs=1e-9)

    @given(st.floats(0.1, 100), st.floats(0.1, 100))
    def test_monotone_in_distance(self, d1, d2):
        near, far = sorted([d1, d2])
        q = make_query(d_max=10.0)
        o_near = make_obj(loc=(near, 0.0))
        o_far = make_obj(loc=(far, 0.0))
        assert score_object(q, o_near, 2) <= score_object(q, o_far, 2)

    @given(st.integers(1, 50), st.integers(1, 50))
    def test_monotone_in_phi(self, p1, p2):
        lo, hi = sorted([p1, p2])
        q = make_query()
        o = make_obj()
        assert score_object(q, o, hi) <= score_object(q, o, lo)

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_monotone_in_attributes(self, a1, a2):
        lo, hi = sorted([a1, a2])
        q = make_query()
        assert (score_object(q, make_obj(attrs=(lo, 0.5)), 2)
                <= score_object(q, make_obj(attrs=(hi, 0.5)), 2))


class TestValidation:
    def test_attributes_outside_unit_interval(self):
        with pytest.raises(ValueError):
            make_obj(attrs=(1.5, 0.0))

    def test_empty_keywords(self):
        with pytest.raises(ValueError):
            make_obj(kws=())

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            make_query(weights=(0.5, 0.6))

    def test_negative_weight(self):
        with pytest.raises(ValueError):
            make_query(weights=(1.5, -0.5))

    def test_nonpositive_d_max(self):
        with pytest.raises(ValueError):
            make_query(d_max=0.0)

    def test_results_sort_by_score_then_id(self):
        rs = sorted([ScoredResult(0.5, "b"), ScoredResult(0.5, "a"),
                     ScoredResult(0.1, "z")])
        assert [r.object_id for r in rs] == ["z", "a", "b"]


class TestMinDist:
    BOX = Mbr(0.0, 0.0, 10.0, 10.0)

    def test_inside_is_zero(self):
        assert min_dist((5.0, 5.0), self.BOX) == 0.0

    def test_axis_aligned_gap(self):
        assert min_dist((-4.0, 5.0), self.BOX) == 4.0

    def test_corner_offset(self):
        assert min_dist((13.0, 14.0), self.BOX) == 5.0

    def test_inverted_mbr_rejected(self):
        with pytest.raises(ValueError):
            Mbr(1.0, 0.0, 0.0, 1.0)
