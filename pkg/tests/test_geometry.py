import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import lp_in_hull
from covexplorer.core import DimensionMismatchError
from covexplorer.geometry import (BoxBound, ConvexRegion, EmptyDataError, box_bound,
                                  build_regions, contains, farthest_point_subsample, in_any,
                                  min_norm_point)

SQUARE = [[0, 0], [1, 0], [0, 1], [1, 1]]


def test_box_examples():
    b = box_bound([[0, 0], [1, 2]], margin=0)
    assert b.low.tolist() == [0, 0] and b.high.tolist() == [1, 2]
    single = box_bound([[3, 4]], margin=0)
    assert single.degenerate
    b = box_bound([[0, 0], [10, 10]], margin=0.1)
    assert np.allclose(b.low, [-1, -1]) and np.allclose(b.high, [11, 11])
    with pytest.raises(EmptyDataError):
        box_bound(np.zeros((0, 2)))


def test_square_containment():
    r = build_regions([SQUARE])[0]
    eps = 1e-6
    assert contains(r, [0.5, 0.5], eps)
    assert not contains(r, [2, 2], eps)
    assert contains(r, [1 + eps / 2, 0.5], eps)
    assert not contains(r, [1 + 2 * eps, 0.5], eps)
    with pytest.raises(DimensionMismatchError):
        r.contains([0.5, 0.5, 0.5])


def test_two_blobs_midpoint_outside(rng):
    a = rng.normal([0, 0], 0.3, (30, 2))
    b = rng.normal([10, 0], 0.3, (30, 2))
    regions = build_regions([a, b])
    assert len(regions) == 2
    assert not in_any(regions, [5.0, 0.0])
    assert not lp_in_hull(a, [5, 0]) and not lp_in_hull(b, [5, 0])


def test_collinear_is_degenerate():
    r = ConvexRegion([[0, 0], [1, 1], [2, 2], [3, 3]])
    assert r.degenerate and r.affine_rank == 1
    assert r.contains([1.5, 1.5], 1e-9)
    assert not r.contains([1.5, 1.6], 1e-9)


def test_sparse_cluster_contains_only_generators():
    r = ConvexRegion([[0, 0], [4, 0]])
    assert r.contains([4, 0])
    assert not r.contains([2, 0], 1e-9)


@pytest.mark.parametrize("dim", [2, 3, 5])
def test_matches_lp_oracle(dim):
    rng = np.random.default_rng(dim)
    cluster = rng.normal(size=(3 * dim + 5, dim))
    region = ConvexRegion(cluster)
    queries = rng.normal(scale=1.3, size=(200, dim))
    for q in queries:
        assert region.contains(q, 1e-6) == lp_in_hull(cluster, q)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 4))
def test_generators_contained(seed, dim):
    pts = np.random.default_rng(seed).normal(size=(dim + 4, dim))
    r = ConvexRegion(pts)
    assert all(r.contains(p, 1e-9) for p in pts)


def test_min_norm_point_simple():
    x, _ = min_norm_point(np.array([[1.0, -1.0], [1.0, 1.0]]))
    assert np.allclose(x, [1.0, 0.0])
    x, _ = min_norm_point(np.array([[-1.0, -1.0], [1.0, -1.0], [0.0, 1.0]]))
    assert np.allclose(x, 0.0, atol=1e-12)


def test_thinning_keeps_extremes(rng):
    pts = rng.uniform(-1, 1, (2000, 2))
    idx = farthest_point_subsample(pts, 64)
    assert len(idx) == 64 and len(set(idx)) == 64
    r = ConvexRegion(pts, max_generators=64)
    assert len(r.generators) == 64


def test_union_volume_below_box(rng):
    clusters = [rng.normal(c, 1.0, (40, 2)) for c in ([0, 0], [8, 3], [3, 9])]
    regions = build_regions(clusters)
    box = box_bound(np.vstack(clusters), 0.05)
    probes = rng.uniform(box.low, box.high, (2000, 2))
    inside = sum(in_any(regions, p) for p in probes)
    assert 0 < inside < len(probes)


def test_boxbound_clip():
    b = BoxBound([-5, -5], [5, 5]).clip_to([0, -10], [10, 1])
    assert b.low.tolist() == [0, -5] and b.high.tolist() == [5, 1]
