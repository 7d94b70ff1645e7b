import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import constant_trace
from covexplorer.core import DataTrace, DimensionMismatchError
from covexplorer.refine import (RefineParams, distance_matrix, greedy_max_min, kmeans,
                                kmeans_traces, refine_training_data, select_dissimilar,
                                select_dissimilar_indices, trace_distance)


def brute_max_min_value(D, count):
    best = -np.inf
    for s in itertools.combinations(range(len(D)), count):
        best = max(best, min(D[i, j] for i, j in itertools.combinations(s, 2)))
    return best


def min_pairwise(D, s):
    return min(D[i, j] for i, j in itertools.combinations(s, 2))


def random_trace(rng, n=2, steps=None):
    steps = steps or int(rng.integers(3, 12))
    return DataTrace(np.cumsum(rng.normal(size=(steps + 1, n)), axis=0),
                     rng.normal(size=(steps, 1)), 1.0)


def test_distance_examples(rng):
    a = random_trace(rng)
    assert trace_distance(a, a) == 0.0
    d = trace_distance(constant_trace(0), constant_trace(1), resample_points=17)
    assert d == pytest.approx(np.sqrt(17))
    b = random_trace(rng)
    assert trace_distance(a, b) == trace_distance(b, a)
    with pytest.raises(DimensionMismatchError):
        trace_distance(a, random_trace(rng, n=3))


def test_kmeans_two_bundles_matches_brute_force(rng):
    traces = [constant_trace(v + rng.normal(0, 0.05), n=2) for v in [0] * 6 + [10] * 6]
    clusters = kmeans_traces(traces, 2, seed=3)
    X = np.array([t.states[0] for t in traces])
    best, best_cost = None, np.inf
    for mask in range(1, 2 ** 11):
        lab = np.array([0] + [(mask >> i) & 1 for i in range(11)])
        cost = sum(((X[lab == c] - X[lab == c].mean(0)) ** 2).sum() for c in (0, 1))
        if cost < best_cost:
            best, best_cost = lab, cost
    oracle = sorted(sorted(np.flatnonzero(best == c).tolist()) for c in (0, 1))
    assert sorted(sorted(map(int, c)) for c in clusters) == oracle
    assert oracle == [list(range(6)), list(range(6, 12))]


def test_kmeans_trivial_k(rng):
    traces = [random_trace(rng) for _ in range(6)]
    assert [sorted(c) for c in kmeans_traces(traces, 1)] == [list(range(6))]
    single = kmeans_traces(traces, 6)
    assert sorted(len(c) for c in single) == [1] * 6
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        out = kmeans_traces(traces[:3], 5)
    assert len(out) == 3 and w


def test_kmeans_no_empty_clusters(rng):
    X = np.vstack([np.zeros((20, 2)), rng.normal(size=(3, 2)) * 5])
    labels, _ = kmeans(X, 6, seed=1)
    assert set(labels.tolist()) == set(range(6))


def test_select_examples():
    ts = [constant_trace(v) for v in (0, 1, 10)]
    sel = select_dissimilar(ts, 2 / 3)
    assert sorted(t.states[0, 0] for t in sel) == [0, 10]
    assert select_dissimilar(ts, 1.0) == ts
    dup = [constant_trace(3)] * 4 + [constant_trace(50)]
    sel = select_dissimilar(dup, 0.4)
    assert sorted(t.states[0, 0] for t in sel) == [3, 50]
    assert select_dissimilar([ts[0]], 0.1) == [ts[0]]


@pytest.mark.parametrize("seed", range(25))
def test_selection_matches_exhaustive(seed):
    rng = np.random.default_rng(seed)
    size = int(rng.integers(2, 9))
    traces = [random_trace(rng) for _ in range(size)]
    D = distance_matrix(traces)
    rate = float(rng.uniform(0.2, 1.0))
    chosen = select_dissimilar_indices(D, rate)
    if len(chosen) >= 2:
        assert min_pairwise(D, chosen) == pytest.approx(brute_max_min_value(D, len(chosen)))


def test_greedy_is_seeded_at_farthest_pair(rng):
    X = rng.normal(size=(30, 3))
    D = np.linalg.norm(X[:, None] - X[None], axis=-1)
    i, j = np.unravel_index(np.argmax(D), D.shape)
    assert {int(i), int(j)} <= set(greedy_max_min(D, 5))


def test_beats_random_subsets():
    gains = []
    for seed in range(100):
        rng = np.random.default_rng(seed)
        traces = [random_trace(rng) for _ in range(10)]
        D = distance_matrix(traces)
        chosen = select_dissimilar_indices(D, 0.4)
        rand = rng.choice(10, len(chosen), replace=False)
        gains.append(min_pairwise(D, chosen) - min_pairwise(D, rand))
    assert np.mean(gains) >= 0 and min(gains) >= -1e-12


def test_refine_examples(rng):
    traces = [random_trace(rng) for _ in range(9)]
    sel, clusters = refine_training_data(traces, RefineParams(k=3, rate=1.0))
    assert {id(t) for t in sel} == {id(t) for t in traces}
    same = [constant_trace(0.0, n=2)] * 20
    odd = constant_trace(25.0, n=2)
    for seed in range(5):
        sel, clusters = refine_training_data(same + [odd], RefineParams(k=2, rate=0.5, seed=seed))
        assert any(t is odd for t in sel)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 1000), st.integers(1, 5), st.floats(0.1, 1.0))
def test_refine_subset_and_count(seed, k, rate):
    rng = np.random.default_rng(seed)
    traces = [random_trace(rng) for _ in range(12)]
    params = RefineParams(k=k, rate=rate, seed=seed)
    sel, clusters = refine_training_data(traces, params)
    ids = {id(t) for t in traces}
    assert {id(t) for t in sel} <= ids
    assert len(sel) == sum(int(np.ceil(rate * len(c) - 1e-12)) for c in clusters)
    again, _ = refine_training_data(traces, params)
    assert [id(t) for t in again] == [id(t) for t in sel]
