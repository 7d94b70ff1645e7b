"""Training-data refinement: K-means over state trajectories, then a
dissimilar subset per cluster."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from .core import DimensionMismatchError, trajectory_matrix

DEFAULT_POINTS = 50
EXHAUSTIVE_LIMIT = 20_000


@dataclass(frozen=True)
class RefineParams:
    k: int = 5
    rate: float = 0.5
    resample_points: int = DEFAULT_POINTS
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0 < self.rate <= 1:
            raise ValueError("rate must lie in (0, 1]")


def trace_distance(a, b, resample_points: int = DEFAULT_POINTS) -> float:
    """Euclidean distance between resampled, flattened state trajectories."""
    if a.n != b.n:
        raise DimensionMismatchError(f"state dims {a.n} and {b.n} differ")
    X = trajectory_matrix([a, b], resample_points)
    return float(np.linalg.norm(X[0] - X[1]))


def distance_matrix(traces, resample_points: int = DEFAULT_POINTS) -> np.ndarray:
    X = trajectory_matrix(traces, resample_points)
    if X.shape[0] == 1:
        return np.zeros((1, 1))
    return squareform(pdist(X))


def _kmeans_pp(X, k, rng):
    centers = [X[rng.integers(X.shape[0])]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(X.shape[0], p=d2 / total)
        else:
            idx = rng.integers(X.shape[0])
        centers.append(X[idx])
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def kmeans(X, k: int, seed: int = 0, max_iter: int = 100):
    """Lloyd's algorithm with k-means++ seeding; returns (labels, centers).

    Every cluster is non-empty on return.
    """
    X = np.asarray(X, dtype=float)
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp(X, k, rng)
    labels = None
    for _ in range(max_iter):
        new = np.argmin(cdist(X, centers, "sqeuclidean"), axis=1)
        new = _repair_empty(X, new, centers, k)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        centers = np.array([X[labels == c].mean(axis=0) for c in range(k)])
    return labels, centers


def _repair_empty(X, labels, centers, k):
    labels = labels.copy()
    for c in range(k):
        if np.any(labels == c):
            continue
        # move the worst-fitting point of a multi-member cluster into the empty one
        counts = np.bincount(labels, minlength=k)
        movable = counts[labels] > 1
        err = ((X - centers[labels]) ** 2).sum(axis=1)
        err[~movable] = -np.inf
        idx = int(np.argmax(err))
        labels[idx] = c
        centers[c] = X[idx]
    return labels


def kmeans_traces(traces, k: int, seed: int = 0,
                  resample_points: int = DEFAULT_POINTS) -> list:
    """Partition trace indices into ``k`` non-empty clusters (lists of indices)."""
    traces = list(traces)
    if not traces:
        raise ValueError("no traces to cluster")
    if len(traces) < k:
        warnings.warn(f"only {len(traces)} traces for k={k}; reducing k", stacklevel=2)
        k = len(traces)
    X = trajectory_matrix(traces, resample_points)
    labels, _ = kmeans(X, k, seed)
    return [list(np.flatnonzero(labels == c)) for c in range(k)]


def _min_pairwise(D, subset):
    if len(subset) < 2:
        return np.inf
    sub = D[np.ix_(subset, subset)]
    return sub[np.triu_indices(len(subset), 1)].min()


def greedy_max_min(D, count: int) -> list:
    """Farthest-point selection seeded at the most distant pair."""
    size = D.shape[0]
    if count >= size:
        return list(range(size))
    if count == 1:
        return [int(np.argmin(D.sum(axis=1)))]
    i, j = np.unravel_index(int(np.argmax(D)), D.shape)
    chosen = [int(min(i, j)), int(max(i, j))]
    nearest = np.minimum(D[chosen[0]], D[chosen[1]])
    while len(chosen) < count:
        nearest[chosen] = -np.inf
        nxt = int(np.argmax(nearest))
        chosen.append(nxt)
        nearest = np.minimum(nearest, D[nxt])
    return sorted(chosen)


def exhaustive_max_min(D, count: int) -> list:
    """Subset of size ``count`` maximising the minimum pairwise distance;
    ties go to the larger distance sum, then to the first subset in
    lexicographic order."""
    size = D.shape[0]
    if count >= size:
        return list(range(size))
    if count == 1:
        return [int(np.argmin(D.sum(axis=1)))]
    best, best_key = None, None
    for subset in combinations(range(size), count):
        sub = D[np.ix_(subset, subset)][np.triu_indices(count, 1)]
        key = (sub.min(), sub.sum())
        if best_key is None or key > best_key:
            best, best_key = list(subset), key
    return best


def select_count(size: int, rate: float) -> int:
    return max(1, min(size, math.ceil(rate * size - 1e-12)))


def select_dissimilar_indices(D, rate: float) -> list:
    size = D.shape[0]
    count = select_count(size, rate)
    if math.comb(size, count) <= EXHAUSTIVE_LIMIT:
        return exhaustive_max_min(D, count)
    return greedy_max_min(D, count)


def select_dissimilar(traces, rate: float, resample_points: int = DEFAULT_POINTS) -> list:
    """Keep ``ceil(rate * len(traces))`` mutually dissimilar traces."""
    traces = list(traces)
    if not traces:
        raise ValueError("empty cluster")
    if len(traces) == 1:
        return traces
    D = distance_matrix(traces, resample_points)
    return [traces[i] for i in select_dissimilar_indices(D, rate)]


def refine_training_data(traces, params: RefineParams):
    """Cluster ``traces`` and keep a dissimilar subset of every cluster.

    Returns ``(selected, clusters)`` where ``clusters`` is a list of trace
    lists partitioning the input.
    """
    traces = list(traces)
    if not traces:
        raise ValueError("no traces to refine")
    groups = kmeans_traces(traces, params.k, params.seed, params.resample_points)
    selected, clusters = [], []
    for idx in groups:
        members = [traces[i] for i in idx]
        clusters.append(members)
        selected.extend(select_dissimilar(members, params.rate, params.resample_points))
    return selected, clusters
