"""Sampling-region boundaries: a box over all training data and one convex
region per cluster.

Containment is a distance-to-hull query answered with Wolfe's minimum-norm
point algorithm on the region's generators, so no facet enumeration is needed
and the cost grows only linearly with dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DimensionMismatchError, ExplorerError

MAX_GENERATORS = 512
DEFAULT_MARGIN = 0.05


class EmptyDataError(ExplorerError, ValueError):
    pass


class InvalidRegionError(ExplorerError, ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BoxBound:
    low: np.ndarray
    high: np.ndarray

    def __post_init__(self):
        low = np.array(self.low, dtype=float, ndmin=1)
        high = np.array(self.high, dtype=float, ndmin=1)
        if low.shape != high.shape:
            raise DimensionMismatchError("box low/high shapes differ")
        if np.any(low > high):
            raise InvalidRegionError("box needs low <= high")
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)

    @property
    def dim(self) -> int:
        return self.low.size

    @property
    def widths(self) -> np.ndarray:
        return self.high - self.low

    @property
    def degenerate(self) -> bool:
        return bool(np.any(self.widths <= 0))

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(p >= self.low) and np.all(p <= self.high))

    def clip_to(self, low, high) -> "BoxBound":
        return BoxBound(np.clip(self.low, low, high), np.clip(self.high, low, high))


def box_bound(points, margin: float = DEFAULT_MARGIN) -> BoxBound:
    """Per-dimension min/max of ``points`` inflated outward by ``margin`` of the width."""
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        raise EmptyDataError("box_bound needs at least one point")
    points = np.atleast_2d(points)
    lo, hi = points.min(axis=0), points.max(axis=0)
    pad = margin * (hi - lo)
    return BoxBound(lo - pad, hi + pad)


def min_norm_point(vertices, tol: float = 1e-15, max_iter: int = 1000, radius=None):
    """Minimum-norm point of conv(``vertices``) by Wolfe's algorithm.

    Returns ``(x, weights)`` with ``x = weights @ vertices``, weights >= 0
    summing to one.  With ``radius`` set the search stops as soon as it is
    decided whether the hull meets the ball of that radius around the origin.
    """
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    k = V.shape[0]
    sqn = np.einsum("ij,ij->i", V, V)
    scale = max(float(sqn.max()), 1e-300)
    start = int(np.argmin(sqn))
    active = [start]
    lam = np.array([1.0])
    x = V[start].copy()
    for _ in range(max_iter):
        # major cycle: most improving vertex
        dots = V @ x
        j = int(np.argmin(dots))
        xx = x @ x
        if radius is not None:
            norm = np.sqrt(xx)
            if norm <= radius or dots[j] > radius * norm:
                break
        if xx - dots[j] <= tol * scale or j in active:
            break
        active.append(j)
        lam = np.append(lam, 0.0)
        while True:
            # minor cycle: affine minimiser of the active set
            S = V[active]
            q = len(active)
            kkt = np.zeros((q + 1, q + 1))
            kkt[:q, :q] = S @ S.T
            kkt[:q, q] = 1.0
            kkt[q, :q] = 1.0
            rhs = np.zeros(q + 1)
            rhs[q] = 1.0
            alpha = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:q]
            if np.all(alpha > 1e-14):
                lam = alpha
                x = alpha @ S
                break
            neg = alpha <= 1e-14
            ratios = lam[neg] / (lam[neg] - alpha[neg])
            theta = float(np.min(ratios)) if ratios.size else 0.0
            lam = theta * alpha + (1.0 - theta) * lam
            lam[lam < 1e-14] = 0.0
            keep = lam > 0
            if not np.any(keep):
                keep[int(np.argmax(alpha))] = True
                lam = np.where(keep, 1.0, 0.0)
            active = [a for a, kp in zip(active, keep) if kp]
            lam = lam[keep] / lam[keep].sum()
            x = lam @ V[active]
    weights = np.zeros(k)
    weights[active] = lam
    return x, weights


def farthest_point_subsample(points, count: int) -> np.ndarray:
    """Indices of ``count`` points picked by greedy farthest-point traversal,
    starting at the point farthest from the centroid."""
    points = np.asarray(points, dtype=float)
    if points.shape[0] <= count:
        return np.arange(points.shape[0])
    first = int(np.argmax(((points - points.mean(axis=0)) ** 2).sum(axis=1)))
    chosen = [first]
    dist = ((points - points[first]) ** 2).sum(axis=1)
    for _ in range(count - 1):
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, ((points - points[nxt]) ** 2).sum(axis=1))
    return np.array(sorted(chosen))


class ConvexRegion:
    """Convex hull of a point cluster, stored by its generators."""

    def __init__(self, points, max_generators: int = MAX_GENERATORS):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.size == 0:
            raise EmptyDataError("region needs at least one point")
        pts = np.unique(pts, axis=0)
        self.dim = pts.shape[1]
        self.generators = pts[farthest_point_subsample(pts, max_generators)]
        self.generators.setflags(write=False)
        centered = self.generators - self.generators.mean(axis=0)
        rank = np.linalg.matrix_rank(centered) if len(self.generators) > 1 else 0
        self.affine_rank = int(rank)
        # too few points to span the space: only the generators themselves count
        self.sparse = len(self.generators) < self.dim + 1
        self.degenerate = self.sparse or self.affine_rank < self.dim
        self._lo = self.generators.min(axis=0)
        self._hi = self.generators.max(axis=0)

    def distance(self, point) -> float:
        p = np.asarray(point, dtype=float).reshape(-1)
        if p.size != self.dim:
            raise DimensionMismatchError(f"point has dim {p.size}, region has {self.dim}")
        if self.sparse:
            return float(np.sqrt(((self.generators - p) ** 2).sum(axis=1).min()))
        x, _ = min_norm_point(self.generators - p)
        return float(np.sqrt(x @ x))

    def contains(self, point, eps: float = 1e-9) -> bool:
        p = np.asarray(point, dtype=float).reshape(-1)
        if p.size != self.dim:
            raise DimensionMismatchError(f"point has dim {p.size}, region has {self.dim}")
        if np.any(p < self._lo - eps) or np.any(p > self._hi + eps):
            return False
        if self.sparse:
            return self.distance(p) <= eps
        x, _ = min_norm_point(self.generators - p, radius=eps)
        return bool(np.sqrt(x @ x) <= eps)


def build_regions(clusters, max_generators: int = MAX_GENERATORS) -> list:
    """One :class:`ConvexRegion` per non-empty point cluster."""
    clusters = list(clusters)
    if not clusters:
        raise EmptyDataError("no clusters given")
    return [ConvexRegion(c, max_generators) for c in clusters if len(c)]


def contains(region: ConvexRegion, point, eps: float = 1e-9) -> bool:
    return region.contains(point, eps)


def in_any(regions, point, eps: float = 1e-9) -> bool:
    return any(r.contains(point, eps) for r in regions)


def identify_bounds(clusters, margin: float = DEFAULT_MARGIN):
    """Box over the union of all cluster points plus one region per cluster."""
    clusters = [np.atleast_2d(np.asarray(c, dtype=float)) for c in clusters if len(c)]
    if not clusters:
        raise EmptyDataError("no training data")
    box = box_bound(np.vstack(clusters), margin)
    return box, build_regions(clusters)
