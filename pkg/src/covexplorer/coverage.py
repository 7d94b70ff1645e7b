"""CPS coverage score over a bounded objective space.

The score of a state set is the integral over the objective bounds of the
pointwise maximum of isotropic Gaussian kernels centred at the projected
states.  An :class:`OccupancyField` keeps that pointwise maximum on a fixed
set of evaluation nodes (cell centres of a uniform grid for up to three
objective dimensions, scrambled Halton nodes above that), so scoring and
occupancy queries never revisit the inserted states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import qmc

from .core import DimensionMismatchError, ExplorerError

DEFAULT_CELLS = {1: 256, 2: 128, 3: 48}
HALTON_SAMPLES = 200_000
HALTON_SEED = 0
_CHUNK_ELEMENTS = 4_000_000


class ProjectionError(ExplorerError, IndexError):
    pass


class OutOfBoundsError(ExplorerError, ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ObjectiveSpace:
    """Coordinates of the state that coverage is measured over.

    ``bounds`` is a (dim, 2) array of (low, high) pairs.  ``sigma`` defaults
    to 3% of the narrowest bound width.
    """

    projection: tuple
    bounds: np.ndarray
    sigma: float | None = None
    cells_per_dim: int | None = None

    def __post_init__(self):
        projection = tuple(int(i) for i in self.projection)
        bounds = np.array(self.bounds, dtype=float, ndmin=2)
        if bounds.shape != (len(projection), 2):
            raise DimensionMismatchError(
                f"bounds shape {bounds.shape} does not match projection of length {len(projection)}")
        if np.any(bounds[:, 0] >= bounds[:, 1]):
            raise ValueError("objective bounds need low < high in every dimension")
        if any(i < 0 for i in projection):
            raise ProjectionError("projection indices must be non-negative")
        sigma = self.sigma
        if sigma is None:
            sigma = 0.03 * float(np.min(bounds[:, 1] - bounds[:, 0]))
        if not sigma > 0:
            raise ValueError("sigma must be positive")
        cells = self.cells_per_dim
        if cells is None:
            cells = DEFAULT_CELLS.get(len(projection), 0)
        if len(projection) <= 3 and cells < 10:
            raise ValueError("cells_per_dim must be >= 10")
        bounds.setflags(write=False)
        object.__setattr__(self, "projection", projection)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "sigma", float(sigma))
        object.__setattr__(self, "cells_per_dim", int(cells))

    @property
    def dim(self) -> int:
        return len(self.projection)

    @property
    def low(self) -> np.ndarray:
        return self.bounds[:, 0]

    @property
    def high(self) -> np.ndarray:
        return self.bounds[:, 1]

    @property
    def volume(self) -> float:
        return float(np.prod(self.high - self.low))

    @property
    def peak(self) -> float:
        """Kernel density at its own centre."""
        return (2.0 * np.pi * self.sigma ** 2) ** (-self.dim / 2.0)

    @property
    def uses_grid(self) -> bool:
        return self.dim <= 3

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(p >= self.low) and np.all(p <= self.high))

    def to_dict(self) -> dict:
        return {
            "projection": list(self.projection),
            "bounds": self.bounds.tolist(),
            "sigma": self.sigma,
            "cells_per_dim": self.cells_per_dim,
        }


def project(space: ObjectiveSpace, states) -> np.ndarray:
    """Select the objective coordinates of one state (n,) or many (k, n)."""
    states = np.asarray(states, dtype=float)
    width = states.shape[-1] if states.ndim else 0
    if max(space.projection) >= width:
        raise ProjectionError(
            f"projection {space.projection} needs at least {max(space.projection) + 1} "
            f"state coordinates, got {width}")
    return states[..., list(space.projection)]


class OccupancyField:
    """Running maximum of Gaussian kernels evaluated on fixed nodes.

    Values only ever grow.  Not safe for concurrent insertion.
    """

    def __init__(self, space: ObjectiveSpace):
        self.space = space
        self.inserted_count = 0
        if space.uses_grid:
            cells = space.cells_per_dim
            self.widths = (space.high - space.low) / cells
            self.axes = [lo + (np.arange(cells) + 0.5) * w
                         for lo, w in zip(space.low, self.widths)]
            self.grid = np.zeros((cells,) * space.dim)
            self.nodes = None
        else:
            sampler = qmc.Halton(d=space.dim, scramble=True, seed=HALTON_SEED)
            unit = sampler.random(HALTON_SAMPLES)
            self.nodes = qmc.scale(unit, space.low, space.high)
            self.grid = np.zeros(HALTON_SAMPLES)
            self._tree = None

    def copy(self) -> "OccupancyField":
        other = object.__new__(OccupancyField)
        other.__dict__.update(self.__dict__)
        other.grid = self.grid.copy()
        return other

    @property
    def cell_volume(self) -> float:
        if self.space.uses_grid:
            return float(np.prod(self.widths))
        return self.space.volume / self.grid.size

    def insert(self, states) -> "OccupancyField":
        """Absorb full states (k, n); returns ``self``."""
        states = np.atleast_2d(np.asarray(states, dtype=float))
        if states.shape[0] == 0:
            raise ValueError("no states to insert")
        points = project(self.space, states)
        if self.space.uses_grid:
            self._insert_grid(points)
        else:
            self._insert_nodes(points)
        self.inserted_count += points.shape[0]
        return self

    def insert_points(self, points) -> "OccupancyField":
        """Absorb points that are already in objective coordinates."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.space.dim:
            raise DimensionMismatchError("point dimension does not match objective space")
        if self.space.uses_grid:
            self._insert_grid(points)
        else:
            self._insert_nodes(points)
        self.inserted_count += points.shape[0]
        return self

    def _insert_grid(self, points):
        space = self.space
        inv = 1.0 / (2.0 * space.sigma ** 2)
        cells_total = self.grid.size
        chunk = max(1, _CHUNK_ELEMENTS // cells_total)
        for start in range(0, points.shape[0], chunk):
            block = points[start:start + chunk]
            # separable kernel: product of per-axis factors, peak folded into the first
            factors = [np.exp(-((ax[None, :] - block[:, [d]]) ** 2) * inv)
                       for d, ax in enumerate(self.axes)]
            dens = factors[0] * space.peak
            for f in factors[1:]:
                dens = dens[..., None] * f.reshape((f.shape[0],) + (1,) * (dens.ndim - 1) + (f.shape[1],))
            np.maximum(self.grid, dens.max(axis=0), out=self.grid)

    def _insert_nodes(self, points):
        space = self.space
        inv = 1.0 / (2.0 * space.sigma ** 2)
        chunk = max(1, _CHUNK_ELEMENTS // self.nodes.shape[0])
        for start in range(0, points.shape[0], chunk):
            block = points[start:start + chunk]
            sq = ((self.nodes[None, :, :] - block[:, None, :]) ** 2).sum(axis=-1)
            np.maximum(self.grid, space.peak * np.exp(-sq * inv).max(axis=0), out=self.grid)

    def score(self) -> float:
        return float(self.grid.sum() * self.cell_volume)

    def occupancy_at(self, point) -> float:
        """Kernel height at ``point`` relative to the kernel peak, in [0, 1]."""
        p = np.asarray(point, dtype=float).reshape(-1)
        if p.size != self.space.dim:
            raise DimensionMismatchError("point dimension does not match objective space")
        if not self.space.contains(p):
            raise OutOfBoundsError(f"{p} lies outside the objective bounds")
        if self.space.uses_grid:
            idx = np.floor((p - self.space.low) / self.widths).astype(int)
            idx = np.minimum(idx, self.space.cells_per_dim - 1)
            value = self.grid[tuple(idx)]
        else:
            if self._tree is None:
                self._tree = cKDTree(self.nodes)
            value = self.grid[self._tree.query(p)[1]]
        return float(min(value / self.space.peak, 1.0))

    def cell_centers(self) -> np.ndarray:
        """(cells, dim) coordinates matching ``grid.ravel()`` order."""
        if not self.space.uses_grid:
            return self.nodes
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])


def insert_states(field: OccupancyField, states) -> OccupancyField:
    """Return a new field with ``states`` absorbed; ``field`` is left untouched."""
    return field.copy().insert(states)


def coverage_score(field: OccupancyField) -> float:
    return field.score()


def occupancy_at(field: OccupancyField, point) -> float:
    return field.occupancy_at(point)


def score_states(space: ObjectiveSpace, states) -> float:
    """Coverage score of a state set (k, n) on a fresh field."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    if states.shape[0] == 0:
        return 0.0
    return OccupancyField(space).insert(states).score()


def score_traces(space: ObjectiveSpace, traces) -> float:
    traces = list(traces)
    if not traces:
        return 0.0
    return score_states(space, np.vstack([t.states for t in traces]))
