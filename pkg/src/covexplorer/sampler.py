"""Coverage-guided rejection sampling of target points.

Proposals are uniform in a box.  A proposal inside any excluded convex
region is rejected outright; otherwise it is accepted with probability
``1 - occupancy`` so that accepted targets follow a density proportional to
how uncovered each location is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DimensionMismatchError, ExplorerError
from .geometry import BoxBound, InvalidRegionError, in_any

BEST_OF_ATTEMPTS = "best-of-attempts"
ERROR = "error"


class SamplingExhaustedError(ExplorerError, RuntimeError):
    pass


@dataclass(frozen=True)
class SamplerParams:
    max_attempts: int = 1000
    fallback: str = BEST_OF_ATTEMPTS
    region_eps: float = 1e-9

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.fallback not in (BEST_OF_ATTEMPTS, ERROR):
            raise ValueError(f"unknown fallback {self.fallback!r}")


def sample_target(box: BoxBound, excluded, field, params: SamplerParams | None, rng) -> np.ndarray:
    """Draw one target point from ``box`` minus ``excluded`` regions.

    The box is first clipped to the field's objective bounds.  When every
    attempt is rejected, ``best-of-attempts`` returns the region-feasible
    proposal of lowest occupancy; if no proposal was region-feasible a
    :class:`SamplingExhaustedError` is raised under either fallback.
    """
    params = params or SamplerParams()
    space = field.space
    if box.dim != space.dim:
        raise DimensionMismatchError(f"box dim {box.dim} != objective dim {space.dim}")
    box = box.clip_to(space.low, space.high)
    if np.any(box.widths <= 0):
        raise InvalidRegionError("sampling box has zero width inside the objective bounds")
    excluded = list(excluded or [])
    best, best_occ = None, np.inf
    for _ in range(params.max_attempts):
        p = rng.uniform(box.low, box.high)
        if excluded and in_any(excluded, p, params.region_eps):
            continue
        occ = field.occupancy_at(p)
        if rng.uniform() < 1.0 - occ:
            return p
        if occ < best_occ:
            best, best_occ = p, occ
    if best is None:
        raise SamplingExhaustedError(
            f"all {params.max_attempts} proposals fell inside excluded regions")
    if params.fallback == ERROR:
        raise SamplingExhaustedError(f"no proposal accepted in {params.max_attempts} attempts")
    return best
