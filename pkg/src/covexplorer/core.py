"""Shared trace type and trajectory normalization.

States, control inputs and input sequences are plain numpy arrays:
a state is shape ``(n,)``, a control input ``(w,)``, an input sequence
``(N, w)`` and a state trajectory ``(N + 1, n)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

RANDOM = "random"
COVERAGE_GUIDED = "coverage-guided"
ORIGINS = (RANDOM, COVERAGE_GUIDED)


class ExplorerError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(ExplorerError, ValueError):
    pass


class DegenerateTraceError(ExplorerError, ValueError):
    pass


def _frozen(a, ndim):
    arr = np.array(a, dtype=float, ndmin=ndim)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DataTrace:
    """One simulation run: ``states`` (N+1, n) driven by ``inputs`` (N, w)."""

    states: np.ndarray
    inputs: np.ndarray
    dt: float
    seed: int | None = None
    origin: str = RANDOM
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        states = _frozen(self.states, 2)
        inputs = np.array(self.inputs, dtype=float)
        if inputs.size == 0:
            inputs = inputs.reshape(0, inputs.shape[-1] if inputs.ndim == 2 else 0)
        inputs = _frozen(inputs, 2)
        if states.shape[0] != inputs.shape[0] + 1:
            raise DimensionMismatchError(
                f"trace has {states.shape[0]} states but {inputs.shape[0]} inputs")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not np.all(np.isfinite(states)) or not np.all(np.isfinite(inputs)):
            raise ValueError("trace contains non-finite values")
        if self.origin not in ORIGINS:
            raise ValueError(f"unknown trace origin {self.origin!r}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def w(self) -> int:
        return self.inputs.shape[1]

    @property
    def steps(self) -> int:
        return self.inputs.shape[0]

    def __len__(self):
        return self.states.shape[0]


def resample_trajectory(states, points: int) -> np.ndarray:
    """Linearly interpolate a trajectory onto ``points`` equally spaced
    fractional indices. Accepts a :class:`DataTrace` or an (N, n) array.
    Endpoints are reproduced exactly."""
    if isinstance(states, DataTrace):
        states = states.states
    states = np.asarray(states, dtype=float)
    if states.ndim == 1:
        states = states[:, None]
    if states.shape[0] < 2:
        raise DegenerateTraceError("need at least 2 states to resample")
    if points < 2:
        raise ValueError("points must be >= 2")
    count = states.shape[0]
    if points == count:
        return states.copy()
    pos = np.linspace(0.0, count - 1, points)
    lo = np.minimum(np.floor(pos).astype(int), count - 2)
    frac = (pos - lo)[:, None]
    out = (1.0 - frac) * states[lo] + frac * states[lo + 1]
    out[0] = states[0]
    out[-1] = states[-1]
    return out


def flatten_trajectory(states) -> np.ndarray:
    """Concatenate state vectors in time order."""
    if len(states) == 0:
        raise ValueError("empty trajectory")
    dims = {len(np.atleast_1d(s)) for s in states}
    if len(dims) != 1:
        raise DimensionMismatchError(f"mixed state dimensions {sorted(dims)}")
    return np.concatenate([np.atleast_1d(np.asarray(s, dtype=float)) for s in states])


def unflatten_trajectory(vector, n: int) -> np.ndarray:
    vector = np.asarray(vector, dtype=float)
    if vector.size % n:
        raise DimensionMismatchError(f"length {vector.size} is not a multiple of {n}")
    return vector.reshape(-1, n)


def trajectory_matrix(traces, points: int) -> np.ndarray:
    """Stack resampled, flattened state trajectories into a (len(traces), points*n) matrix."""
    rows = [resample_trajectory(t, points).ravel() for t in traces]
    dims = {r.size for r in rows}
    if len(dims) > 1:
        raise DimensionMismatchError("traces have different state dimensions")
    return np.vstack(rows)


def pooled_states(traces) -> np.ndarray:
    return np.vstack([t.states for t in traces])
