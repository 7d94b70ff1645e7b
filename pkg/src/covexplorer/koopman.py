"""Lifted linear surrogate models fitted by extended dynamic mode decomposition.

Observables are the raw state followed by random Fourier features
``sqrt(2/m) * cos(W x + b)``, so reading a state back out of the lifted
vector is a slice of its first ``n`` entries.  Inputs enter the lifted
dynamics linearly and are not lifted.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import DimensionMismatchError, ExplorerError

log = logging.getLogger(__name__)


class FitError(ExplorerError, ValueError):
    pass


class InsufficientDataError(FitError):
    pass


@dataclass(frozen=True, eq=False)
class ObservableMap:
    n: int
    m_rff: int = 0
    lengthscale: float = 1.0
    seed: int = 0
    frequencies: np.ndarray = field(default=None, repr=False)
    phases: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.m_rff < 0:
            raise ValueError("m_rff must be >= 0")
        if not self.lengthscale > 0:
            raise ValueError("lengthscale must be positive")
        if self.frequencies is None:
            rng = np.random.default_rng(self.seed)
            freqs = rng.normal(0.0, 1.0 / self.lengthscale, size=(self.m_rff, self.n))
            phases = rng.uniform(0.0, 2.0 * np.pi, size=self.m_rff)
        else:
            freqs = np.asarray(self.frequencies, dtype=float).reshape(self.m_rff, self.n)
            phases = np.asarray(self.phases, dtype=float).reshape(self.m_rff)
        freqs.setflags(write=False)
        phases.setflags(write=False)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "phases", phases)

    @property
    def m(self) -> int:
        return self.n + self.m_rff

    def lift(self, x) -> np.ndarray:
        """Lift one state (n,) or a batch (k, n)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise DimensionMismatchError(f"expected state dim {self.n}, got {x.shape[-1]}")
        if self.m_rff == 0:
            return x.copy()
        feats = np.sqrt(2.0 / self.m_rff) * np.cos(x @ self.frequencies.T + self.phases)
        return np.concatenate([x, feats], axis=-1)


def lift(obs: ObservableMap, x) -> np.ndarray:
    return obs.lift(x)


@dataclass(frozen=True, eq=False)
class KoopmanModel:
    A: np.ndarray
    B: np.ndarray
    obs: ObservableMap
    reg: float
    val_rmse: float = float("nan")
    dt: float | None = None

    @property
    def n(self) -> int:
        return self.obs.n

    @property
    def m(self) -> int:
        return self.obs.m

    @property
    def w(self) -> int:
        return self.B.shape[1]

    def lift(self, x) -> np.ndarray:
        return self.obs.lift(x)

    def predict(self, x0, inputs) -> np.ndarray:
        return predict(self, x0, inputs)


def snapshot_pairs(traces):
    """Stack (x_k, u_k, x_{k+1}) over all traces."""
    traces = list(traces)
    if not traces:
        raise InsufficientDataError("no traces")
    dts = {t.dt for t in traces}
    if len(dts) > 1:
        raise FitError(f"traces use different time steps {sorted(dts)}")
    if len({t.n for t in traces}) > 1 or len({t.w for t in traces}) > 1:
        raise DimensionMismatchError("traces differ in state or input dimension")
    X = np.vstack([t.states[:-1] for t in traces])
    U = np.vstack([t.inputs for t in traces])
    Xn = np.vstack([t.states[1:] for t in traces])
    return X, U, Xn, dts.pop()


def fit_edmd(traces, obs: ObservableMap, reg: float = 1e-6) -> KoopmanModel:
    """Ridge least-squares fit of ``g(x+) = A g(x) + B u``."""
    X, U, Xn, dt = snapshot_pairs(traces)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(U)) and np.all(np.isfinite(Xn))):
        raise FitError("non-finite training data")
    m, w = obs.m, U.shape[1]
    if X.shape[0] < m + w:
        raise InsufficientDataError(
            f"{X.shape[0]} snapshot pairs cannot determine {m + w} regressors")
    Z = np.hstack([obs.lift(X), U])
    Y = obs.lift(Xn)
    gram = Z.T @ Z + reg * np.eye(m + w)
    rhs = Z.T @ Y
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            sol = scipy.linalg.solve(gram, rhs, assume_a="pos")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning):
        # ill-conditioned normal equations: minimum-norm least squares instead
        sol = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    K = sol.T
    return KoopmanModel(A=K[:, :m].copy(), B=K[:, m:].copy(), obs=obs, reg=float(reg), dt=dt)


def predict(model: KoopmanModel, x0, inputs) -> np.ndarray:
    """Open-loop rollout in lifted space; returns (len(inputs) + 1, n) states."""
    inputs = np.asarray(inputs, dtype=float).reshape(-1, model.w)
    g = model.lift(np.asarray(x0, dtype=float))
    out = np.empty((inputs.shape[0] + 1, model.n))
    out[0] = np.asarray(x0, dtype=float)
    for k, u in enumerate(inputs):
        g = model.A @ g + model.B @ u
        out[k + 1] = g[:model.n]
    return out


def rollout_rmse(model: KoopmanModel, traces, horizon: int = 10) -> float:
    """RMSE of ``horizon``-step open-loop predictions started at every state."""
    sq, count = 0.0, 0
    n = model.n
    for t in traces:
        starts = t.steps - horizon + 1
        if starts < 1:
            starts, h = 1, t.steps
        else:
            h = horizon
        if h < 1:
            continue
        G = model.lift(t.states[:starts])
        for k in range(h):
            G = G @ model.A.T + t.inputs[k:k + starts] @ model.B.T
            err = G[:, :n] - t.states[k + 1:k + 1 + starts]
            sq += float((err ** 2).sum())
            count += err.size
    if count == 0:
        raise InsufficientDataError("validation traces too short")
    with np.errstate(invalid="ignore", over="ignore"):
        rmse = np.sqrt(sq / count)
    return float(rmse) if np.isfinite(rmse) else float("inf")


@dataclass(frozen=True)
class TuneGrid:
    m_rff: tuple = (0, 40, 100, 200)
    lengthscale_factors: tuple = (0.5, 1.0, 2.0, 5.0)
    regs: tuple = (1e-6, 1e-3, 1e-1)
    horizon: int = 10
    val_fraction: float = 0.25

    def points(self):
        for m_rff in self.m_rff:
            # lengthscale has no effect without Fourier features
            factors = self.lengthscale_factors[:1] if m_rff == 0 else self.lengthscale_factors
            for factor in factors:
                for reg in self.regs:
                    yield m_rff, factor, reg


def split_traces(traces, val_fraction: float, seed: int):
    traces = list(traces)
    order = np.random.default_rng(seed).permutation(len(traces))
    n_val = max(1, int(round(val_fraction * len(traces))))
    val = [traces[i] for i in sorted(order[:n_val])]
    train = [traces[i] for i in sorted(order[n_val:])]
    return train, val


def tune(traces, grid: TuneGrid | None = None, seed: int = 0, return_table: bool = False):
    """Grid search over (m_rff, lengthscale, reg) by validation rollout RMSE.

    Near-ties (within 1e-6 relative) favour fewer Fourier features, then
    stronger regularisation.
    """
    grid = grid or TuneGrid()
    traces = list(traces)
    if len(traces) < 4:
        raise InsufficientDataError("tuning needs at least 4 traces")
    train, val = split_traces(traces, grid.val_fraction, seed)
    base = float(np.mean(np.vstack([t.states for t in train]).std(axis=0)))
    if not base > 0:
        base = 1.0
    n = train[0].n
    table = []
    for m_rff, factor, reg in grid.points():
        obs = ObservableMap(n=n, m_rff=m_rff, lengthscale=factor * base, seed=seed)
        try:
            model = fit_edmd(train, obs, reg)
            rmse = rollout_rmse(model, val, grid.horizon)
        except InsufficientDataError:
            continue
        table.append((m_rff, factor * base, reg, rmse, model))
        log.debug("tune m_rff=%d ls=%.3g reg=%g rmse=%.6g", m_rff, factor * base, reg, rmse)
    if not table:
        raise InsufficientDataError("no grid point could be fitted")
    best = min(r[3] for r in table)
    slack = max(1e-12, 1e-6 * best) if np.isfinite(best) else 0.0
    tied = [r for r in table if r[3] <= best + slack]
    m_rff, ls, reg, rmse, model = min(tied, key=lambda r: (r[0], -r[2]))
    chosen = KoopmanModel(A=model.A, B=model.B, obs=model.obs, reg=reg, val_rmse=rmse, dt=model.dt)
    if return_table:
        return chosen, [(r[0], r[1], r[2], r[3]) for r in table]
    return chosen
