"""Receding-horizon control on a lifted linear model.

The plan minimises the squared distance of the projected terminal state to a
target plus a small input-effort penalty,

    J(U) = ||P A^H g0 + sum_i P A^(H-1-i) B u_i - target||^2 + lam * ||U||^2,

subject to per-component input boxes.  ``P`` selects the objective
coordinates from the identity block of the lift.  J is a convex quadratic in
U, solved by projected gradient descent with backtracking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import COVERAGE_GUIDED, DataTrace, DimensionMismatchError, ExplorerError


class SimulationError(ExplorerError, RuntimeError):
    pass


@dataclass(frozen=True)
class MpcParams:
    horizon: int = 15
    effort_weight: float = 1e-4
    pgd_iterations: int = 100
    replan_every: int = 1
    target_tolerance: float = 0.0
    backtrack: float = 0.5
    power_iterations: int = 20

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.effort_weight < 0:
            raise ValueError("effort_weight must be >= 0")
        if self.replan_every < 1:
            raise ValueError("replan_every must be >= 1")


class Planner:
    """Condensed horizon operator for one (model, projection, bounds) triple.

    Building it costs ``H`` matrix products; every subsequent :meth:`plan`
    only touches (objective dim x H*w) matrices.
    """

    def __init__(self, model, projection, low, high, params: MpcParams | None = None):
        self.params = params or MpcParams()
        self.model = model
        self.projection = tuple(int(i) for i in projection)
        if max(self.projection) >= model.n:
            raise DimensionMismatchError("projection exceeds model state dimension")
        H, w = self.params.horizon, model.w
        self.low = np.broadcast_to(np.asarray(low, dtype=float), (w,)).copy()
        self.high = np.broadcast_to(np.asarray(high, dtype=float), (w,)).copy()
        if np.any(~np.isfinite(self.low)) or np.any(~np.isfinite(self.high)) or np.any(self.low > self.high):
            raise ValueError("input bounds must be finite with low <= high")
        # rows of A^k restricted to objective coordinates, k = 0..H
        powers = [np.eye(model.m)[list(self.projection)]]
        for _ in range(H):
            powers.append(powers[-1] @ model.A)
        self.free = powers[H]
        # column block i multiplies u_i: P A^(H-1-i) B
        self.M = np.hstack([powers[H - 1 - i] @ model.B for i in range(H)])
        self.center = np.tile((self.low + self.high) / 2.0, H)
        self.half = np.tile((self.high - self.low) / 2.0, H)
        self.lo_flat = np.tile(self.low, H)
        self.hi_flat = np.tile(self.high, H)
        self._Ms = self.M * self.half
        self.step0 = 1.0 / max(self._power_norm2(self._Ms), 1e-300)

    def _power_norm2(self, M):
        """Squared spectral norm estimate by power iteration from a fixed start."""
        if M.size == 0:
            return 0.0
        v = np.ones(M.shape[1]) / np.sqrt(M.shape[1])
        est = 0.0
        for _ in range(self.params.power_iterations):
            u = M.T @ (M @ v)
            est = float(np.linalg.norm(u))
            if est == 0.0:
                return float(np.linalg.norm(M, 2) ** 2)
            v = u / est
        return est

    def free_response(self, g0) -> np.ndarray:
        return self.free @ np.asarray(g0, dtype=float)

    def cost(self, U, g0, target) -> float:
        U = np.asarray(U, dtype=float).ravel()
        r = self.free_response(g0) + self.M @ U - np.asarray(target, dtype=float)
        return float(r @ r + self.params.effort_weight * (U @ U))

    def gradient(self, U, g0, target) -> np.ndarray:
        U = np.asarray(U, dtype=float).ravel()
        r = self.free_response(g0) + self.M @ U - np.asarray(target, dtype=float)
        return 2.0 * (self.M.T @ r) + 2.0 * self.params.effort_weight * U

    def plan(self, g0, target) -> np.ndarray:
        """Box-feasible input sequence of shape (H, w)."""
        target = np.asarray(target, dtype=float).ravel()
        if target.size != len(self.projection):
            raise DimensionMismatchError("target dimension does not match objective")
        lam = self.params.effort_weight
        offset = self.free_response(g0) + self.M @ self.center - target
        Ms, half, center = self._Ms, self.half, self.center

        def f(z):
            r = offset + Ms @ z
            u = center + half * z
            return r @ r + lam * (u @ u)

        def grad(z):
            r = offset + Ms @ z
            return 2.0 * (Ms.T @ r) + 2.0 * lam * half * (center + half * z)

        # optimise in box-normalised coordinates z in [-1, 1], starting from U = 0
        z = np.clip(-center / np.where(half > 0, half, 1.0), -1.0, 1.0)
        fz = f(z)
        step = self.step0
        for _ in range(self.params.pgd_iterations):
            g = grad(z)
            while True:
                z_new = np.clip(z - step * g, -1.0, 1.0)
                d = z_new - z
                f_new = f(z_new)
                if f_new <= fz + g @ d + (d @ d) / (2.0 * step) + 1e-15 * abs(fz):
                    break
                step *= self.params.backtrack
                if step < 1e-30:
                    break
            z, fz = z_new, f_new
            if d @ d <= 1e-24 * (1.0 + z @ z):
                break
        U = np.clip(center + half * z, self.lo_flat, self.hi_flat)
        return U.reshape(self.params.horizon, self.model.w)


def plan(model, g0, target, params: MpcParams, projection, low, high) -> np.ndarray:
    return Planner(model, projection, low, high, params).plan(g0, target)


def run_mpc_simulation(plant, model, x0, target, steps: int, params: MpcParams | None = None,
                       projection=None, planner: Planner | None = None, seed=None) -> DataTrace:
    """Drive the true ``plant`` toward ``target`` by replanning on ``model``.

    Stops after ``steps`` plant steps or once the projected state is within
    ``params.target_tolerance`` of the target.
    """
    params = params or MpcParams()
    if projection is None:
        projection = plant.objective.projection
    if plant.n != model.n or plant.w != model.w:
        raise DimensionMismatchError(
            f"plant (n={plant.n}, w={plant.w}) does not match model (n={model.n}, w={model.w})")
    if planner is None:
        planner = Planner(model, projection, plant.input_low, plant.input_high, params)
    target = np.asarray(target, dtype=float).ravel()
    proj = list(projection)
    x = np.asarray(x0, dtype=float).copy()
    states, inputs = [x.copy()], []
    queue = []
    for k in range(steps):
        if np.linalg.norm(x[proj] - target) <= params.target_tolerance:
            break
        if not queue:
            U = planner.plan(model.lift(x), target)
            queue = list(U[:params.replan_every])
        u = queue.pop(0)
        try:
            x = np.asarray(plant.step(x, u), dtype=float)
        except Exception as exc:
            raise SimulationError(f"plant step {k} failed: {exc}") from exc
        if not np.all(np.isfinite(x)):
            raise SimulationError(f"plant step {k} produced a non-finite state")
        states.append(x.copy())
        inputs.append(u)
    inputs = np.array(inputs, dtype=float).reshape(len(inputs), plant.w)
    return DataTrace(np.array(states), inputs, plant.dt, seed=seed, origin=COVERAGE_GUIDED,
                     meta={"target": target.tolist()})
