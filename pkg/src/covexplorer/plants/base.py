from __future__ import annotations

import numpy as np

from ..core import RANDOM, DataTrace, ExplorerError
from ..coverage import ObjectiveSpace


class IntegrationError(ExplorerError, ArithmeticError):
    pass


def step_rk4(dynamics, x, u, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of ``dx/dt = dynamics(x, u)`` with ``u`` held."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    x = np.asarray(x, dtype=float)
    k1 = np.asarray(dynamics(x, u), dtype=float)
    k2 = np.asarray(dynamics(x + 0.5 * dt * k1, u), dtype=float)
    k3 = np.asarray(dynamics(x + 0.5 * dt * k2, u), dtype=float)
    k4 = np.asarray(dynamics(x + dt * k3, u), dtype=float)
    if not all(np.all(np.isfinite(k)) for k in (k1, k2, k3, k4)):
        raise IntegrationError("non-finite derivative")
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class Plant:
    """A simulate-able system under test.

    Subclasses set the class attributes and implement :meth:`step`.
    """

    name = "plant"
    state_names: tuple = ()
    input_names: tuple = ()

    def __init__(self, input_low, input_high, dt: float, x0, objective: ObjectiveSpace):
        self.input_low = np.asarray(input_low, dtype=float)
        self.input_high = np.asarray(input_high, dtype=float)
        if np.any(~np.isfinite(self.input_low)) or np.any(~np.isfinite(self.input_high)):
            raise ValueError("input bounds must be finite")
        if np.any(self.input_low >= self.input_high):
            raise ValueError("input bounds need low < high")
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.dt = float(dt)
        self.x0 = np.asarray(x0, dtype=float)
        self.objective = objective
        if max(objective.projection) >= self.n:
            raise ValueError("objective projection exceeds state dimension")

    @property
    def n(self) -> int:
        return len(self.state_names)

    @property
    def w(self) -> int:
        return len(self.input_names)

    def step(self, x, u) -> np.ndarray:
        raise NotImplementedError

    def simulate(self, inputs, x0=None, seed=None, origin=RANDOM) -> DataTrace:
        x = self.x0 if x0 is None else np.asarray(x0, dtype=float)
        inputs = np.asarray(inputs, dtype=float).reshape(-1, self.w)
        states = [x.copy()]
        for u in inputs:
            x = np.asarray(self.step(x, u), dtype=float)
            states.append(x.copy())
        return DataTrace(np.array(states), inputs, self.dt, seed=seed, origin=origin)

    def random_inputs(self, steps: int, rng) -> np.ndarray:
        """I.i.d. uniform inputs over the input box."""
        return rng.uniform(self.input_low, self.input_high, size=(steps, self.w))

    def describe(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "w": self.w,
            "dt": self.dt,
            "input_low": self.input_low.tolist(),
            "input_high": self.input_high.tolist(),
            "x0": self.x0.tolist(),
            "objective": self.objective.to_dict(),
        }
