"""Point mass and kinematic single-track car."""

from __future__ import annotations

import warnings

import numpy as np

from ..coverage import ObjectiveSpace
from .base import Plant, step_rk4

CAR_ACCEL_LIMIT = 9.81
CAR_STEER_LIMIT = 0.4


def point_mass_step(x, v) -> np.ndarray:
    """Exact discrete update: position plus velocity input."""
    return np.asarray(x, dtype=float) + np.asarray(v, dtype=float)


class PointMass(Plant):
    name = "point_mass"
    state_names = ("x", "y", "z")
    input_names = ("vx", "vy", "vz")

    def __init__(self, speed_limit: float = 1.0, x0=(0.0, 0.0, 0.0), bounds=None, sigma=None,
                 cells_per_dim=None):
        if bounds is None:
            bounds = [(-100.0, 100.0)] * 3
        objective = ObjectiveSpace((0, 1, 2), bounds, sigma, cells_per_dim)
        super().__init__([-speed_limit] * 3, [speed_limit] * 3, 1.0, x0, objective)

    def step(self, x, u):
        return point_mass_step(x, u)


def kinematic_car_derivative(x, u) -> np.ndarray:
    """(v, phi, px, py) rates under (acceleration, steering rate); no disturbances."""
    u = np.asarray(u, dtype=float)
    limits = np.array([CAR_ACCEL_LIMIT, CAR_STEER_LIMIT])
    if np.any(np.abs(u) > limits):
        warnings.warn(f"car input {u} outside bounds; clamping", stacklevel=2)
        u = np.clip(u, -limits, limits)
    v, phi = x[0], x[1]
    return np.array([u[0], u[1], v * np.cos(phi), v * np.sin(phi)])


class KinematicCar(Plant):
    name = "kinematic_car"
    state_names = ("v", "phi", "px", "py")
    input_names = ("accel", "steer")

    def __init__(self, dt: float = 0.1, x0=(15.0, 0.0, 0.0, 0.0), bounds=None, sigma=None,
                 cells_per_dim=None):
        if bounds is None:
            bounds = [(-350.0, 650.0), (-500.0, 500.0)]
        objective = ObjectiveSpace((2, 3), bounds, sigma, cells_per_dim)
        super().__init__([-CAR_ACCEL_LIMIT, -CAR_STEER_LIMIT], [CAR_ACCEL_LIMIT, CAR_STEER_LIMIT],
                         dt, x0, objective)

    def step(self, x, u):
        return step_rk4(kinematic_car_derivative, x, u, self.dt)
