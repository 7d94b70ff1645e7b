"""Two-aircraft ACAS Xu encounter with Dubins kinematics.

The ownship flies under the network advisories; the intruder's turn rate is
the externally controlled input.  Angles are in radians internally, turn
rates in rad/s; advisory turn rates are specified in deg/s.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from ..core import ExplorerError
from ..coverage import ObjectiveSpace
from .base import Plant, step_rk4
from .nnet import NNetNetwork, load_nnet, parse_nnet

ADVISORIES = ("COC", "WL", "WR", "SL", "SR")
TURN_RATE_DEG = {"COC": 0.0, "WL": 1.5, "WR": -1.5, "SL": 3.0, "SR": -3.0}
MIRROR = {"COC": "COC", "WL": "WR", "WR": "WL", "SL": "SR", "SR": "SL"}

# input normalisation shipped with the public ACAS Xu networks
ACAS_MINS = [0.0, -3.141593, -3.141593, 100.0, 0.0]
ACAS_MAXES = [60760.0, 3.141593, 3.141593, 1200.0, 1200.0]
ACAS_MEANS = [19791.091, 0.0, 0.0, 650.0, 600.0]
ACAS_RANGES = [60261.0, 6.28318530718, 6.28318530718, 1100.0, 1200.0]


class ConfigurationError(ExplorerError, KeyError):
    pass


def wrap_angle(a):
    return (np.asarray(a, dtype=float) + np.pi) % (2.0 * np.pi) - np.pi


def turn_rate(advisory) -> float:
    """Ownship turn rate in rad/s for an advisory name or index."""
    name = ADVISORIES[advisory] if isinstance(advisory, (int, np.integer)) else advisory
    return float(np.deg2rad(TURN_RATE_DEG[name]))


def encounter_geometry(own, intruder, bearing="printed"):
    """(rho, theta, psi) network inputs from (x, y, heading) of both aircraft.

    ``bearing="printed"`` evaluates theta = arctan(dy / (dx + rho)) - heading_own,
    which is half the geometric bearing; ``"doubled"`` uses twice the arctan,
    i.e. the true bearing.  The singular case dx + rho = 0 (intruder dead
    astern) takes the limiting value pi/2 ("printed") or pi ("doubled").
    """
    dx = intruder[0] - own[0]
    dy = intruder[1] - own[1]
    rho = float(np.hypot(dx, dy))
    denom = dx + rho
    if denom > 0:
        half = float(np.arctan(dy / denom))
    else:
        half = float(np.copysign(np.pi / 2.0, dy)) if dy != 0 else np.pi / 2.0
    raw = 2.0 * half if bearing == "doubled" else half
    theta = float(wrap_angle(raw - own[2]))
    psi = float(wrap_angle(intruder[2] - own[2]))
    return rho, theta, psi


def nn_advisory(networks, rho, theta, psi, v_own, v_int, a_prev, select="argmin") -> str:
    """Advisory chosen by the network indexed by the previous advisory."""
    index = ADVISORIES.index(a_prev) if isinstance(a_prev, str) else int(a_prev)
    try:
        net = networks[index]
    except (IndexError, KeyError):
        raise ConfigurationError(f"no network for previous advisory {ADVISORIES[index]}") from None
    if net is None:
        raise ConfigurationError(f"no network for previous advisory {ADVISORIES[index]}")
    scores = net.evaluate([rho, theta, psi, v_own, v_int])
    pick = np.argmax(scores) if select == "argmax" else np.argmin(scores)
    return ADVISORIES[int(pick)]


def dubins_derivative(s, speed: float, turn: float) -> np.ndarray:
    """Rates of (x, y, heading) at constant ``speed`` and turn rate."""
    return np.array([speed * np.cos(s[2]), speed * np.sin(s[2]), turn])


def _dubins(speed):
    return lambda s, u: dubins_derivative(s, speed, u)


@dataclass(frozen=True, eq=False)
class AcasScenario:
    own: tuple
    intruder: tuple
    v_own: float
    v_int: float
    networks: tuple
    a_prev: str = "COC"
    tau: float = 0.0
    advisory_period: float = 1.0
    integration_dt: float = 0.1
    countdown: float = 0.0
    bearing: str = "printed"
    select: str = "argmin"

    def __post_init__(self):
        if not (self.v_own > 0 and self.v_int > 0):
            raise ValueError("aircraft speeds must be positive")
        if self.a_prev not in ADVISORIES:
            raise ValueError(f"unknown advisory {self.a_prev!r}")

    def inputs(self):
        return encounter_geometry(self.own, self.intruder, self.bearing)


def dubins_encounter_step(scenario: AcasScenario, u: float, dt: float) -> AcasScenario:
    """Advance both aircraft by ``dt`` seconds with intruder turn rate ``u``.

    The advisory is refreshed whenever a full advisory period has elapsed
    (and at the very first step, when ``countdown`` is zero).
    """
    own = np.asarray(scenario.own, dtype=float)
    intr = np.asarray(scenario.intruder, dtype=float)
    a_prev = scenario.a_prev
    countdown = scenario.countdown
    f_own, f_int = _dubins(scenario.v_own), _dubins(scenario.v_int)
    remaining = float(dt)
    while remaining > 1e-12:
        if countdown <= 1e-12:
            rho, theta, psi = encounter_geometry(own, intr, scenario.bearing)
            a_prev = nn_advisory(scenario.networks, rho, theta, psi, scenario.v_own,
                                 scenario.v_int, a_prev, scenario.select)
            countdown = scenario.advisory_period
        h = min(scenario.integration_dt, remaining, countdown)
        own = step_rk4(f_own, own, turn_rate(a_prev), h)
        intr = step_rk4(f_int, intr, float(u), h)
        remaining -= h
        countdown -= h
    return replace(scenario, own=tuple(own), intruder=tuple(intr), a_prev=a_prev,
                   countdown=max(countdown, 0.0))


def stub_network(a_prev: str) -> NNetNetwork:
    """Hand-built stand-in for the ACAS Xu network selected after ``a_prev``.

    Far away it prefers COC; inside roughly 10 kft it turns away from the
    side the intruder is on, strongly when very close.  The previous
    advisory gets a small hysteresis bonus.  Left/right symmetric.
    """
    # hidden: intruder on the left, on the right, closeness
    W1 = [[0, 1, 0, 0, 0], [0, -1, 0, 0, 0], [-1, 0, 0, 0, 0]]
    b1 = [0.0, 0.0, -0.162]
    # outputs: COC, WL, WR, SL, SR (lower is better)
    W2 = [[0, 0, 5], [2, 0, 0], [0, 2, 0], [4, 0, -2], [0, 4, -2]]
    b2 = [0.1, 0.3, 0.3, 0.35, 0.35]
    b2[ADVISORIES.index(a_prev)] -= 0.05
    return NNetNetwork([W1, W2], [b1, b2], ACAS_MINS, ACAS_MAXES, ACAS_MEANS, ACAS_RANGES)


def stub_network_path(a_prev: str):
    return resources.files("covexplorer.plants").joinpath("data", f"stub_{a_prev}.nnet")


def stub_networks() -> tuple:
    """The five shipped stub networks, indexed by previous advisory."""
    return tuple(parse_nnet(stub_network_path(a).read_text()) for a in ADVISORIES)


def load_acas_networks(directory, tau_index: int = 1) -> tuple:
    """Load the public ``ACASXU_run2a_<prev>_<tau>_batch_2000.nnet`` files
    for one tau index, ordered by previous advisory."""
    nets = []
    for i in range(1, len(ADVISORIES) + 1):
        path = os.path.join(directory, f"ACASXU_run2a_{i}_{tau_index}_batch_2000.nnet")
        if not os.path.exists(path):
            raise ConfigurationError(f"missing ACAS Xu network {path}")
        nets.append(load_nnet(path))
    return tuple(nets)


class AcasXuPlant(Plant):
    """State: own x, y, heading, intruder x, y, heading, advisory index.

    One plant step lasts one advisory period; the input is the intruder turn
    rate in rad/s.
    """

    name = "acas_xu"
    state_names = ("x_own", "y_own", "psi_own", "x_int", "y_int", "psi_int", "advisory")
    input_names = ("turn_int",)

    def __init__(self, v_own=200.0, v_int=200.0, x0=(0.0, 0.0, 0.0, 8000.0, 0.0, np.pi, 0.0),
                 turn_limit_deg=3.0, advisory_period=1.0, integration_dt=0.1, networks=None,
                 network_dir=None, bearing="printed", select="argmin", bounds=None, sigma=None,
                 cells_per_dim=None):
        if bounds is None:
            bounds = [(-12000.0, 28000.0), (-20000.0, 20000.0)]
        objective = ObjectiveSpace((3, 4), bounds, sigma, cells_per_dim)
        limit = float(np.deg2rad(turn_limit_deg))
        super().__init__([-limit], [limit], advisory_period, x0, objective)
        if networks is None:
            networks = load_acas_networks(network_dir) if network_dir else stub_networks()
        if bearing not in ("printed", "doubled"):
            raise ValueError("bearing must be 'printed' or 'doubled'")
        if select not in ("argmin", "argmax"):
            raise ValueError("select must be 'argmin' or 'argmax'")
        self.networks = tuple(networks)
        self.v_own, self.v_int = float(v_own), float(v_int)
        self.integration_dt = float(integration_dt)
        self.bearing, self.select = bearing, select

    def scenario(self, x) -> AcasScenario:
        x = np.asarray(x, dtype=float)
        return AcasScenario(own=tuple(x[0:3]), intruder=tuple(x[3:6]), v_own=self.v_own,
                            v_int=self.v_int, networks=self.networks,
                            a_prev=ADVISORIES[int(round(x[6]))], advisory_period=self.dt,
                            integration_dt=self.integration_dt, bearing=self.bearing,
                            select=self.select)

    def step(self, x, u):
        s = dubins_encounter_step(self.scenario(x), float(np.ravel(u)[0]), self.dt)
        return np.array([*s.own, *s.intruder, float(ADVISORIES.index(s.a_prev))])
