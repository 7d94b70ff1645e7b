import numpy as np
import pytest
from scipy.optimize import linprog

from covexplorer.core import DataTrace


def linear_traces(A, B, count, steps, seed=0, scale=1.0):
    """Noiseless traces of x+ = A x + B u with uniform random x0 and u."""
    A, B = np.atleast_2d(A), np.atleast_2d(B)
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        x = rng.uniform(-scale, scale, A.shape[0])
        us = rng.uniform(-1, 1, (steps, B.shape[1]))
        xs = [x]
        for u in us:
            xs.append(A @ xs[-1] + B @ u)
        out.append(DataTrace(np.array(xs), us, 1.0))
    return out


def constant_trace(value, n=1, steps=4):
    states = np.full((steps + 1, n), float(value))
    return DataTrace(states, np.zeros((steps, 1)), 1.0)


def lp_in_hull(vertices, p, tol=1e-9):
    """Feasibility of sum(l_i v_i) = p, l >= 0, sum(l) = 1."""
    V = np.asarray(vertices, dtype=float)
    k = len(V)
    A_eq = np.vstack([V.T, np.ones((1, k))])
    b_eq = np.append(p, 1.0)
    res = linprog(np.zeros(k), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * k, method="highs",
                  options={"primal_feasibility_tolerance": tol})
    return res.status == 0


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


from covexplorer.coverage import ObjectiveSpace  # noqa: E402
from covexplorer.koopman import KoopmanModel, ObservableMap  # noqa: E402
from covexplorer.plants import Plant  # noqa: E402


class LinearPlant(Plant):
    """x+ = A x + B u with a box on u; the test double for exact-model MPC."""

    name = "linear"

    def __init__(self, A, B, low, high, x0, bounds):
        self.A, self.B = np.atleast_2d(A).astype(float), np.atleast_2d(B).astype(float)
        self.state_names = tuple(f"x{i}" for i in range(self.A.shape[0]))
        self.input_names = tuple(f"u{j}" for j in range(self.B.shape[1]))
        proj = tuple(range(len(bounds)))
        super().__init__(low, high, 1.0, x0, ObjectiveSpace(proj, bounds))

    def step(self, x, u):
        return self.A @ x + self.B @ np.atleast_1d(u)

    def model(self):
        return KoopmanModel(A=self.A, B=self.B, obs=ObservableMap(n=self.A.shape[0]), reg=0.0)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        terminalreporter.write_line(results[key])
