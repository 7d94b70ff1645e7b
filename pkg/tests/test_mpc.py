import itertools

import numpy as np
import pytest

from conftest import LinearPlant
from covexplorer.core import COVERAGE_GUIDED
from covexplorer.koopman import KoopmanModel, ObservableMap
from covexplorer.mpc import MpcParams, Planner, plan, run_mpc_simulation


def integrator(lam=0.0, H=10):
    model = KoopmanModel(A=np.eye(1), B=np.eye(1), obs=ObservableMap(n=1), reg=0)
    return model, MpcParams(horizon=H, effort_weight=lam, pgd_iterations=500)


def random_instance(rng):
    n, w, H = int(rng.integers(2, 5)), int(rng.integers(1, 3)), int(rng.integers(3, 9))
    A = rng.normal(size=(n, n)) * 0.5
    B = rng.normal(size=(n, w))
    model = KoopmanModel(A=A, B=B, obs=ObservableMap(n=n), reg=0)
    params = MpcParams(horizon=H, effort_weight=float(rng.uniform(0, 0.1)))
    proj = tuple(sorted(rng.choice(n, 2, replace=False).tolist()))
    return Planner(model, proj, -np.ones(w), np.ones(w), params), rng.normal(size=n), rng.normal(size=2)


def test_uniform_split_with_effort():
    model, params = integrator(lam=1e-3)
    U = plan(model, [0.0], [5.0], params, (0,), [-1.0], [1.0])
    # stationarity of (sum u - 5)^2 + lam |u|^2 gives u_i = 5 / (H + lam)
    assert np.allclose(U.ravel(), 5.0 / (10 + 1e-3), atol=1e-4)


def test_integrator_reaches_target_without_effort():
    model, params = integrator(lam=0.0)
    planner = Planner(model, (0,), [-1.0], [1.0], params)
    U = planner.plan([0.0], [5.0])
    assert U.sum() == pytest.approx(5.0, abs=1e-6)
    assert np.all(np.abs(U) <= 1.0)


def test_plan_against_coarse_lattice():
    model, params = integrator(lam=0.05, H=3)
    planner = Planner(model, (0,), [-1.0], [1.0], params)
    U = planner.plan([0.0], [2.0])
    grid = np.linspace(-1, 1, 41)
    best = min(planner.cost(np.array(u), [0.0], [2.0]) for u in itertools.product(grid, repeat=3))
    assert planner.cost(U, [0.0], [2.0]) <= best + 1e-9


def test_target_at_current_state_gives_zero_input():
    model, params = integrator(lam=1e-2)
    U = plan(model, [3.0], [3.0], params, (0,), [-1.0], [1.0])
    assert np.allclose(U, 0.0, atol=1e-12)


def test_gradient_matches_finite_differences(rng):
    for _ in range(20):
        planner, g0, target = random_instance(rng)
        U = rng.uniform(-1, 1, planner.M.shape[1])
        g = planner.gradient(U, g0, target)
        h = 1e-6
        fd = np.array([(planner.cost(U + h * e, g0, target) - planner.cost(U - h * e, g0, target))
                       / (2 * h) for e in np.eye(U.size)])
        assert np.linalg.norm(g - fd) <= 1e-5 * max(np.linalg.norm(g), 1e-8)


def test_cost_is_convex_along_segments(rng):
    for _ in range(20):
        planner, g0, target = random_instance(rng)
        a, b = rng.uniform(-1, 1, (2, planner.M.shape[1]))
        fa, fb = planner.cost(a, g0, target), planner.cost(b, g0, target)
        for t in np.linspace(0, 1, 11):
            assert planner.cost((1 - t) * a + t * b, g0, target) <= (1 - t) * fa + t * fb + 1e-8


def test_plan_beats_zero_and_random(rng):
    for _ in range(10):
        planner, g0, target = random_instance(rng)
        U = planner.plan(g0, target).ravel()
        best = planner.cost(U, g0, target)
        assert np.all(np.abs(U) <= 1.0)
        assert best <= planner.cost(np.zeros_like(U), g0, target) + 1e-9
        for _ in range(100):
            assert best <= planner.cost(rng.uniform(-1, 1, U.size), g0, target) + 1e-9


def test_plan_deterministic(rng):
    planner, g0, target = random_instance(rng)
    assert np.array_equal(planner.plan(g0, target), planner.plan(g0, target))


def test_receding_horizon_exact_model():
    plant = LinearPlant([[1.0]], [[1.0]], [-1.0], [1.0], [0.0], [(-20.0, 20.0)])
    params = MpcParams(horizon=10, effort_weight=1e-4, target_tolerance=0.01)
    # error shrinks by (1 - 1/H) per replan, so ~60 steps are needed
    trace = run_mpc_simulation(plant, plant.model(), plant.x0, [5.0], 100, params)
    assert abs(trace.states[-1, 0] - 5.0) <= 0.01
    assert trace.origin == COVERAGE_GUIDED
    assert np.all(np.abs(trace.inputs) <= 1.0)


def test_stops_immediately_at_target():
    plant = LinearPlant([[1.0]], [[1.0]], [-1.0], [1.0], [2.0], [(-20.0, 20.0)])
    trace = run_mpc_simulation(plant, plant.model(), plant.x0, [2.0], 10,
                               MpcParams(target_tolerance=1e-9))
    assert trace.steps == 0 and trace.states.shape == (1, 1)


def test_car_mpc_beats_zero_input():
    from covexplorer.koopman import tune, TuneGrid
    from covexplorer.plants import KinematicCar

    car = KinematicCar()
    rng = np.random.default_rng(0)
    traces = [car.simulate(car.random_inputs(60, rng)) for _ in range(12)]
    model = tune(traces, TuneGrid(m_rff=(0, 40), lengthscale_factors=(1.0, 2.0)), seed=0)
    target = np.array([120.0, 60.0])
    trace = run_mpc_simulation(car, model, car.x0, target, 60)
    idle = car.simulate(np.zeros((60, 2)))
    dist = lambda t: np.linalg.norm(t.states[-1, 2:] - target)
    assert dist(trace) < dist(idle)
    assert np.all(trace.inputs >= car.input_low) and np.all(trace.inputs <= car.input_high)
