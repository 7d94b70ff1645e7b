import numpy as np
import pytest

from covexplorer.core import COVERAGE_GUIDED, RANDOM
from covexplorer.coverage import OccupancyField, score_traces
from covexplorer.koopman import TuneGrid
from covexplorer.pipeline import (TrainParams, compare_methods, generate_random_traces,
                                  generate_test_cases, sampling_region, train_model)
from covexplorer.plants import KinematicCar, PointMass

SMALL = dict(sim_count=8, cluster_count=3, steps=30,
             grid=TuneGrid(m_rff=(0, 20), lengthscale_factors=(1.0,), regs=(1e-6, 1e-3)))


@pytest.fixture(scope="module")
def car():
    return KinematicCar()


@pytest.fixture(scope="module")
def trained(car):
    return train_model(car, TrainParams(iterations=3, **SMALL))


def test_random_traces(car):
    with pytest.raises(ValueError):
        generate_random_traces(car, 0, 10, np.random.default_rng(0))
    a = generate_random_traces(car, 3, 10, np.random.default_rng(4))
    b = generate_random_traces(car, 3, 10, np.random.default_rng(4))
    assert all(x.states.tobytes() == y.states.tobytes() for x, y in zip(a, b))
    assert all(t.origin == RANDOM for t in a)
    assert all(np.all(t.inputs >= car.input_low) and np.all(t.inputs <= car.input_high) for t in a)


def test_single_iteration_fits_random_data(car):
    res = train_model(car, TrainParams(iterations=1, **SMALL))
    assert len(res.history) == 1
    assert all(t.origin == RANDOM for t in res.selected)
    assert all(t.origin == COVERAGE_GUIDED for t in res.new_traces)


def test_cluster_count_grows(trained):
    assert [h["clusters"] for h in trained.history] == [3, 4, 5]
    assert len(trained.clusters) == 5
    assert len(trained.snapshots) == 3


def test_refinement_never_grows(trained):
    for h in trained.history:
        assert h["selected"] <= h["traces_in"]


def test_field_holds_only_guided_traces(car, trained):
    model, clusters, field = trained
    assert field.score() > 0
    assert model.n == car.n


def test_sampling_region_modes(car):
    rng = np.random.default_rng(0)
    traces = generate_random_traces(car, 6, 20, rng)
    clusters = [traces[:3], traces[3:]]
    box, regions = sampling_region(car, clusters, "multi_hull")
    assert len(regions) == 2
    assert len(sampling_region(car, clusters, "single_hull")[1]) == 1
    assert sampling_region(car, clusters, "box")[1] == []


def test_generate_suite(car, trained):
    field = trained.field.copy()
    before = field.score()
    suite = generate_test_cases(car, trained.model, 6, TrainParams(**SMALL), field=field)
    assert len(suite.cases) == 6
    assert all(b >= a - 1e-9 for a, b in zip(suite.scores, suite.scores[1:]))
    assert suite.score == pytest.approx(score_traces(car.objective, suite.traces))
    assert field.score() >= before
    space = car.objective
    assert all(np.all(c.target >= space.low) and np.all(c.target <= space.high) for c in suite.cases)


def test_empty_suite(car, trained):
    suite = generate_test_cases(car, trained.model, 0, TrainParams(**SMALL))
    assert suite.cases == [] and suite.score == 0.0


def test_compare_single_seed(car):
    params = TrainParams(iterations=2, **SMALL)
    report = compare_methods(car, 4, [7], params)
    assert len(report["rows"]) == 2
    assert all(r["std"] == 0.0 for r in report["rows"])
    steps = [r["plant_steps"] for r in report["rows"]]
    assert steps[0] <= steps[1] == 4 * params.steps
    assert len(report["per_seed"]) == 2


def test_training_reproducible(car):
    params = TrainParams(iterations=2, **SMALL, seed=3)
    a, b = train_model(car, params), train_model(car, params)
    assert np.array_equal(a.model.A, b.model.A)
    assert [h["training_score"] for h in a.history] == [h["training_score"] for h in b.history]


def test_point_mass_guided_beats_random():
    pm = PointMass()
    params = TrainParams(iterations=2, **SMALL)
    report = compare_methods(pm, 8, [0], params)
    guided, random_ = report["rows"]
    assert guided["mean"] > random_["mean"]


def test_param_validation():
    with pytest.raises(ValueError):
        TrainParams(iterations=0)
    with pytest.raises(ValueError):
        TrainParams(sim_count=2, cluster_count=5)
    with pytest.raises(ValueError):
        TrainParams(boundary="circle")
