"""Two-phase exploration: iterative coverage-guided model training followed
by MPC-driven test-case generation, plus a uniform-random baseline."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .core import RANDOM, ExplorerError
from .coverage import OccupancyField, project, score_traces
from .geometry import BoxBound, build_regions, box_bound
from .koopman import KoopmanModel, TuneGrid, tune
from .mpc import MpcParams, Planner, run_mpc_simulation
from .refine import RefineParams, refine_training_data
from .sampler import SamplerParams, sample_target

log = logging.getLogger(__name__)

BOUNDARY_MODES = ("multi_hull", "single_hull", "box")


class PipelineError(ExplorerError, RuntimeError):
    pass


@dataclass(frozen=True)
class TrainParams:
    iterations: int = 4
    sim_count: int = 20
    cluster_count: int = 5
    rate: float = 0.5
    steps: int = 100
    margin: float = 0.05
    boundary: str = "multi_hull"
    resample_points: int = 50
    sampler: SamplerParams = SamplerParams()
    mpc: MpcParams = MpcParams()
    grid: TuneGrid = TuneGrid()
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.sim_count < self.cluster_count:
            raise ValueError("sim_count must be >= cluster_count")
        if self.boundary not in BOUNDARY_MODES:
            raise ValueError(f"boundary must be one of {BOUNDARY_MODES}")


def _rng(seed, *stream):
    return np.random.default_rng([int(seed), *map(int, stream)])


def generate_random_traces(plant, count: int, steps: int, rng) -> list:
    """``count`` traces from the initial state under i.i.d. uniform inputs."""
    if count < 1:
        raise ValueError("count must be >= 1")
    traces = []
    for _ in range(count):
        trace_seed = int(rng.integers(2 ** 63))
        inputs = plant.random_inputs(steps, np.random.default_rng(trace_seed))
        traces.append(plant.simulate(inputs, seed=trace_seed, origin=RANDOM))
    return traces


def _cluster_points(plant, clusters):
    return [project(plant.objective, np.vstack([t.states for t in c])) for c in clusters]


def sampling_region(plant, clusters, mode: str = "multi_hull", margin: float = 0.05):
    """Box over all clustered data plus the convex regions excluded from it."""
    points = _cluster_points(plant, clusters)
    box = box_bound(np.vstack(points), margin)
    if mode == "multi_hull":
        regions = build_regions(points)
    elif mode == "single_hull":
        regions = build_regions([np.vstack(points)])
    else:
        regions = []
    return box, regions


def _training_target(plant, box, regions, field_, params, rng):
    if params.boundary == "box":
        # fixed-bound baseline: uniform in the box, blind to existing coverage
        clipped = box.clip_to(plant.objective.low, plant.objective.high)
        return rng.uniform(clipped.low, clipped.high)
    return sample_target(box, regions, field_, params.sampler, rng)


@dataclass
class TrainResult:
    model: KoopmanModel
    clusters: list
    field: OccupancyField
    selected: list
    new_traces: list
    history: list = field(default_factory=list)
    regions: list = field(default_factory=list)
    box: BoxBound | None = None
    # per iteration: (clusters, regions, box)
    snapshots: list = field(default_factory=list)

    def __iter__(self):
        return iter((self.model, self.clusters, self.field))


def train_model(plant, params: TrainParams | None = None) -> TrainResult:
    """Iterative model training.

    Iteration ``i`` refines the retained traces together with the previous
    iteration's coverage-guided traces into ``cluster_count + i`` clusters,
    tunes a surrogate on the refined set, and runs ``sim_count`` MPC
    simulations toward targets drawn from the box around the clustered data
    minus the per-cluster hulls.  Iteration 0 starts from random traces.
    """
    params = params or TrainParams()
    field_ = OccupancyField(plant.objective)
    data = generate_random_traces(plant, params.sim_count, params.steps, _rng(params.seed, 0))
    new = []
    history = []
    snapshots = []
    model = clusters = box = None
    regions = []
    k = params.cluster_count
    for it in range(params.iterations):
        t0 = time.perf_counter()
        try:
            data = data + new
            refine = RefineParams(k=k, rate=params.rate, resample_points=params.resample_points,
                                  seed=params.seed * 1009 + it)
            data, clusters = refine_training_data(data, refine)
            model = tune(data, params.grid, seed=params.seed * 1009 + it)
            box, regions = sampling_region(plant, clusters, params.boundary, params.margin)
            snapshots.append((clusters, regions, box))
            planner = Planner(model, plant.objective.projection, plant.input_low,
                              plant.input_high, params.mpc)
            rng = _rng(params.seed, 1, it)
            new, targets = [], []
            for j in range(params.sim_count):
                target = _training_target(plant, box, regions, field_, params, rng)
                trace = run_mpc_simulation(plant, model, plant.x0, target, params.steps,
                                           params.mpc, planner=planner,
                                           seed=params.seed * 1_000_003 + it * 1000 + j)
                field_.insert(trace.states)
                new.append(trace)
                targets.append(target.tolist())
        except ExplorerError as exc:
            raise PipelineError(f"training iteration {it}: {exc}") from exc
        entry = {
            "iteration": it,
            "clusters": k,
            "traces_in": sum(len(c) for c in clusters),
            "selected": len(data),
            "training_score": score_traces(plant.objective, data),
            "augmented_score": score_traces(plant.objective, data + new),
            "guided_field_score": field_.score(),
            "m_rff": model.obs.m_rff,
            "lengthscale": model.obs.lengthscale,
            "reg": model.reg,
            "val_rmse": model.val_rmse,
            "targets": targets,
            "seconds": time.perf_counter() - t0,
        }
        history.append(entry)
        log.info("iteration %d: k=%d selected=%d score=%.4g rmse=%.4g m_rff=%d",
                 it, k, len(data), entry["training_score"], model.val_rmse, model.obs.m_rff)
        k += 1
    return TrainResult(model=model, clusters=clusters, field=field_, selected=data,
                       new_traces=new, history=history, regions=regions, box=box,
                       snapshots=snapshots)


@dataclass
class TestCase:
    target: np.ndarray
    inputs: np.ndarray
    trace: object
    score: float


@dataclass
class TestSuite:
    cases: list
    score: float
    scores: list

    @property
    def traces(self):
        return [c.trace for c in self.cases]


def generate_test_cases(plant, model, count: int, params: TrainParams | None = None,
                        field: OccupancyField | None = None, rng=None,
                        steps: int | None = None) -> TestSuite:
    """Run ``count`` MPC simulations toward targets sampled over the full
    objective bounds.

    ``field`` (typically the training field) steers sampling and absorbs every
    new trace.  The suite's own scores count only the suite's traces.
    """
    params = params or TrainParams()
    steps = params.steps if steps is None else steps
    if field is None:
        field = OccupancyField(plant.objective)
    if rng is None:
        rng = _rng(params.seed, 2)
    suite_field = OccupancyField(plant.objective)
    space = plant.objective
    box = BoxBound(space.low, space.high)
    planner = Planner(model, space.projection, plant.input_low, plant.input_high, params.mpc)
    cases, scores = [], []
    for j in range(count):
        target = sample_target(box, [], field, params.sampler, rng)
        trace = run_mpc_simulation(plant, model, plant.x0, target, steps, params.mpc,
                                   planner=planner, seed=params.seed * 1_000_003 + 900_000 + j)
        field.insert(trace.states)
        suite_field.insert(trace.states)
        scores.append(suite_field.score())
        cases.append(TestCase(target=target, inputs=trace.inputs, trace=trace, score=scores[-1]))
    final = suite_field.score() if cases else 0.0
    return TestSuite(cases=cases, score=final, scores=scores)


@dataclass
class MethodResult:
    method: str
    scores: list
    plant_steps: list

    @property
    def mean(self) -> float:
        return float(np.mean(self.scores))

    @property
    def std(self) -> float:
        return float(np.std(self.scores))


def run_coverage_guided(plant, count: int, params: TrainParams):
    trained = train_model(plant, params)
    suite = generate_test_cases(plant, trained.model, count, params, field=trained.field,
                                rng=_rng(params.seed, 2))
    return trained, suite


def run_random_baseline(plant, count: int, steps: int, seed: int) -> list:
    return generate_random_traces(plant, count, steps, _rng(seed, 3))


def compare_methods(plant, count: int, seeds, params: TrainParams | None = None) -> dict:
    """Coverage-guided versus uniform-random test cases with equal case count
    and trace length, scored on fresh fields.  Returns a report dict."""
    params = params or TrainParams()
    seeds = list(seeds)
    guided = MethodResult("coverage-guided", [], [])
    random_ = MethodResult("random", [], [])
    per_seed = []
    for seed in seeds:
        p = _with_seed(params, seed)
        _, suite = run_coverage_guided(plant, count, p)
        baseline = run_random_baseline(plant, count, p.steps, seed)
        g_score = score_traces(plant.objective, suite.traces)
        r_score = score_traces(plant.objective, baseline)
        guided.scores.append(g_score)
        guided.plant_steps.append(sum(t.steps for t in suite.traces))
        random_.scores.append(r_score)
        random_.plant_steps.append(sum(t.steps for t in baseline))
        per_seed.append({"seed": seed, "method": guided.method, "score": g_score})
        per_seed.append({"seed": seed, "method": random_.method, "score": r_score})
        log.info("seed %d: guided %.4g random %.4g", seed, g_score, r_score)
    rows = [{"method": m.method, "mean": m.mean, "std": m.std, "runs": len(m.scores),
             "plant_steps": int(sum(m.plant_steps))} for m in (guided, random_)]
    return {"plant": plant.name, "count": count, "steps": params.steps, "seeds": seeds,
            "rows": rows, "per_seed": per_seed}


def _with_seed(params: TrainParams, seed: int) -> TrainParams:
    return replace(params, seed=int(seed))
