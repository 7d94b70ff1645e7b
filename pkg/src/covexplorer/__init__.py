"""Coverage-guided test generation for cyber-physical systems.

A Koopman surrogate with random Fourier observables is trained on
progressively more diverse simulation data, then steered by MPC toward
targets drawn from poorly covered parts of an objective space.
"""

from .core import DataTrace, DegenerateTraceError, DimensionMismatchError, ExplorerError
from .coverage import ObjectiveSpace, OccupancyField, coverage_score, score_states, score_traces
from .geometry import BoxBound, ConvexRegion, box_bound, build_regions
from .koopman import KoopmanModel, ObservableMap, TuneGrid, fit_edmd, predict, tune
from .mpc import MpcParams, Planner, plan, run_mpc_simulation
from .pipeline import (TrainParams, compare_methods, generate_test_cases, run_random_baseline,
                       train_model)
from .plants import PLANTS, AcasXuPlant, KinematicCar, PointMass, make_plant
from .refine import RefineParams, refine_training_data
from .sampler import SamplerParams, sample_target

__version__ = "0.1.0"

__all__ = [
    "BoxBound", "ConvexRegion", "DataTrace", "DegenerateTraceError", "DimensionMismatchError",
    "AcasXuPlant", "ExplorerError", "KinematicCar", "PointMass", "KoopmanModel", "MpcParams", "ObjectiveSpace", "ObservableMap",
    "OccupancyField", "PLANTS", "Planner", "RefineParams", "SamplerParams", "TrainParams",
    "TuneGrid", "box_bound", "build_regions", "compare_methods", "coverage_score", "fit_edmd",
    "generate_test_cases", "make_plant", "plan", "predict", "refine_training_data",
    "run_mpc_simulation", "run_random_baseline", "sample_target", "score_states",
    "score_traces", "train_model", "tune",
]
