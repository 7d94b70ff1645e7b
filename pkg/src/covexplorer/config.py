"""Experiment configuration: a TOML file with nested sections, validated
strictly (unknown keys are errors)."""

from __future__ import annotations

import inspect
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .core import ExplorerError
from .coverage import ObjectiveSpace
from .koopman import TuneGrid
from .mpc import MpcParams
from .pipeline import TrainParams
from .plants import PLANTS, make_plant
from .sampler import SamplerParams


class ConfigError(ExplorerError, ValueError):
    pass


TOP_KEYS = {"seed", "out", "test_cases", "seeds", "plant", "objective", "train", "sampler",
            "mpc", "tune"}
OBJECTIVE_KEYS = {"projection", "bounds", "sigma", "cells_per_dim"}
TRAIN_KEYS = {f.name for f in fields(TrainParams)} - {"sampler", "mpc", "grid", "seed"}
TUNE_KEYS = {f.name for f in fields(TuneGrid)}
MPC_KEYS = {f.name for f in fields(MpcParams)}
SAMPLER_KEYS = {f.name for f in fields(SamplerParams)}


@dataclass
class ExperimentConfig:
    raw: dict
    seed: int = 0
    out: str = "run"
    test_cases: int = 50
    seeds: list = field(default_factory=lambda: [0])
    plant_name: str | None = None
    plant_params: dict = field(default_factory=dict)
    objective: dict = field(default_factory=dict)
    train: TrainParams = field(default_factory=TrainParams)

    def make_plant(self):
        if self.plant_name is None:
            raise ConfigError("config has no [plant] section")
        params = dict(self.plant_params)
        for key in ("bounds", "sigma", "cells_per_dim"):
            if key in self.objective:
                params[key] = self.objective[key]
        try:
            return make_plant(self.plant_name, **params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[plant]: {exc}") from None

    def objective_space(self) -> ObjectiveSpace:
        if self.plant_name is not None:
            space = self.make_plant().objective
            if "projection" in self.objective and tuple(self.objective["projection"]) != space.projection:
                raise ConfigError("[objective] projection conflicts with the plant's objective")
            return space
        if "projection" not in self.objective or "bounds" not in self.objective:
            raise ConfigError("[objective] needs projection and bounds when no plant is given")
        try:
            return ObjectiveSpace(self.objective["projection"], self.objective["bounds"],
                                  self.objective.get("sigma"), self.objective.get("cells_per_dim"))
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"[objective]: {exc}") from None

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=int(seed), train=replace(self.train, seed=int(seed)))

    def echo(self) -> dict:
        """Normalised, fully-resolved config for manifests."""
        t = self.train
        return {
            "seed": self.seed,
            "test_cases": self.test_cases,
            "seeds": list(self.seeds),
            "plant": {"name": self.plant_name, **self.plant_params},
            "objective": self.objective_space().to_dict(),
            "train": {k: getattr(t, k) for k in sorted(TRAIN_KEYS)},
            "sampler": {k: getattr(t.sampler, k) for k in sorted(SAMPLER_KEYS)},
            "mpc": {k: getattr(t.mpc, k) for k in sorted(MPC_KEYS)},
            "tune": {k: list(v) if isinstance(v, tuple) else v
                     for k, v in ((k, getattr(t.grid, k)) for k in sorted(TUNE_KEYS))},
        }


def _check(section: str, table, allowed):
    if not isinstance(table, dict):
        raise ConfigError(f"[{section}] must be a table")
    unknown = set(table) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")


def _build(cls, section, table):
    kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in table.items()}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}]: {exc}") from None


def parse_config(data: dict) -> ExperimentConfig:
    _check("top level", data, TOP_KEYS)
    plant = dict(data.get("plant", {}))
    plant_name = plant.pop("name", None)
    if plant_name is not None:
        if plant_name not in PLANTS:
            raise ConfigError(f"unknown plant {plant_name!r}; choose from {sorted(PLANTS)}")
        sig = inspect.signature(PLANTS[plant_name].__init__)
        allowed = set(sig.parameters) - {"self", "bounds", "sigma", "cells_per_dim", "networks"}
        _check("plant", plant, allowed)
    elif plant:
        raise ConfigError("[plant] needs a name")
    objective = dict(data.get("objective", {}))
    _check("objective", objective, OBJECTIVE_KEYS)
    _check("train", data.get("train", {}), TRAIN_KEYS)
    _check("sampler", data.get("sampler", {}), SAMPLER_KEYS)
    _check("mpc", data.get("mpc", {}), MPC_KEYS)
    _check("tune", data.get("tune", {}), TUNE_KEYS)
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    train_kwargs = dict(data.get("train", {}))
    train_kwargs["sampler"] = _build(SamplerParams, "sampler", data.get("sampler", {}))
    train_kwargs["mpc"] = _build(MpcParams, "mpc", data.get("mpc", {}))
    train_kwargs["grid"] = _build(TuneGrid, "tune", data.get("tune", {}))
    train_kwargs["seed"] = seed
    try:
        train = TrainParams(**train_kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[train]: {exc}") from None
    test_cases = data.get("test_cases", 50)
    if not isinstance(test_cases, int) or test_cases < 0:
        raise ConfigError("test_cases must be a non-negative integer")
    seeds = data.get("seeds", [seed])
    if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) for s in seeds):
        raise ConfigError("seeds must be a non-empty list of integers")
    cfg = ExperimentConfig(raw=data, seed=seed, out=str(data.get("out", "run")),
                           test_cases=test_cases, seeds=seeds, plant_name=plant_name,
                           plant_params=plant, objective=objective, train=train)
    cfg.objective_space()
    return cfg


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = tomllib.loads(p.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from None
    return parse_config(data)
