"""``explorer train|generate|score|compare``.

Exit codes: 0 success, 2 configuration error, 3 data/model error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, ExperimentConfig, load_config
from .core import DimensionMismatchError, ExplorerError
from .coverage import OccupancyField
from .koopman import FitError
from .mpc import SimulationError
from .pipeline import (PipelineError, compare_methods, generate_test_cases, train_model)
from .plants import IntegrationError

log = logging.getLogger("covexplorer")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class DataError(ExplorerError):
    pass


def _out_dir(args, cfg: ExperimentConfig) -> Path:
    out = Path(args.out or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def cmd_train(args) -> int:
    cfg = _config(args)
    plant = cfg.make_plant()
    out = _out_dir(args, cfg)
    manifest = {"command": "train", "config": cfg.echo()}
    io.write_json(manifest, out / "manifest.json")
    result = train_model(plant, cfg.train)
    io.save_model(result.model, out / "model")
    it_dir = out / "iterations"
    it_dir.mkdir(exist_ok=True)
    trace_dir = out / "traces"
    trace_dir.mkdir(exist_ok=True)
    for i, t in enumerate(result.selected + result.new_traces):
        io.write_trace(t, trace_dir / f"train_{i:04d}.csv")
    for i, (clusters, regions, box) in enumerate(result.snapshots):
        io.write_clusters(clusters, plant.objective, it_dir / f"clusters_{i:02d}.csv")
        io.write_regions(regions, it_dir / f"regions_{i:02d}.csv")
        io.write_json({"low": box.low, "high": box.high}, it_dir / f"box_{i:02d}.json")
    io.write_field_snapshot(result.field, out / "field.csv")
    iterations = [{k: v for k, v in h.items() if k != "seconds"} for h in result.history]
    manifest.update({
        "iterations": iterations,
        "model": "model/model.json",
        "field": "field.csv",
        "traces": sorted(f"traces/{p.name}" for p in trace_dir.glob("*.csv")),
        "plot_data": sorted(f"iterations/{p.name}" for p in it_dir.iterdir()),
    })
    io.write_json(manifest, out / "manifest.json")
    for h in iterations:
        print(f"iteration {h['iteration']}: clusters={h['clusters']} selected={h['selected']} "
              f"training_score={h['training_score']:.6g} m_rff={h['m_rff']} "
              f"val_rmse={h['val_rmse']:.6g}")
    print(f"manifest sha256 {_sha(out / 'manifest.json')}")
    return EXIT_OK


def cmd_generate(args) -> int:
    cfg = _config(args)
    plant = cfg.make_plant()
    model = io.load_model(args.model)
    if model.n != plant.n or model.w != plant.w:
        raise DimensionMismatchError(
            f"model (n={model.n}, w={model.w}) does not fit plant {plant.name} "
            f"(n={plant.n}, w={plant.w})")
    field = None
    field_path = args.field
    if field_path is None:
        candidate = Path(args.model)
        candidate = (candidate if candidate.is_dir() else candidate.parent).parent / "field.csv"
        field_path = candidate if candidate.exists() else None
    if field_path is not None:
        field = io.read_field_snapshot(field_path, plant.objective)
    out = _out_dir(args, cfg)
    manifest = {"command": "generate", "config": cfg.echo(), "model": str(args.model),
                "field": str(field_path) if field_path else None}
    io.write_json(manifest, out / "manifest.json")
    rng = np.random.default_rng([cfg.seed, 2])
    suite = generate_test_cases(plant, model, cfg.test_cases, cfg.train, field=field, rng=rng)
    case_dir = out / "cases"
    case_dir.mkdir(exist_ok=True)
    for old in case_dir.glob("case_*"):
        old.unlink()
    with open(out / "targets.csv", "w") as fh:
        fh.write("case," + ",".join(f"p{i}" for i in range(plant.objective.dim)) + ",score\n")
        for j, case in enumerate(suite.cases):
            io.write_trace(case.trace, case_dir / f"case_{j:04d}.csv")
            fh.write(f"{j}," + ",".join(repr(float(v)) for v in case.target)
                     + f",{case.score!r}\n")
    report = {"test_cases": len(suite.cases), "score": suite.score, "scores": suite.scores}
    io.write_json(report, out / "score.json")
    manifest.update({"cases": [f"cases/case_{j:04d}.csv" for j in range(len(suite.cases))],
                     "targets": "targets.csv", "score": suite.score,
                     "incremental_scores": suite.scores})
    io.write_json(manifest, out / "manifest.json")
    print(f"test cases: {len(suite.cases)}")
    print(f"coverage score: {suite.score!r}")
    return EXIT_OK


def _collect_traces(paths):
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            files.extend(io.trace_files(p))
        elif p.exists():
            files.append(p)
        else:
            raise DataError(f"no such trace file or directory: {p}")
    return files


def cmd_score(args) -> int:
    if args.config is None:
        raise ConfigError("score needs --config with a [plant] or [objective] section")
    cfg = _config(args)
    space = cfg.objective_space()
    files = _collect_traces(args.traces)
    traces = [io.read_trace(f) for f in files]
    if len({t.n for t in traces}) > 1:
        raise DimensionMismatchError("trace files have different state dimensions")
    field = OccupancyField(space)
    for t in traces:
        field.insert(t.states)
    score = field.score() if traces else 0.0
    print(f"traces: {len(traces)}")
    print(f"coverage score: {score!r}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config(args)
    plant = cfg.make_plant()
    out = _out_dir(args, cfg)
    seeds = cfg.seeds if args.seed is None else [args.seed]
    manifest = {"command": "compare", "config": cfg.echo()}
    io.write_json(manifest, out / "manifest.json")
    report = compare_methods(plant, cfg.test_cases, seeds, cfg.train)
    with open(out / "compare_scores.csv", "w") as fh:
        fh.write("seed,method,score\n")
        for row in report["per_seed"]:
            fh.write(f"{row['seed']},{row['method']},{row['score']!r}\n")
    manifest.update({"report": report, "scores": "compare_scores.csv"})
    io.write_json(manifest, out / "manifest.json")
    print(f"{'method':<18}{'mean':>14}{'std':>14}{'runs':>6}")
    for row in report["rows"]:
        print(f"{row['method']:<18}{row['mean']:>14.6g}{row['std']:>14.6g}{row['runs']:>6}")
    return EXIT_OK


def _sha(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="explorer",
                                     description="Coverage-guided test generation for CPS.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="TOML experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("train", help="iterative coverage-guided model training")
    common(p)
    p.set_defaults(func=cmd_train)
    p = sub.add_parser("generate", help="MPC test-case generation with a trained model")
    common(p)
    p.add_argument("--model", required=True, help="model directory or model.json")
    p.add_argument("--field", default=None, help="occupancy snapshot to continue from")
    p.set_defaults(func=cmd_generate)
    p = sub.add_parser("score", help="coverage score of stored traces")
    common(p)
    p.add_argument("traces", nargs="*", help="trace CSV files or directories")
    p.set_defaults(func=cmd_score)
    p = sub.add_parser("compare", help="coverage-guided vs random baseline over seeds")
    common(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, FitError, IntegrationError, np.linalg.LinAlgError,
            FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except PipelineError as exc:
        cause = exc.__cause__
        if isinstance(cause, (SimulationError, FitError, IntegrationError)):
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ExplorerError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
