"""File formats: trace CSV + sidecar JSON, model JSON + CSV matrices, and
plot-data CSVs for fields, regions and cluster assignments.

Floats are written with 17 significant digits so every file round-trips
bit-exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .core import DataTrace, ExplorerError
from .koopman import KoopmanModel, ObservableMap


class TraceFormatError(ExplorerError, ValueError):
    pass


class ModelFormatError(ExplorerError, ValueError):
    pass


def _f(v) -> str:
    return repr(float(v))


def write_trace(trace: DataTrace, path) -> Path:
    """Write ``path`` (CSV) and its sidecar manifest ``path.with_suffix('.json')``."""
    path = Path(path)
    n, w = trace.n, trace.w
    header = ["t"] + [f"x{i}" for i in range(n)] + [f"u{j}" for j in range(w)]
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for k, x in enumerate(trace.states):
            u = [_f(v) for v in trace.inputs[k]] if k < trace.steps else [""] * w
            out.writerow([_f(k * trace.dt)] + [_f(v) for v in x] + u)
    meta = {"n": n, "w": w, "dt": trace.dt, "seed": trace.seed, "origin": trace.origin}
    if trace.meta:
        meta["meta"] = trace.meta
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def read_trace(path) -> DataTrace:
    path = Path(path)
    side = path.with_suffix(".json")
    meta = json.loads(side.read_text()) if side.exists() else {}
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise TraceFormatError(f"{path}: empty file")
    header = rows[0]
    if not header or header[0] != "t":
        raise TraceFormatError(f"{path}: row 1: header must start with 't'")
    n = sum(1 for h in header if h.startswith("x"))
    w = sum(1 for h in header if h.startswith("u"))
    if header != ["t"] + [f"x{i}" for i in range(n)] + [f"u{j}" for j in range(w)]:
        raise TraceFormatError(f"{path}: row 1: malformed header {header}")
    if meta and (meta.get("n", n) != n or meta.get("w", w) != w):
        raise TraceFormatError(f"{path}: header dimensions disagree with {side.name}")
    states, inputs, times = [], [], []
    body = rows[1:]
    for i, row in enumerate(body, start=2):
        if len(row) != 1 + n + w:
            raise TraceFormatError(f"{path}: row {i}: expected {1 + n + w} fields, got {len(row)}")
        last = i == len(body) + 1
        try:
            times.append(float(row[0]))
            states.append([float(v) for v in row[1:1 + n]])
            if last:
                if any(v.strip() for v in row[1 + n:]):
                    raise TraceFormatError(f"{path}: row {i}: final row must have empty inputs")
            else:
                inputs.append([float(v) for v in row[1 + n:]])
        except ValueError as exc:
            if isinstance(exc, TraceFormatError):
                raise
            raise TraceFormatError(f"{path}: row {i}: {exc}") from None
    if not states:
        raise TraceFormatError(f"{path}: no data rows")
    dt = meta.get("dt")
    if dt is None:
        dt = times[1] - times[0] if len(times) > 1 else 1.0
    return DataTrace(np.array(states), np.array(inputs).reshape(len(inputs), w), dt,
                     seed=meta.get("seed"), origin=meta.get("origin", "random"),
                     meta=meta.get("meta", {}))


def trace_files(directory) -> list:
    return sorted(p for p in Path(directory).glob("*.csv") if p.with_suffix(".json").exists()
                  or _looks_like_trace(p))


def _looks_like_trace(path) -> bool:
    with open(path) as fh:
        return fh.readline().startswith("t,")


def _write_matrix(path, M):
    M = np.atleast_2d(M)
    with open(path, "w") as fh:
        for row in M:
            fh.write(",".join(_f(v) for v in row) + "\n")


def _read_matrix(path, name, shape):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelFormatError(f"cannot read matrix {name}: {exc}") from None
    rows = [line for line in text.splitlines() if line.strip()]
    try:
        M = np.array([[float(v) for v in line.split(",")] for line in rows], dtype=float)
    except ValueError as exc:
        raise ModelFormatError(f"matrix {name}: {exc}") from None
    if shape[0] == 0 or shape[1] == 0:
        return np.zeros(shape)
    if M.shape != tuple(shape):
        raise ModelFormatError(f"matrix {name}: expected shape {tuple(shape)}, found {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ModelFormatError(f"matrix {name}: non-finite entries")
    return M


def save_model(model: KoopmanModel, directory) -> Path:
    """Write ``model.json`` plus A.csv, B.csv, frequencies.csv, phases.csv."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    obs = model.obs
    manifest = {
        "n": obs.n, "w": model.w, "m_rff": obs.m_rff, "lengthscale": obs.lengthscale,
        "seed": obs.seed, "reg": model.reg, "val_rmse": model.val_rmse, "dt": model.dt,
        "matrices": {"A": "A.csv", "B": "B.csv", "frequencies": "frequencies.csv",
                     "phases": "phases.csv"},
    }
    _write_matrix(d / "A.csv", model.A)
    _write_matrix(d / "B.csv", model.B)
    _write_matrix(d / "frequencies.csv", obs.frequencies if obs.m_rff else np.zeros((0, 0)))
    _write_matrix(d / "phases.csv", obs.phases[None, :] if obs.m_rff else np.zeros((0, 0)))
    (d / "model.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return d / "model.json"


def load_model(path) -> KoopmanModel:
    p = Path(path)
    if p.is_dir():
        p = p / "model.json"
    try:
        manifest = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot read model manifest {p}: {exc}") from None
    d = p.parent
    try:
        n, w, m_rff = int(manifest["n"]), int(manifest["w"]), int(manifest["m_rff"])
        files = manifest.get("matrices", {})
        m = n + m_rff
        A = _read_matrix(d / files.get("A", "A.csv"), "A", (m, m))
        B = _read_matrix(d / files.get("B", "B.csv"), "B", (m, w))
        freqs = _read_matrix(d / files.get("frequencies", "frequencies.csv"), "frequencies",
                             (m_rff, n))
        phases = _read_matrix(d / files.get("phases", "phases.csv"), "phases", (1, m_rff))
        obs = ObservableMap(n=n, m_rff=m_rff, lengthscale=float(manifest["lengthscale"]),
                            seed=int(manifest["seed"]), frequencies=freqs, phases=phases.ravel())
    except KeyError as exc:
        raise ModelFormatError(f"model manifest missing key {exc}") from None
    return KoopmanModel(A=A, B=B, obs=obs, reg=float(manifest["reg"]),
                        val_rmse=float(manifest.get("val_rmse", float("nan"))),
                        dt=manifest.get("dt"))


def write_field_snapshot(field, path) -> Path:
    centers = field.cell_centers()
    values = field.grid.ravel()
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow([f"b{i}" for i in range(centers.shape[1])] + ["value"])
        for c, v in zip(centers, values):
            out.writerow([_f(x) for x in c] + [_f(v)])
    return Path(path)


def write_regions(regions, path) -> Path:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        dim = regions[0].dim if regions else 0
        out.writerow(["region"] + [f"p{i}" for i in range(dim)])
        for r, region in enumerate(regions):
            for g in region.generators:
                out.writerow([r] + [_f(v) for v in g])
    return Path(path)


def write_clusters(clusters, space, path) -> Path:
    """Projected states of every clustered trace, labelled by cluster and trace."""
    from .coverage import project

    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["cluster", "trace", "step"] + [f"p{i}" for i in range(space.dim)])
        for c, members in enumerate(clusters):
            for t, trace in enumerate(members):
                for k, p in enumerate(project(space, trace.states)):
                    out.writerow([c, t, k] + [_f(v) for v in p])
    return Path(path)


def write_json(obj, path) -> Path:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return Path(path)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def read_field_snapshot(path, space):
    """Rebuild an occupancy field from a snapshot written by :func:`write_field_snapshot`."""
    from .coverage import OccupancyField

    field = OccupancyField(space)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    values = []
    for i, row in enumerate(rows[1:], start=2):
        try:
            values.append(float(row[-1]))
        except (ValueError, IndexError):
            raise TraceFormatError(f"{path}: row {i}: bad field value") from None
    if len(values) != field.grid.size:
        raise TraceFormatError(
            f"{path}: snapshot has {len(values)} cells, objective space needs {field.grid.size}")
    field.grid = np.array(values).reshape(field.grid.shape)
    return field
