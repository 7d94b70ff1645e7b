"""Reader/writer for the NNet text format used to distribute ACAS Xu networks.

Layout after any leading ``//`` comment lines::

    numLayers,inputSize,outputSize,maxLayerSize
    size_0,size_1,...,size_numLayers
    0                                   (unused legacy flag)
    input mins
    input maxes
    means   (inputSize entries, optionally one more for the outputs)
    ranges  (same)
    per layer: one line per weight row, then one line per bias

Inputs are clipped to [min, max] then mapped to (x - mean) / range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ExplorerError


class NNetParseError(ExplorerError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(eq=False)
class NNetNetwork:
    weights: list
    biases: list
    mins: np.ndarray
    maxes: np.ndarray
    means: np.ndarray
    ranges: np.ndarray

    def __post_init__(self):
        self.weights = [np.atleast_2d(np.asarray(W, dtype=float)) for W in self.weights]
        self.biases = [np.asarray(b, dtype=float).reshape(-1) for b in self.biases]
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.shape[0] != b.size:
                raise ValueError(f"layer {i}: {W.shape[0]} rows but {b.size} biases")
            if i and W.shape[1] != self.weights[i - 1].shape[0]:
                raise ValueError(f"layer {i} does not chain onto layer {i - 1}")
        self.mins = np.asarray(self.mins, dtype=float)
        self.maxes = np.asarray(self.maxes, dtype=float)
        self.means = np.asarray(self.means, dtype=float)
        self.ranges = np.asarray(self.ranges, dtype=float)
        if self.mins.size != self.input_size or self.maxes.size != self.input_size:
            raise ValueError("normalisation bounds do not match input size")
        if self.means.size < self.input_size or self.ranges.size < self.input_size:
            raise ValueError("normalisation means/ranges do not match input size")

    @property
    def input_size(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_size(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def layer_sizes(self) -> list:
        return [self.input_size] + [W.shape[0] for W in self.weights]

    def normalize(self, x) -> np.ndarray:
        x = np.clip(np.asarray(x, dtype=float), self.mins, self.maxes)
        k = self.input_size
        return (x - self.means[:k]) / self.ranges[:k]

    def forward(self, z) -> np.ndarray:
        """Evaluate on already-normalised inputs; ReLU on hidden layers."""
        h = np.asarray(z, dtype=float)
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            h = W @ h + b
            if i < last:
                h = np.maximum(h, 0.0)
        if self.means.size > self.input_size:
            h = h * self.ranges[-1] + self.means[-1]
        return h

    def evaluate(self, x) -> np.ndarray:
        return self.forward(self.normalize(x))


def _numbers(line, lineno, expected=None):
    tokens = [t.strip() for t in line.strip().rstrip(",").split(",")]
    tokens = [t for t in tokens if t]
    try:
        values = [float(t) for t in tokens]
    except ValueError:
        raise NNetParseError(f"non-numeric token in {line.strip()!r}", lineno) from None
    if expected is not None and len(values) != expected:
        raise NNetParseError(f"expected {expected} values, found {len(values)}", lineno)
    return values


def parse_nnet(text: str) -> NNetNetwork:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("//"):
            continue
        lines.append((lineno, stripped))
    it = iter(lines)

    def nxt(what):
        try:
            return next(it)
        except StopIteration:
            last = lines[-1][0] if lines else 0
            raise NNetParseError(f"unexpected end of file while reading {what}", last + 1) from None

    lineno, line = nxt("header")
    header = _numbers(line, lineno, 4)
    num_layers, in_size, out_size = (int(v) for v in header[:3])
    if num_layers < 1 or in_size < 1 or out_size < 1:
        raise NNetParseError("layer and input/output counts must be positive", lineno)
    lineno, line = nxt("layer sizes")
    sizes = [int(v) for v in _numbers(line, lineno, num_layers + 1)]
    if sizes[0] != in_size or sizes[-1] != out_size:
        raise NNetParseError("layer sizes disagree with header input/output sizes", lineno)
    nxt("legacy flag")
    lineno, line = nxt("input mins")
    mins = _numbers(line, lineno, in_size)
    lineno, line = nxt("input maxes")
    maxes = _numbers(line, lineno, in_size)
    lineno, line = nxt("means")
    means = _numbers(line, lineno)
    if len(means) not in (in_size, in_size + 1):
        raise NNetParseError(f"expected {in_size} or {in_size + 1} means", lineno)
    lineno, line = nxt("ranges")
    ranges = _numbers(line, lineno, len(means))
    weights, biases = [], []
    for layer in range(num_layers):
        rows = []
        for _ in range(sizes[layer + 1]):
            lineno, line = nxt(f"layer {layer} weights")
            rows.append(_numbers(line, lineno, sizes[layer]))
        bias = []
        for _ in range(sizes[layer + 1]):
            lineno, line = nxt(f"layer {layer} biases")
            bias.extend(_numbers(line, lineno, 1))
        weights.append(rows)
        biases.append(bias)
    return NNetNetwork(weights, biases, mins, maxes, means, ranges)


def load_nnet(path) -> NNetNetwork:
    with open(path) as fh:
        return parse_nnet(fh.read())


def _fmt(values):
    return ",".join(repr(float(v)) for v in values) + ","


def write_nnet(net: NNetNetwork, comment: str = "") -> str:
    sizes = net.layer_sizes
    out = [f"// {line}" for line in comment.splitlines()] if comment else []
    out.append(f"{len(net.weights)},{net.input_size},{net.output_size},{max(sizes)},")
    out.append(",".join(str(s) for s in sizes) + ",")
    out.append("0,")
    for vec in (net.mins, net.maxes, net.means, net.ranges):
        out.append(_fmt(vec))
    for W, b in zip(net.weights, net.biases):
        out.extend(_fmt(row) for row in W)
        out.extend(_fmt([v]) for v in b)
    return "\n".join(out) + "\n"
