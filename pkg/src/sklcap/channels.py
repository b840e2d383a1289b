"""Discrete memoryless channels: construction, validation and file I/O."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import DomainError, ShapeError, ValidationError

ROW_SUM_TOL = 1e-12
# Rows off by less than this are renormalized; anything larger is a data bug.
RENORM_TOL = 1e-9


def as_prob_vector(p, name: str = "probability vector") -> np.ndarray:
    """Validate ``p`` as a point on the probability simplex and return a float array.

    Sums within ``RENORM_TOL`` of one are renormalized so that the returned
    vector sums to one within ``ROW_SUM_TOL``.
    """
    arr = np.array(p, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ShapeError(f"{name} must be a non-empty 1-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    if np.any(arr < 0):
        raise ValidationError(f"{name} has negative entries")
    total = arr.sum()
    if abs(total - 1.0) > RENORM_TOL:
        raise ValidationError(f"{name} sums to {total!r}, not 1")
    return arr / total


@dataclass(frozen=True)
class DiscreteChannel:
    """Row-stochastic matrix ``P(Y=y_j | X=x_i)`` with labelled inputs.

    The matrix is copied, validated and made read-only on construction.
    """

    matrix: np.ndarray
    input_labels: tuple = field(default=None)

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] < 1 or mat.shape[1] < 1:
            raise ShapeError(f"channel matrix must be 2-D and non-empty, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            bad = int(np.argwhere(~np.isfinite(mat))[0][0])
            raise ValidationError(f"row {bad}: non-finite probability")
        neg = np.argwhere(mat < 0)
        if neg.size:
            raise ValidationError(f"row {int(neg[0][0])}: negative probability")
        high = np.argwhere(mat > 1)
        if high.size:
            raise ValidationError(f"row {int(high[0][0])}: probability above 1")
        sums = mat.sum(axis=1)
        for i, s in enumerate(sums):
            if abs(s - 1.0) > RENORM_TOL:
                raise ValidationError(f"row {i}: sums to {s!r}, not 1")
        mat = mat / sums[:, None]
        mat.setflags(write=False)

        labels = self.input_labels
        if labels is None:
            labels = tuple(range(mat.shape[0]))
        else:
            labels = tuple(labels)
        if len(labels) != mat.shape[0]:
            raise ShapeError(f"{len(labels)} input labels for {mat.shape[0]} rows")
        if len(set(labels)) != len(labels):
            raise ValidationError("input labels must be distinct")

        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "input_labels", labels)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @property
    def output_size(self) -> int:
        return self.matrix.shape[1]

    def __eq__(self, other):
        if not isinstance(other, DiscreteChannel):
            return NotImplemented
        return (
            self.input_labels == other.input_labels
            and self.matrix.shape == other.matrix.shape
            and bool(np.array_equal(self.matrix, other.matrix))
        )

    __hash__ = None


def _check_unit(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0 or math.isnan(value):
        raise DomainError(f"{name}={value!r} is outside [0, 1]")
    return value


def make_bsc(p: float) -> DiscreteChannel:
    """Binary symmetric channel with crossover probability ``p``."""
    p = _check_unit("p", p)
    return DiscreteChannel([[1 - p, p], [p, 1 - p]], input_labels=(0, 1))


def make_bac(p: float, q: float) -> DiscreteChannel:
    """Binary asymmetric channel: ``p`` flips 0 to 1, ``q`` flips 1 to 0."""
    p = _check_unit("p", p)
    q = _check_unit("q", q)
    return DiscreteChannel([[1 - p, p], [q, 1 - q]], input_labels=(0, 1))


def make_binomial(n: int, grid: Sequence[float]) -> DiscreteChannel:
    """Quantized binomial channel, one row ``Binomial(n, x)`` per grid point.

    Grid points must lie strictly inside (0, 1): an endpoint gives a
    degenerate row whose KL divergence to every other row is infinite.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"trial count n={n!r} must be a positive integer")
    n = int(n)
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise DomainError("grid must be a non-empty list of inputs")
    if np.any(g <= 0.0) or np.any(g >= 1.0):
        raise DomainError("degenerate support: binomial grid points must lie strictly in (0, 1)")
    if np.any(np.diff(g) <= 0):
        raise DomainError("grid must be strictly increasing")

    y = np.arange(n + 1)
    log_coef = gammaln(n + 1) - gammaln(y + 1) - gammaln(n - y + 1)
    x = g[:, None]
    mat = np.exp(log_coef[None, :] + xlogy(y, x) + xlogy(n - y, 1.0 - x))
    return DiscreteChannel(mat, input_labels=tuple(float(v) for v in g))


def parse_grid(text: str) -> list[float]:
    """Parse ``A:B:STEP`` into an inclusive grid.

    ``B`` is included when ``STEP`` divides ``B - A`` within 1e-9.
    """
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"grid {text!r} is not of the form A:B:STEP")
    a, b, step = (float(s) for s in parts)
    if step <= 0:
        raise ValueError("grid STEP must be positive")
    if b < a:
        raise ValueError(f"grid end {b} precedes start {a}")
    ratio = (b - a) / step
    count = round(ratio) if abs(ratio - round(ratio)) <= 1e-9 else math.floor(ratio)
    # round away accumulated float error so 0.1:0.9:0.1 yields 0.3, not 0.30000000000000004
    return [round(a + k * step, 12) for k in range(count + 1)]


def _label_from_text(text: str):
    text = text.strip()
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def save_channel(ch: DiscreteChannel, path) -> None:
    """Write ``ch`` as JSON (``.json``) or CSV (anything else)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        payload = {
            "input_labels": list(ch.input_labels),
            "matrix": [[float(v) for v in row] for row in ch.matrix],
        }
        path.write_text(json.dumps(payload, indent=2) + "\n")
        return
    with path.open("w", newline="") as fh:
        fh.write("# labels: " + ",".join(str(lab) for lab in ch.input_labels) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        for row in ch.matrix:
            writer.writerow([repr(float(v)) for v in row])


def load_channel(path) -> DiscreteChannel:
    """Read a channel file written by :func:`save_channel` (or by hand).

    Raises ValidationError for malformed content; row-level problems name the row.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: malformed JSON ({exc})") from None
        if not isinstance(payload, dict) or "matrix" not in payload:
            raise ValidationError(f"{path}: expected an object with a 'matrix' key")
        rows = payload["matrix"]
        labels = payload.get("input_labels")
    else:
        rows, labels = [], None
        for line in text.splitlines():
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                body = stripped.lstrip("#").strip()
                if body.lower().startswith("labels:"):
                    labels = [_label_from_text(t) for t in body.split(":", 1)[1].split(",")]
                continue
            rows.append(next(csv.reader([stripped])))

    if not isinstance(rows, list) or not rows:
        raise ValidationError(f"{path}: no channel rows")
    width = None
    parsed = []
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise ValidationError(f"row {i}: expected a list of probabilities")
        try:
            vals = [float(v) for v in row]
        except (TypeError, ValueError):
            raise ValidationError(f"row {i}: non-numeric entry") from None
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise ValidationError(f"row {i}: has {len(vals)} entries, expected {width}")
        parsed.append(vals)
    return DiscreteChannel(np.array(parsed), input_labels=labels)
