"""Capacity solvers over the probability simplex.

``max_skl`` is the multiplicative update ``x_i <- x_i (C x)_i / (x' C x)`` on
the symmetrized KL matrix. The other solvers are baselines and oracles used
to check it.
"""

from __future__ import annotations

import csv
import functools
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from scipy.special import comb, xlogy

from .channels import DiscreteChannel, as_prob_vector
from .errors import DomainError, ShapeError
from .infomeasures import DivergenceMatrix, kl_matrix, mutual_information, tv

log = logging.getLogger(__name__)

# the objective is "flat" at or below this value
FLAT_TOL = 1e-300
STALL_TOL = 1e-15
STALL_STEPS = 10
GRID_MAX_DIM = 5
GRID_CHUNK = 200_000
GRID_MAX_POINTS = 20_000_000


@dataclass
class SolveOptions:
    epsilon: float = 1e-10
    max_iter: int = 10_000
    symmetrize: bool = True
    init: Union[str, np.ndarray, list] = "uniform"
    restarts: int = 0
    rng_seed: int | None = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        if self.restarts < 0:
            raise DomainError(f"restarts must be non-negative, got {self.restarts!r}")
        self.max_iter = int(self.max_iter)


@dataclass
class SolveReport:
    """Outcome of one solver run.

    ``trajectory`` holds ``(objective, tv_step)`` per iteration, starting with
    the initial point (whose ``tv_step`` is 0).
    """

    value: float
    caid: np.ndarray
    trajectory: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    algorithm: str = ""
    warnings: list = field(default_factory=list)

    def value_in(self, log_base: str = "nats") -> float:
        if log_base == "nats":
            return self.value
        if log_base == "bits":
            return self.value / math.log(2.0)
        raise ValueError(f"unknown log base {log_base!r}")

    def objectives(self) -> np.ndarray:
        return np.array([obj for obj, _ in self.trajectory])

    def trajectory_csv(self, path=None) -> str:
        """CSV with columns ``iter,objective_nats,tv_step``."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["iter", "objective_nats", "tv_step"])
        for k, (obj, step) in enumerate(self.trajectory):
            writer.writerow([k, f"{obj:.12g}", f"{step:.12g}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _as_divergence(source) -> DivergenceMatrix:
    if isinstance(source, DivergenceMatrix):
        return source
    if isinstance(source, DiscreteChannel):
        return kl_matrix(source)
    return DivergenceMatrix.from_raw(source)


def max_skl_step(x, dm: DivergenceMatrix, symmetric: bool = True) -> np.ndarray:
    """One multiplicative update.

    Raises DomainError("flat objective") when ``x' C x`` is zero.
    """
    x = np.asarray(x, dtype=float)
    C = dm.sym if symmetric else dm.raw
    if x.shape != (C.shape[0],):
        raise ShapeError(f"iterate has shape {x.shape}, matrix is {C.shape}")
    cp = C @ x
    denom = float(x @ cp)
    if not denom > FLAT_TOL:
        raise DomainError("flat objective: x' C x = 0")
    return x * cp / denom


def _initial_point(init, d: int) -> np.ndarray:
    if isinstance(init, str):
        if init != "uniform":
            raise DomainError(f"unknown init {init!r}")
        return np.full(d, 1.0 / d)
    x = as_prob_vector(init, "initial distribution")
    if x.size != d:
        raise ShapeError(f"initial distribution has length {x.size}, channel has {d} inputs")
    return x


def _run_max_skl(dm: DivergenceMatrix, x0: np.ndarray, opts: SolveOptions, name: str) -> SolveReport:
    warnings = []
    if np.any(x0 == 0):
        warnings.append(
            "initial distribution has zero entries; those inputs stay at zero under the update"
        )
    value0 = dm.quadratic_form(x0)
    if not value0 > FLAT_TOL:
        return SolveReport(0.0, x0.copy(), [(0.0, 0.0)], True, 0, name, warnings)

    x = x0
    traj = [(value0, 0.0)]
    converged = False
    stall = 0
    k = 0
    for k in range(1, opts.max_iter + 1):
        x_next = max_skl_step(x, dm, symmetric=opts.symmetrize)
        step = tv(x_next, x)
        value = dm.quadratic_form(x_next)
        stall = stall + 1 if abs(value - traj[-1][0]) < STALL_TOL else 0
        traj.append((value, step))
        x = x_next
        if step <= opts.epsilon or stall >= STALL_STEPS:
            converged = True
            break
    if not converged:
        log.info("%s hit max_iter=%d without meeting epsilon=%g", name, opts.max_iter, opts.epsilon)
    return SolveReport(traj[-1][0], x, traj, converged, k, name, warnings)


def _better(a: SolveReport, b: SolveReport) -> bool:
    """True when ``a`` beats ``b``: larger value, then lexicographically smaller caid."""
    if a.value != b.value:
        return a.value > b.value
    return tuple(a.caid) < tuple(b.caid)


def max_skl(source, opts: SolveOptions | None = None) -> SolveReport:
    """Maximize ``x' C_sym x`` over the simplex by multiplicative updates.

    ``source`` is a DiscreteChannel, a DivergenceMatrix or a raw square
    matrix. With ``opts.symmetrize`` false the update uses the raw matrix
    (the no-symmetrization variant); the reported value is always the
    symmetrized quadratic form, which equals I_SKL. With ``opts.restarts``
    extra Dirichlet(1) starts, the best run is returned; the choice does not
    depend on run order.
    """
    opts = opts or SolveOptions()
    dm = _as_divergence(source)
    name = "max-skl" if opts.symmetrize else "max-skl-wos"
    best = _run_max_skl(dm, _initial_point(opts.init, dm.d), opts, name)
    if opts.restarts:
        rng = np.random.default_rng(opts.rng_seed)
        for _ in range(opts.restarts):
            run = _run_max_skl(dm, rng.dirichlet(np.ones(dm.d)), opts, name)
            if _better(run, best):
                best = run
    return best


def blahut_arimoto(ch: DiscreteChannel, epsilon: float = 1e-12, max_iter: int = 100_000) -> SolveReport:
    """Shannon capacity max I(X;Y) by Blahut-Arimoto, in nats.

    Starts from the uniform input and stops when the sup-norm change of the
    input distribution is at most ``epsilon``. The trajectory records I(X;Y)
    at each iterate.
    """
    W = ch.matrix
    r = np.full(ch.d, 1.0 / ch.d)
    neg_h = np.sum(xlogy(W, W), axis=1)
    traj = [(mutual_information(r, ch), 0.0)]
    converged = False
    k = 0
    for k in range(1, int(max_iter) + 1):
        py = r @ W
        with np.errstate(divide="ignore", invalid="ignore"):
            cross = np.where(W > 0, W * np.log(py)[None, :], 0.0).sum(axis=1)
        div = neg_h - cross
        live = r > 0
        w = np.zeros_like(r)
        w[live] = r[live] * np.exp(div[live] - div[live].max())
        r_next = w / w.sum()
        step = float(np.max(np.abs(r_next - r)))
        traj.append((mutual_information(r_next, ch), tv(r_next, r)))
        r = r_next
        if step <= epsilon:
            converged = True
            break
    return SolveReport(traj[-1][0], r, traj, converged, k, "ba")


def power_iteration(
    dm: DivergenceMatrix,
    epsilon: float = 1e-12,
    max_iter: int = 10_000,
    symmetric: bool = True,
    record: list | None = None,
):
    """Dominant eigenpair by ``x <- A x / ||A x||`` from the uniform unit vector.

    Returns ``(eigenvalue, unit_vector)`` with a non-negative vector. When
    ``record`` is a list, each normalized iterate is appended to it.
    """
    A = dm.sym if symmetric else dm.raw
    d = A.shape[0]
    if not np.any(A > 0):
        raise DomainError("power iteration needs a non-zero matrix")
    x = np.full(d, 1.0 / math.sqrt(d))
    if record is not None:
        record.append(x.copy())
    for _ in range(int(max_iter)):
        y = A @ x
        norm = np.linalg.norm(y)
        if norm == 0:
            raise DomainError("power iteration collapsed to the zero vector")
        x_next = y / norm
        delta = np.linalg.norm(x_next - x)
        x = x_next
        if record is not None:
            record.append(x.copy())
        if delta <= epsilon:
            break
    x = np.abs(x)
    eig = float(x @ A @ x) if symmetric else float(np.linalg.norm(A @ x))
    return eig, x


def power_baseline(dm, epsilon: float = 1e-12, max_iter: int = 10_000, symmetric: bool = True) -> SolveReport:
    """Power iteration viewed as a capacity solver.

    Each iterate is rescaled to sum to one and scored by the quadratic form.
    """
    dm = _as_divergence(dm)
    iterates = []
    power_iteration(dm, epsilon, max_iter, symmetric=symmetric, record=iterates)
    traj = []
    prev = None
    for v in iterates:
        p = np.abs(v) / np.abs(v).sum()
        traj.append((dm.quadratic_form(p), 0.0 if prev is None else tv(p, prev)))
        prev = p
    converged = len(iterates) - 1 < max_iter
    return SolveReport(traj[-1][0], prev, traj, converged, len(iterates) - 1, "power")


def eigen_baseline(dm, symmetric: bool = True) -> SolveReport:
    """Dominant eigenvector normalized into a distribution, scored once.

    ``symmetric=False`` takes the Perron vector of the raw (asymmetric) matrix.
    """
    dm = _as_divergence(dm)
    _, v = power_iteration(dm, symmetric=symmetric)
    caid = v / v.sum()
    value = dm.quadratic_form(caid)
    return SolveReport(value, caid, [(value, 0.0)], True, 1, "eigen")


@functools.lru_cache(maxsize=8)
def simplex_lattice(d: int, resolution: int) -> np.ndarray:
    """All integer vectors of length ``d`` with non-negative entries summing to ``resolution``.

    Rows come out in lexicographic order. The array is cached and read-only.
    """
    size = int(comb(resolution + d - 1, d - 1, exact=True))
    if size > GRID_MAX_POINTS:
        raise DomainError(f"lattice has {size} points, more than the {GRID_MAX_POINTS} limit")
    # grow points with sum <= resolution one coordinate at a time; the last coordinate takes the slack
    pts = np.zeros((1, 0), dtype=np.int64)
    sums = np.zeros(1, dtype=np.int64)
    for _ in range(d - 1):
        reps = resolution - sums + 1
        starts = np.repeat(np.cumsum(reps) - reps, reps)
        new = np.arange(reps.sum(), dtype=np.int64) - starts
        pts = np.hstack([np.repeat(pts, reps, axis=0), new[:, None]])
        sums = np.repeat(sums, reps) + new
    out = np.hstack([pts, (resolution - sums)[:, None]])
    out.setflags(write=False)
    return out


def grid_oracle(dm, resolution: int = 1000) -> SolveReport:
    """Brute-force maximum of ``x' C_sym x`` over the simplex lattice.

    Ties go to the lexicographically smallest lattice point.
    """
    dm = _as_divergence(dm)
    d = dm.d
    if d > GRID_MAX_DIM:
        raise DomainError(f"grid oracle refuses d={d} > {GRID_MAX_DIM}")
    if int(resolution) != resolution or resolution < 2:
        raise DomainError("resolution must be an integer >= 2")
    counts = simplex_lattice(d, int(resolution))
    S = dm.sym
    best_val, best_idx = -math.inf, 0
    for lo in range(0, len(counts), GRID_CHUNK):
        x = counts[lo:lo + GRID_CHUNK] / resolution
        vals = np.einsum("ij,jk,ik->i", x, S, x)
        i = int(np.argmax(vals))  # first maximum, so lexicographically smallest
        if vals[i] > best_val:
            best_val, best_idx = float(vals[i]), lo + i
    caid = counts[best_idx] / resolution
    return SolveReport(best_val, caid, [(best_val, 0.0)], True, 1, "grid")
