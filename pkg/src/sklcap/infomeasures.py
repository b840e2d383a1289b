"""Discrete information measures and the pairwise KL divergence matrix.

Everything is computed in nats; ``0 * log(0 / q)`` is taken as 0. Divergences
that are infinite because of an absolute-continuity failure come back as
``math.inf`` from the scalar measures, but :func:`kl_matrix` refuses them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import xlogy

from .channels import DiscreteChannel, as_prob_vector
from .errors import DomainError, InfiniteDivergenceError, ShapeError

LN2 = math.log(2.0)


def _pair(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ShapeError(f"length mismatch: {p.shape} vs {q.shape}")
    return p, q


def kl(p, q) -> float:
    """KL divergence D(p || q) in nats; ``math.inf`` when p is not << q."""
    p, q = _pair(p, q)
    if np.any((p > 0) & (q <= 0)):
        return math.inf
    return float(np.sum(xlogy(p, p) - xlogy(p, q)))


def tv(p, q) -> float:
    """Total variation distance, half the l1 distance."""
    p, q = _pair(p, q)
    return 0.5 * float(np.abs(p - q).sum())


def entropy(p) -> float:
    """Shannon entropy in nats."""
    p = np.asarray(p, dtype=float)
    return float(-np.sum(xlogy(p, p)))


def binary_entropy_bits(p: float) -> float:
    return entropy([p, 1.0 - p]) / LN2


def _input_and_channel(px, ch: DiscreteChannel):
    px = as_prob_vector(px, "input distribution")
    if px.size != ch.d:
        raise ShapeError(f"input distribution has length {px.size}, channel has {ch.d} inputs")
    return px, ch.matrix


def mutual_information(px, ch: DiscreteChannel) -> float:
    """I(X;Y) in nats."""
    px, W = _input_and_channel(px, ch)
    py = px @ W
    joint = px[:, None] * W
    # joint > 0 implies py > 0, so the log term is finite wherever it counts
    return float(np.sum(xlogy(joint, W) - xlogy(joint, py[None, :])))


def lautum_information(px, ch: DiscreteChannel) -> float:
    """Lautum information D(P_X P_Y || P_XY) in nats, or ``math.inf``."""
    px, W = _input_and_channel(px, ch)
    py = px @ W
    prod = px[:, None] * py[None, :]
    if np.any((prod > 0) & (W <= 0)):
        return math.inf
    return float(np.sum(xlogy(prod, py[None, :]) - xlogy(prod, W)))


def i_skl_direct(px, ch: DiscreteChannel) -> float:
    """Symmetrized KL information I + L from the joint distribution."""
    return mutual_information(px, ch) + lautum_information(px, ch)


@dataclass(frozen=True)
class DivergenceMatrix:
    """Pairwise row divergences ``raw[i, j] = D(W_i || W_j)`` and ``sym = (raw + raw.T) / 2``."""

    raw: np.ndarray
    sym: np.ndarray

    @classmethod
    def from_raw(cls, raw) -> "DivergenceMatrix":
        raw = np.array(raw, dtype=float)
        if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
            raise ShapeError(f"divergence matrix must be square, got shape {raw.shape}")
        if np.any(raw < 0):
            raise DomainError("divergence matrix has negative entries")
        np.fill_diagonal(raw, 0.0)
        sym = 0.5 * (raw + raw.T)
        raw.setflags(write=False)
        sym.setflags(write=False)
        return cls(raw, sym)

    @property
    def d(self) -> int:
        return self.raw.shape[0]

    def quadratic_form(self, x, symmetric: bool = True) -> float:
        m = self.sym if symmetric else self.raw
        x = np.asarray(x, dtype=float)
        return float(x @ m @ x)

    def to_csv(self, path=None) -> str:
        """Row-major CSV of the symmetrized entries with 12 significant digits."""
        text = "".join(",".join(f"{v:.12g}" for v in row) + "\n" for row in self.sym)
        if path is not None:
            Path(path).write_text(text)
        return text


def kl_matrix(ch: DiscreteChannel) -> DivergenceMatrix:
    """Build the pairwise KL matrix of a channel's rows.

    Raises InfiniteDivergenceError listing every (i, j) with D(W_i || W_j) = inf.
    """
    W = ch.matrix
    support = W > 0
    # row i is not << row j when i puts mass where j has none
    bad = support[:, None, :] & ~support[None, :, :]
    offending = np.argwhere(bad.any(axis=2))
    if offending.size:
        raise InfiniteDivergenceError(offending)
    neg_entropy = np.sum(xlogy(W, W), axis=1)
    with np.errstate(divide="ignore"):
        logW = np.where(support, np.log(np.where(support, W, 1.0)), 0.0)
    cross = W @ logW.T
    raw = neg_entropy[:, None] - cross
    # cancellation can leave tiny negatives when rows coincide
    raw = np.maximum(raw, 0.0)
    return DivergenceMatrix.from_raw(raw)


def i_skl_pairwise(px, dm: DivergenceMatrix) -> float:
    """I_SKL as the quadratic form of the input distribution with the KL matrix."""
    px = as_prob_vector(px, "input distribution")
    if px.size != dm.d:
        raise ShapeError(f"input distribution has length {px.size}, matrix is {dm.d}x{dm.d}")
    if not np.all(np.isfinite(dm.raw)):
        raise DomainError("non-absolutely-continuous channel rows: divergence matrix is not finite")
    return dm.quadratic_form(px)


def bsc_capacity_closed_form(p: float) -> float:
    """Symmetrized-KL capacity of BSC(p) in bits."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"BSC symmetrized-KL capacity diverges at p={p!r}; need 0 < p < 1")
    return -math.log2(math.sqrt(p * (1.0 - p))) - binary_entropy_bits(p)


def gaussian_kl(m0, S0, m1, S1) -> float:
    """KL divergence N(m0, S0) || N(m1, S1) in nats."""
    m0 = np.atleast_1d(np.asarray(m0, dtype=float))
    m1 = np.atleast_1d(np.asarray(m1, dtype=float))
    S0 = np.atleast_2d(np.asarray(S0, dtype=float))
    S1 = np.atleast_2d(np.asarray(S1, dtype=float))
    k = m0.size
    if m1.size != k or S0.shape != (k, k) or S1.shape != (k, k):
        raise ShapeError("mean and covariance dimensions do not agree")
    try:
        L0 = np.linalg.cholesky(S0)
        L1 = np.linalg.cholesky(S1)
    except np.linalg.LinAlgError:
        raise DomainError("covariance matrix is not positive definite") from None
    # tr(S1^-1 S0) = ||L1^-1 L0||_F^2
    A = np.linalg.solve(L1, L0)
    z = np.linalg.solve(L1, m1 - m0)
    logdet = 2.0 * (np.sum(np.log(np.diag(L1))) - np.sum(np.log(np.diag(L0))))
    val = 0.5 * (np.sum(A * A) + z @ z - k + logdet)
    return max(float(val), 0.0)


@dataclass(frozen=True)
class NonConcavityCertificate:
    """Inputs witnessing that Lautum information is not concave in P_X.

    ``gap = L(mixture) - [(1 - alpha) L(p0) + alpha L(p1)]``; negative means
    the chord lies above the function at the mixture.
    """

    channel: DiscreteChannel
    p0: np.ndarray
    p1: np.ndarray
    alpha: float
    gap: float
    trial: int

    def mixture(self) -> np.ndarray:
        return (1.0 - self.alpha) * self.p0 + self.alpha * self.p1

    def recompute_gap(self) -> float:
        return lautum_gap(self.channel, self.p0, self.p1, self.alpha)

    def is_valid(self, tol: float = 1e-6) -> bool:
        return self.recompute_gap() < -tol


def lautum_gap(ch: DiscreteChannel, p0, p1, alpha: float) -> float:
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    mix = (1.0 - alpha) * p0 + alpha * p1
    chord = (1.0 - alpha) * lautum_information(p0, ch) + alpha * lautum_information(p1, ch)
    return lautum_information(mix, ch) - chord


def find_nonconcavity_certificate(
    ch: DiscreteChannel, trials: int = 10_000, rng_seed=None, tol: float = 1e-6
) -> NonConcavityCertificate | None:
    """Random search for a concavity violation of Lautum information.

    Samples p0, p1 ~ Dirichlet(1, ..., 1) and alpha ~ U(0, 1). Returns the
    first sample whose gap is below ``-tol``, or None after ``trials`` tries.
    """
    rng = np.random.default_rng(rng_seed)
    ones = np.ones(ch.d)
    for t in range(int(trials)):
        p0 = rng.dirichlet(ones)
        p1 = rng.dirichlet(ones)
        alpha = float(rng.uniform(0.0, 1.0))
        ends = (lautum_information(p0, ch), lautum_information(p1, ch))
        if not all(math.isfinite(v) for v in ends):
            continue
        gap = lautum_gap(ch, p0, p1, alpha)
        if math.isfinite(gap) and gap < -tol:
            return NonConcavityCertificate(ch, p0, p1, alpha, gap, t)
    return None
