"""Gibbs channel for Bayesian linear regression on two binary features.

A data atom is ``(x, y)`` with ``x`` in {-1, 1}^2 and ``y`` in {-1, 1}. The
learner is the Gibbs posterior of a linear model under squared loss with a
Gaussian prior, so every posterior is Gaussian. A prior pre-trained on ``n``
samples turns the next single sample into an 8-symbol channel to a Gaussian
posterior, and Max-SKL over that channel gives the worst-case next-sample
distribution.

Default convention: precision ``I + sum x x'`` and mean
``precision^-1 sum x y`` (standard-normal prior, likelihood
``exp(-||Y - X w||^2 / 2)``). ``literal=True`` switches to a prior
``N(0, I/n)`` with inverse temperature ``n`` on the mean squared error.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .channels import as_prob_vector
from .errors import DomainError
from .infomeasures import DivergenceMatrix, gaussian_kl
from .solvers import SolveOptions, max_skl

ATOMS = (
    ((1, 1), 1),
    ((1, -1), -1),
    ((-1, 1), 1),
    ((-1, -1), -1),
    ((1, 1), -1),
    ((1, -1), 1),
    ((-1, 1), -1),
    ((-1, -1), 1),
)
ATOM_X = np.array([a[0] for a in ATOMS], dtype=float)
ATOM_Y = np.array([a[1] for a in ATOMS], dtype=float)
REPORT_ZERO = 1e-6


@dataclass(frozen=True)
class DataAtom:
    x: tuple
    y: int

    def __post_init__(self):
        x = tuple(int(v) for v in self.x)
        if len(x) != 2 or any(v not in (-1, 1) for v in x) or self.y not in (-1, 1):
            raise DomainError(f"data atom ({self.x}, {self.y}) must have entries in {{-1, 1}}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", int(self.y))

    @property
    def index(self) -> int:
        return ATOMS.index((self.x, self.y))

    def __str__(self):
        return f"([{self.x[0]}, {self.x[1]}], {self.y})"


CANONICAL_ATOMS = tuple(DataAtom(x, y) for x, y in ATOMS)


@dataclass(frozen=True)
class JointDataDistribution:
    """Distribution over the eight atoms in canonical order."""

    probs: np.ndarray

    def __post_init__(self):
        p = as_prob_vector(self.probs, "data distribution")
        if p.size != len(ATOMS):
            raise DomainError(f"data distribution needs {len(ATOMS)} probabilities, got {p.size}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    atoms = CANONICAL_ATOMS

    def rounded(self) -> np.ndarray:
        """Probabilities with entries below 1e-6 shown as 0."""
        return np.where(self.probs < REPORT_ZERO, 0.0, self.probs)


@dataclass(frozen=True)
class GaussianPosterior:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise DomainError("covariance shape does not match the mean")
        if not np.allclose(cov, cov.T, atol=1e-12, rtol=0):
            raise DomainError("covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise DomainError("covariance is not positive definite") from None
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def precision(self) -> np.ndarray:
        return np.linalg.inv(self.cov)

    @classmethod
    def from_natural(cls, precision, shift) -> "GaussianPosterior":
        cov = np.linalg.inv(precision)
        return cls(cov @ shift, cov)


def case_distribution(case: int) -> JointDataDistribution:
    """Uniform start distribution of the separable (1) or XOR (2) case."""
    if case == 1:
        support = [0, 1, 2, 3]
    elif case == 2:
        support = [0, 1, 6, 7]
    else:
        raise DomainError(f"case must be 1 or 2, got {case!r}")
    p = np.zeros(len(ATOMS))
    p[support] = 0.25
    return JointDataDistribution(p)


def sample_dataset(dist: JointDataDistribution, n: int, rng_seed=None) -> list[DataAtom]:
    if n < 1:
        raise DomainError("sample size must be at least 1")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    idx = rng.choice(len(ATOMS), size=int(n), p=dist.probs)
    return [CANONICAL_ATOMS[i] for i in idx]


def _weights(n: int, literal: bool):
    """(prior precision scale, pre-training sample weight, next-sample weight)."""
    if literal:
        # prior N(0, I/n); gamma = n times the empirical MSE over n samples
        return float(n), 2.0, 2.0 * n
    return 1.0, 1.0, 1.0


def _posterior_from_counts(counts, n: int, literal: bool = False) -> GaussianPosterior:
    prior_scale, w, _ = _weights(n, literal)
    counts = np.asarray(counts, dtype=float)
    precision = prior_scale * np.eye(2) + w * (ATOM_X.T * counts) @ ATOM_X
    shift = w * (ATOM_X.T * counts) @ ATOM_Y
    return GaussianPosterior.from_natural(precision, shift)


def posterior_from_dataset(data, literal: bool = False) -> GaussianPosterior:
    """Gibbs posterior of the linear model after seeing ``data``."""
    data = list(data)
    if not data:
        raise DomainError("dataset is empty")
    counts = np.zeros(len(ATOMS))
    for atom in data:
        counts[atom.index] += 1
    return _posterior_from_counts(counts, len(data), literal)


def expected_counts_posterior(dist: JointDataDistribution, n: int, literal: bool = False) -> GaussianPosterior:
    """Posterior after ``n`` samples taken at their expected (fractional) counts."""
    return _posterior_from_counts(n * dist.probs, n, literal)


def single_sample_posterior(prior: GaussianPosterior, atom: DataAtom, weight: float = 1.0) -> GaussianPosterior:
    """Condition ``prior`` on one more sample ``atom``."""
    # GaussianPosterior already guarantees a positive-definite covariance
    prec = prior.precision
    x = np.array(atom.x, dtype=float)
    precision = prec + weight * np.outer(x, x)
    shift = prec @ prior.mean + weight * x * atom.y
    return GaussianPosterior.from_natural(precision, shift)


def gibbs_channel_matrix(prior: GaussianPosterior, weight: float = 1.0) -> DivergenceMatrix:
    """Pairwise KL between the eight next-sample posteriors."""
    posts = [single_sample_posterior(prior, a, weight) for a in CANONICAL_ATOMS]
    k = len(posts)
    raw = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            if i != j:
                raw[i, j] = gaussian_kl(posts[i].mean, posts[i].cov, posts[j].mean, posts[j].cov)
    return DivergenceMatrix.from_raw(raw)


@dataclass
class WorstCaseReport:
    """Stages of the worst-case search.

    ``iterations[k]`` is the worst case found against the prior trained on
    ``distributions[k]``; ``posteriors[k]`` is that prior, and the final
    entry of ``posteriors`` is retrained on the last worst case.
    ``start_i_skl[k]`` scores ``distributions[k]`` under the stage-k channel.
    """

    start: JointDataDistribution
    iterations: list = field(default_factory=list)
    posteriors: list = field(default_factory=list)
    i_skl_values: list = field(default_factory=list)
    start_i_skl: list = field(default_factory=list)
    n: int = 0
    exact_counts: bool = True

    @property
    def distributions(self) -> list:
        return [self.start] + list(self.iterations)

    def to_dict(self) -> dict:
        stages = []
        for k, dist in enumerate(self.distributions):
            post = self.posteriors[k]
            entry = {
                "stage": k,
                "distribution": [float(v) for v in dist.rounded()],
                "posterior_mean": [float(v) for v in post.mean],
                "posterior_cov": [float(v) for v in post.cov.reshape(-1)],
            }
            if k < len(self.i_skl_values):
                entry["i_skl_start_nats"] = self.start_i_skl[k]
                entry["i_skl_worst_nats"] = self.i_skl_values[k]
            stages.append(entry)
        return {
            "atoms": [str(a) for a in CANONICAL_ATOMS],
            "n": self.n,
            "exact_counts": self.exact_counts,
            "stages": stages,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        """Atom-by-stage probability table followed by the posterior table."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        dists = self.distributions
        w.writerow(["atom"] + [f"P_S{k}" for k in range(len(dists))])
        for i, atom in enumerate(CANONICAL_ATOMS):
            w.writerow([str(atom)] + [f"{d.rounded()[i]:.12g}" for d in dists])
        w.writerow([])
        w.writerow(["stage", "mean_1", "mean_2", "cov_11", "cov_12", "cov_21", "cov_22"])
        for k, post in enumerate(self.posteriors):
            w.writerow([k] + [f"{v:.12g}" for v in (*post.mean, *post.cov.reshape(-1))])
        return buf.getvalue()


def worst_case_search(
    start: JointDataDistribution,
    n: int = 100,
    iterations: int = 1,
    exact_counts: bool = True,
    rng_seed=None,
    opts: SolveOptions | None = None,
    literal: bool = False,
) -> WorstCaseReport:
    """Alternate pre-training and worst-case next-sample search.

    Each stage trains the prior on ``n`` samples of the current distribution
    (expected counts, or i.i.d. draws when ``exact_counts`` is false), builds
    the 8-symbol Gibbs channel and replaces the distribution by its Max-SKL
    maximizer.
    """
    if iterations < 1:
        raise DomainError("iterations must be at least 1")
    rng = np.random.default_rng(rng_seed)
    step_weight = _weights(n, literal)[2]

    def train(dist):
        if exact_counts:
            return expected_counts_posterior(dist, n, literal)
        return posterior_from_dataset(sample_dataset(dist, n, rng), literal)

    report = WorstCaseReport(start=start, n=n, exact_counts=exact_counts)
    current = start
    for _ in range(int(iterations)):
        prior = train(current)
        dm = gibbs_channel_matrix(prior, step_weight)
        result = max_skl(dm, opts)
        report.posteriors.append(prior)
        report.start_i_skl.append(dm.quadratic_form(current.probs))
        report.i_skl_values.append(result.value)
        current = JointDataDistribution(result.caid)
        report.iterations.append(current)
    report.posteriors.append(train(current))
    return report
