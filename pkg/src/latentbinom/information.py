"""Expected (Fisher) information matrices for the latent-size model.

Four variants are provided, ordered from least to most informative about the
slope: the full latent-size model (gamma-mixed Poisson sizes), the
Poisson-size submodel, the hypothetical case where only the common size mean
is known, and the case where every size is observed. A closed-form block
partition of the Poisson-size inverse is included because the generic
inverse loses the structure that makes its mu-scaling visible.

Matrices are ordered (beta..., mu, alpha) like every parameter vector in
this package.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .kernels import Tolerance
from .model import ModelParams, link_h

__all__ = [
    "DesignPoint",
    "InfoVariant",
    "InfoMatrix",
    "info_full",
    "info_poisson_size",
    "info_known_mean",
    "info_known_sizes",
    "expected_alpha_info",
    "block_variance_partition",
    "inverse_with_condition",
    "NEAR_SINGULAR_CONDITION",
]

# Condition number beyond which an inverse is reported but flagged.
NEAR_SINGULAR_CONDITION = 1e12


@dataclass(frozen=True)
class DesignPoint:
    """A covariate row and how many observations share it."""

    x: np.ndarray
    replications: int = 1

    def __post_init__(self) -> None:
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        if not np.all(np.isfinite(x)):
            raise ValueError("design point must be finite")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "replications", int(self.replications))


class InfoVariant(enum.Enum):
    FULL = "full"
    POISSON_SIZE = "poisson_size"
    KNOWN_MEAN = "known_mean"
    KNOWN_SIZES = "known_sizes"


@dataclass(frozen=True)
class InfoMatrix:
    matrix: np.ndarray
    variant: InfoVariant
    param_labels: tuple[str, ...]

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("information matrix must be square")
        if m.shape[0] != len(self.param_labels):
            raise ValueError("labels must match matrix dimension")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "param_labels", tuple(self.param_labels))


def _beta_labels(d: int) -> list[str]:
    return [f"beta{j}" for j in range(d)]


def _design_rows(design: Sequence[DesignPoint], params: ModelParams):
    """Per design point: (x, replications, h, grad h)."""
    if len(design) == 0:
        raise ValueError("design must be non-empty")
    d = design[0].x.size
    for pt in design:
        if pt.x.size != d:
            raise ValueError("design points must share a covariate length")
    if d != params.beta.size:
        raise ValueError(f"dimension mismatch: design d={d}, beta has {params.beta.size}")
    rows = []
    for pt in design:
        h = link_h(pt.x, params.beta)
        rows.append((pt.x, pt.replications, h, h * (1.0 - h) * pt.x))
    return rows


def expected_alpha_info(x, params: ModelParams, tol: Tolerance = Tolerance()) -> float:
    """Expected curvature of the log density in the shape parameter.

    This is the negative expectation of the second alpha-derivative for a
    single observation at covariate row x. No closed form exists, so the
    expectation is a sum over the count distribution, truncated once the
    probability mass left beyond the last term provably drops below
    tol.abs_tol.

    The count pmf is built by the stable forward recurrence
    f(y+1)/f(y) = (alpha+y)/(y+1) * m/(alpha+m), and the curvature summand
    uses S(y) = sum_{j<y} (alpha+j)^-2, so no special-function evaluations
    are needed inside the loop. The stop rule is a geometric bound on the
    true tail, not a watch on the accumulated float mass: rounding in a long
    pmf sum can saturate the accumulator a hair under 1, which would turn a
    mass-based rule into an infinite loop.
    """
    if params.is_poisson_size:
        raise ValueError("alpha information requires finite alpha")
    a = params.alpha
    m = params.mu * link_h(x, params.beta)
    if m == 0.0:
        return 0.0
    log_ratio = math.log(m) - math.log(a + m)
    # Sum in blocks sized to the distribution; past the mean the pmf ratio
    # falls below 1 and the geometric tail bound applies.
    block = max(int(math.ceil(m + 50.0 * math.sqrt(m * (1.0 + m / a)))) + 10, 64)
    log_f0 = -a * math.log1p(m / a)
    start = 0
    logf_start = log_f0
    s_start = 0.0
    acc = 0.0  # the y = 0 term vanishes since S(0) = 0
    while True:
        if start >= tol.max_terms:
            raise RuntimeError(
                f"alpha information tail still above {tol.abs_tol} "
                f"after {tol.max_terms} terms"
            )
        count = min(block, tol.max_terms - start)
        j = np.arange(start, start + count, dtype=float)
        steps = np.log((a + j) / (j + 1.0)) + log_ratio
        logf = logf_start + np.cumsum(steps)
        f = np.exp(logf)
        s = s_start + np.cumsum(1.0 / (a + j) ** 2)
        acc += float(f @ s)
        logf_start = float(logf[-1])
        s_start = float(s[-1])
        start += count
        # Tail after the last included y: f_last * r / (1 - r) with
        # r the (decreasing, < 1 here) pmf ratio at that y.
        r = (a + start) / (start + 1.0) * math.exp(log_ratio)
        if r < 1.0 and math.exp(logf_start) * r / (1.0 - r) < tol.abs_tol:
            break
    return acc - m / (a * (a + m))


def info_full(design: Sequence[DesignPoint], params: ModelParams,
              tol: Tolerance = Tolerance()) -> InfoMatrix:
    """Expected information of the full latent-size model.

    The shape parameter is orthogonal to (beta, mu): its off-diagonal row and
    column are exactly zero by construction.
    """
    if params.is_poisson_size:
        raise ValueError("full-model information requires finite alpha")
    rows = _design_rows(design, params)
    d = rows[0][0].size
    a = params.alpha
    mu = params.mu
    I = np.zeros((d + 2, d + 2))
    for x, r, h, gh in rows:
        shrink = 1.0 + mu * h / a
        I[:d, :d] += r * mu * np.outer(gh, gh) / (h * shrink)
        I[:d, d] += r * gh / shrink
        I[d, d] += r * h / (mu * shrink)
        I[d + 1, d + 1] += r * expected_alpha_info(x, params, tol)
    I[d, :d] = I[:d, d]
    labels = _beta_labels(d) + ["mu", "alpha"]
    return InfoMatrix(I, InfoVariant.FULL, tuple(labels))


def info_poisson_size(design: Sequence[DesignPoint], params: ModelParams) -> InfoMatrix:
    """Expected information when the sizes are Poisson with common mean mu."""
    rows = _design_rows(design, params)
    d = rows[0][0].size
    mu = params.mu
    I = np.zeros((d + 1, d + 1))
    for _, r, h, gh in rows:
        I[:d, :d] += r * mu * np.outer(gh, gh) / h
        I[:d, d] += r * gh
        I[d, d] += r * h / mu
    I[d, :d] = I[:d, d]
    labels = _beta_labels(d) + ["mu"]
    return InfoMatrix(I, InfoVariant.POISSON_SIZE, tuple(labels))


def info_known_mean(design: Sequence[DesignPoint], params: ModelParams) -> InfoMatrix:
    """Expected information about beta when only the size mean is known."""
    rows = _design_rows(design, params)
    d = rows[0][0].size
    mu = params.mu
    I = np.zeros((d, d))
    for _, r, h, gh in rows:
        I += r * mu * np.outer(gh, gh) / (h * (1.0 - h))
    return InfoMatrix(I, InfoVariant.KNOWN_MEAN, tuple(_beta_labels(d)))


def info_known_sizes(design: Sequence[DesignPoint], sizes: Sequence[int],
                     params: ModelParams) -> InfoMatrix:
    """Information about beta when every size n_i is observed.

    sizes must align with the design expanded one observation per
    replication, in design order.
    """
    rows = _design_rows(design, params)
    d = rows[0][0].size
    total = sum(r for _, r, _, _ in rows)
    if len(sizes) != total:
        raise ValueError(f"expected {total} sizes, got {len(sizes)}")
    sizes = np.asarray(sizes, dtype=float)
    if np.any(sizes < 0):
        raise ValueError("sizes must be non-negative")
    I = np.zeros((d, d))
    pos = 0
    for _, r, h, gh in rows:
        n_sum = float(np.sum(sizes[pos:pos + r]))
        pos += r
        I += n_sum * np.outer(gh, gh) / (h * (1.0 - h))
    return InfoMatrix(I, InfoVariant.KNOWN_SIZES, tuple(_beta_labels(d)))


def block_variance_partition(design: Sequence[DesignPoint],
                             params: ModelParams) -> tuple[np.ndarray, float]:
    """Closed-form (V11, V22) blocks of the inverse Poisson-size information.

    V11 is the asymptotic covariance of beta-hat, V22 the variance of mu-hat.
    Computed from the partitioned-inverse identities rather than a generic
    matrix inverse, so the factorization V11 = (1/mu) * (...) and
    V22 = mu * (...) with mu-free inner matrices stays explicit.
    """
    rows = _design_rows(design, params)
    d = rows[0][0].size
    A = np.zeros((d, d))
    b = np.zeros(d)
    c = 0.0
    for _, r, h, gh in rows:
        A += r * np.outer(gh, gh) / h
        b += r * gh
        c += r * h
    inner = A - np.outer(b, b) / c
    v11 = np.linalg.inv(inner) / params.mu
    denom = c - b @ np.linalg.solve(A, b)
    if denom <= 0:
        raise np.linalg.LinAlgError("singular inner matrix in variance partition")
    v22 = params.mu / denom
    return v11, float(v22)


def inverse_with_condition(matrix: np.ndarray) -> tuple[np.ndarray, float, bool]:
    """Symmetric inverse with a condition report.

    Returns (inverse, condition number, near_singular flag). The inverse is
    computed from the eigendecomposition so that a nearly singular matrix
    still yields a result, flagged rather than raised; a singular or
    indefinite matrix yields condition = inf.
    """
    m = np.asarray(matrix, dtype=float)
    vals, vecs = np.linalg.eigh(0.5 * (m + m.T))
    if np.any(vals <= 0.0):
        cond = math.inf
    else:
        cond = float(vals[-1] / vals[0])
    if np.any(vals == 0.0):
        raise np.linalg.LinAlgError("information matrix is exactly singular")
    inv = (vecs / vals) @ vecs.T
    return inv, cond, not (cond < NEAR_SINGULAR_CONDITION)
