"""Probability model for binomial dose-response with latent group sizes.

Each observed count y is binomial with an unobserved size n, where n is
Poisson with a gamma-distributed mean. Integrating the latent quantities out
leaves y negative-binomial with mean mu * h(x, beta) and shape alpha, where h
is the logistic link. alpha = INFINITE (math.inf) selects the degenerate
limit in which the sizes are Poisson with a common mean and y is Poisson
distributed; that limit is handled as its own code path, never as a large
float stand-in.

Parameter vectors are always ordered (beta_0 .. beta_{d-1}, mu, alpha).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .kernels import log_gamma

__all__ = [
    "INFINITE",
    "ModelParams",
    "Observation",
    "Dataset",
    "link_h",
    "link_grad",
    "log_pmf",
    "log_likelihood",
    "score",
    "hessian",
]

INFINITE = math.inf


@dataclass(frozen=True)
class ModelParams:
    """Parameter vector theta = (beta, mu, alpha).

    beta are the regression coefficients of the logistic link, mu the mean of
    the latent gamma size distribution, alpha its shape. alpha = INFINITE
    encodes the Poisson-size submodel.
    """

    beta: np.ndarray
    mu: float
    alpha: float

    def __post_init__(self) -> None:
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if beta.ndim != 1 or beta.size < 1 or not np.all(np.isfinite(beta)):
            raise ValueError("beta must be a finite vector of length >= 1")
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValueError("mu must be positive and finite")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive (or INFINITE)")
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def is_poisson_size(self) -> bool:
        return math.isinf(self.alpha)

    @property
    def gamma_rate(self) -> float:
        """Rate eta of the latent gamma, mu = alpha / eta."""
        return self.alpha / self.mu

    @property
    def size_variance(self) -> float:
        """Variance mu^2 / alpha of the latent gamma mean; 0 in the limit."""
        return 0.0 if self.is_poisson_size else self.mu**2 / self.alpha

    @property
    def n_params(self) -> int:
        """Length of the free parameter vector (alpha dropped at INFINITE)."""
        return self.beta.size + (1 if self.is_poisson_size else 2)

    def as_array(self) -> np.ndarray:
        """(beta..., mu) for the Poisson-size submodel, else (beta..., mu, alpha)."""
        if self.is_poisson_size:
            return np.concatenate([self.beta, [self.mu]])
        return np.concatenate([self.beta, [self.mu, self.alpha]])


@dataclass(frozen=True)
class Observation:
    y: int
    x: np.ndarray

    def __post_init__(self) -> None:
        if self.y < 0 or self.y != int(self.y):
            raise ValueError("y must be a non-negative integer")
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        if not np.all(np.isfinite(x)):
            raise ValueError("x must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "y", int(self.y))
        object.__setattr__(self, "x", x)


class Dataset:
    """Immutable collection of (y, x) pairs with a common covariate length."""

    def __init__(self, observations: Sequence[Observation]):
        if len(observations) == 0:
            raise ValueError("dataset must contain at least one observation")
        d = observations[0].x.size
        if any(o.x.size != d for o in observations):
            raise ValueError("all covariate rows must share the same length")
        y = np.array([o.y for o in observations], dtype=np.int64)
        X = np.array([o.x for o in observations], dtype=float)
        y.setflags(write=False)
        X.setflags(write=False)
        self._y = y
        self._X = X

    @classmethod
    def from_arrays(cls, y, X) -> "Dataset":
        y = np.asarray(y)
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if len(y) != len(X):
            raise ValueError("y and X must have the same number of rows")
        return cls([Observation(int(yi), xi) for yi, xi in zip(y, X)])

    @property
    def y(self) -> np.ndarray:
        return self._y

    @property
    def X(self) -> np.ndarray:
        return self._X

    @property
    def d(self) -> int:
        return self._X.shape[1]

    @property
    def n_obs(self) -> int:
        return self._X.shape[0]

    @property
    def observations(self) -> list[Observation]:
        return [Observation(int(yi), xi) for yi, xi in zip(self._y, self._X)]

    def __len__(self) -> int:
        return self.n_obs

    def __iter__(self) -> Iterator[Observation]:
        return iter(self.observations)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self._y, other._y) and np.array_equal(self._X, other._X)

    def __repr__(self) -> str:
        return f"Dataset(n_obs={self.n_obs}, d={self.d})"


def _logistic(t: np.ndarray) -> np.ndarray:
    # Branch on sign so neither exp overflows; saturates smoothly at +/-745.
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    et = np.exp(t[~pos])
    out[~pos] = et / (1.0 + et)
    return out


def link_h(x, beta) -> float:
    """Logistic success probability exp(x'beta) / (1 + exp(x'beta))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if x.shape != beta.shape:
        raise ValueError(f"dimension mismatch: x has {x.size}, beta has {beta.size}")
    t = np.asarray([float(x @ beta)])
    return float(_logistic(t)[0])


def link_grad(x, beta) -> np.ndarray:
    """Gradient of link_h with respect to beta: h (1 - h) x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = link_h(x, beta)
    return h * (1.0 - h) * x


def _h_vector(dataset: Dataset, params: ModelParams) -> np.ndarray:
    if dataset.d != params.beta.size:
        raise ValueError(
            f"dimension mismatch: dataset d={dataset.d}, beta has {params.beta.size}"
        )
    return _logistic(dataset.X @ params.beta)


def _shift_table(y_max: int, alpha: float, power: int) -> np.ndarray:
    """T[k] = sum_{j<k} (log(alpha+j) if power==0 else (alpha+j)^-power).

    Gamma-type functions of alpha + y collapse to these finite sums when y is
    an integer: log G(a+y) - log G(a) = T0[y], psi(a+y) - psi(a) = T1[y],
    psi'(a+y) - psi'(a) = -T2[y]. Evaluating the differences this way stays
    exact when alpha is many orders larger than y, where subtracting two
    large special-function values would lose every significant digit.
    """
    j = np.arange(y_max, dtype=float)
    vals = np.log(alpha + j) if power == 0 else (alpha + j) ** (-float(power))
    table = np.zeros(y_max + 1)
    np.cumsum(vals, out=table[1:])
    return table


def _loglik_terms(y: np.ndarray, m: np.ndarray, alpha: float) -> np.ndarray:
    """Per-observation log density of y given its negative-binomial mean m."""
    lgy1 = log_gamma(y + 1.0)
    if math.isinf(alpha):
        with np.errstate(divide="ignore", invalid="ignore"):
            ylogm = np.where(y > 0, y * np.log(np.where(m > 0, m, 1.0)), 0.0)
            ylogm = np.where((y > 0) & (m == 0.0), -np.inf, ylogm)
        return ylogm - m - lgy1
    lg_diff = _shift_table(int(y.max()), alpha, 0)[y]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(y > 0, y * np.log(np.where(m > 0, m, 1.0) / (alpha + m)), 0.0)
        ratio = np.where((y > 0) & (m == 0.0), -np.inf, ratio)
    return lg_diff + ratio - lgy1 - alpha * np.log1p(m / alpha)


def log_pmf(y: int, x, params: ModelParams) -> float:
    """Log marginal probability of a single count at covariate row x."""
    if y < 0 or y != int(y):
        raise ValueError("y must be a non-negative integer")
    h = link_h(x, params.beta)
    m = np.asarray([params.mu * h])
    return float(_loglik_terms(np.asarray([int(y)]), m, params.alpha)[0])


def log_likelihood(data: Dataset, params: ModelParams) -> float:
    """Sum of log_pmf over the dataset."""
    m = params.mu * _h_vector(data, params)
    return float(np.sum(_loglik_terms(data.y, m, params.alpha)))


def score(data: Dataset, params: ModelParams) -> np.ndarray:
    """Analytic gradient of log_likelihood in the order (beta..., mu, alpha).

    For alpha = INFINITE the returned vector has length d + 1 (no alpha
    component exists in the submodel).
    """
    y = data.y
    h = _h_vector(data, params)
    mu = params.mu
    m = mu * h
    dh = h * (1.0 - h)
    if params.is_poisson_size:
        dbeta = data.X.T @ ((y / h - mu) * dh)
        dmu = float(np.sum(y / mu - h))
        return np.concatenate([dbeta, [dmu]])
    a = params.alpha
    w = (a + y) / (a + m)
    dbeta = data.X.T @ ((y / h - w * mu) * dh)
    dmu = float(np.sum(y / mu - w * h))
    # log a + 1 - log(a+m) - w == -log1p(m/a) - (y-m)/(a+m), which stays
    # accurate when alpha dwarfs m; the digamma difference is a shift table.
    psi_diff = _shift_table(int(y.max()), a, 1)[y]
    dalpha = float(np.sum(psi_diff - np.log1p(m / a) - (y - m) / (a + m)))
    return np.concatenate([dbeta, [dmu, dalpha]])


def _mirrored(block: np.ndarray) -> np.ndarray:
    # BLAS may round the two triangles of X' diag(w) X differently; copy the
    # upper triangle down so the assembled Hessian is exactly symmetric.
    return np.triu(block) + np.triu(block, 1).T


def hessian(data: Dataset, params: ModelParams) -> np.ndarray:
    """Analytic Hessian of log_likelihood, ordered (beta..., mu, alpha).

    Assembled from the closed-form second derivatives of the marginal log
    density, including the second derivative of the logistic link. Returns a
    (d+1) x (d+1) matrix when alpha = INFINITE, else (d+2) x (d+2). The
    result is symmetric by construction.
    """
    y = data.y
    X = data.X
    d = data.d
    h = _h_vector(data, params)
    mu = params.mu
    m = mu * h
    dh = h * (1.0 - h)
    d2h = dh * (1.0 - 2.0 * h)

    if params.is_poisson_size:
        H = np.zeros((d + 1, d + 1))
        cb = (y / h - mu) * d2h - (y / h**2) * dh**2
        H[:d, :d] = _mirrored((X * cb[:, None]).T @ X)
        H[d, d] = float(np.sum(-y / mu**2))
        cross = -(dh @ X)
        H[:d, d] = cross
        H[d, :d] = cross
        return H

    a = params.alpha
    am = a + m
    w = (a + y) / am
    H = np.zeros((d + 2, d + 2))
    cb = (y / h - w * mu) * d2h + ((a + y) * mu**2 / am**2 - y / h**2) * dh**2
    H[:d, :d] = _mirrored((X * cb[:, None]).T @ X)
    H[d, d] = float(np.sum(-y / mu**2 + (a + y) * h**2 / am**2))
    # trigamma difference as a shift table; 1/a - 1/(a+m) written m/(a(a+m)).
    psi1_diff = -_shift_table(int(y.max()), a, 2)[y]
    H[d + 1, d + 1] = float(np.sum(psi1_diff + m / (a * am) + (y - m) / am**2))
    bm = (-(a + y) * a / am**2 * dh) @ X
    H[:d, d] = bm
    H[d, :d] = bm
    ba = (mu * (y - m) / am**2 * dh) @ X
    H[:d, d + 1] = ba
    H[d + 1, :d] = ba
    ma = float(np.sum(h * (y - m) / am**2))
    H[d, d + 1] = ma
    H[d + 1, d] = ma
    return H
