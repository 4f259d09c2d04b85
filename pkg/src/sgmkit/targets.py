"""
targets.py
──────────
Analytic target distributions with samplers and closed-form scores of their
Gaussian-smoothed marginals.

If X₀ ~ P₀ and Y = m·X₀ + σ·Z, the smoothed marginal of a Gaussian mixture
is again a Gaussian mixture with component means m·μ_i and (diagonal)
variances m²·v_i + σ².  The uniform cube factorizes per axis into
Gaussian-convolved-box densities (erf differences), so no quadrature is
needed in any dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import schedule as sched

_LOG_FLOOR = -745.0  # below double underflow for exp


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class GaussianMixture:
    """Mixture of diagonal-covariance Gaussians in R^d.

    weights: (k,) nonnegative, summing to 1; zero-weight components pruned.
    means: (k, d); variances: (k, d) strictly positive diagonals.
    """

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        mu = np.atleast_2d(np.asarray(self.means, dtype=float))
        v = np.atleast_2d(np.asarray(self.variances, dtype=float))
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1")
        if np.any(w < 0.0):
            raise ValueError("mixture weights must be nonnegative")
        keep = w > 0.0
        w, mu, v = w[keep], mu[keep], v[keep]
        if np.any(v <= 0.0):
            raise ValueError("variances must be positive")
        if not (mu.shape == v.shape and mu.shape[0] == w.shape[0]):
            raise ValueError("weights/means/variances shapes inconsistent")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "variances", v)

    @property
    def d(self) -> int:
        return self.means.shape[1]

    def sample(self, n: int, seed) -> np.ndarray:
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = _rng(seed)
        idx = rng.choice(len(self.weights), size=n, p=self.weights)
        z = rng.standard_normal((n, self.d))
        return self.means[idx] + np.sqrt(self.variances[idx]) * z

    def pushed(self, m: float, s: float) -> "GaussianMixture":
        """Law of m·X + s·Z: means scale by m, variances become m²v + s²."""
        return GaussianMixture(
            self.weights, m * self.means, m * m * self.variances + s * s
        )

    def smoothed(self, t: float) -> "GaussianMixture":
        """OU marginal at time t."""
        return self.pushed(float(sched.m(t)), float(sched.sigma(t)))

    def _component_logpdfs(self, y: np.ndarray) -> np.ndarray:
        # y: (G, d) -> (G, k)
        diff = y[:, None, :] - self.means[None, :, :]
        quad = np.sum(diff * diff / self.variances[None, :, :], axis=2)
        lognorm = 0.5 * np.sum(np.log(2.0 * np.pi * self.variances), axis=1)
        return -0.5 * quad - lognorm[None, :]

    def log_density(self, y) -> np.ndarray:
        y = np.atleast_2d(np.asarray(y, dtype=float))
        lp = self._component_logpdfs(y) + np.log(self.weights)[None, :]
        mx = lp.max(axis=1)
        out = mx + np.log(np.sum(np.exp(lp - mx[:, None]), axis=1))
        return np.maximum(out, _LOG_FLOOR)

    def density(self, y) -> np.ndarray:
        return np.exp(self.log_density(y))

    def score(self, y) -> np.ndarray:
        """∇log p(y): softmax-weighted sum of per-component Gaussian scores."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        lp = self._component_logpdfs(y) + np.log(self.weights)[None, :]
        lp -= lp.max(axis=1, keepdims=True)
        w = np.exp(lp)
        w /= w.sum(axis=1, keepdims=True)
        comp_score = (self.means[None, :, :] - y[:, None, :]) / self.variances[None, :, :]
        return np.sum(w[:, :, None] * comp_score, axis=1)

    def mean(self) -> np.ndarray:
        return self.weights @ self.means


@dataclass(frozen=True)
class UniformCube:
    """Uniform distribution on [0,1]^d."""

    d: int = 1

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")

    def sample(self, n: int, seed) -> np.ndarray:
        if n < 1:
            raise ValueError("n must be >= 1")
        return _rng(seed).random((n, self.d))

    def smoothed_log_density(self, t: float, y) -> np.ndarray:
        """log density of m_t·U + σ_t·Z, U ~ Unif[0,1]^d (product of axes)."""
        mt, st = float(sched.m(t)), float(sched.sigma(t))
        if st <= 0.0:
            raise ValueError("uniform cube needs t > 0 for a smooth density")
        y = np.atleast_2d(np.asarray(y, dtype=float))
        from scipy.special import log_ndtr  # noqa: PLC0415

        # per-axis density (Φ(y/σ) − Φ((y−m)/σ))/m, assembled in log space
        a = log_ndtr(y / st)
        b = log_ndtr((y - mt) / st)
        with np.errstate(divide="ignore"):
            axis_log = a + np.log(-np.expm1(np.minimum(b - a, -1e-300)))
        axis_log = np.maximum(axis_log - math.log(mt), _LOG_FLOOR)
        return np.sum(axis_log, axis=1)

    def smoothed_score(self, t: float, y) -> np.ndarray:
        """∇log of the smoothed density: per-axis f'/f with f as above."""
        mt, st = float(sched.m(t)), float(sched.sigma(t))
        if st <= 0.0:
            raise ValueError("uniform cube needs t > 0")
        y = np.atleast_2d(np.asarray(y, dtype=float))
        from scipy.special import log_ndtr  # noqa: PLC0415

        def logphi(u):
            return -0.5 * u * u - 0.5 * math.log(2.0 * math.pi)

        u0, u1 = y / st, (y - mt) / st
        a, b = log_ndtr(u0), log_ndtr(u1)
        logf = a + np.log(-np.expm1(np.minimum(b - a, -1e-300)))
        # f'(y) = (φ(y/σ) − φ((y−m)/σ))/(mσ); signed log-space difference
        la, lb = logphi(u0), logphi(u1)
        hi = np.maximum(la, lb)
        num = np.exp(la - hi) - np.exp(lb - hi)
        return num * np.exp(hi - logf) / st


def sample(target, n: int, seed) -> np.ndarray:
    """n i.i.d. draws from the target; deterministic given seed."""
    return target.sample(n, seed)


def true_score(target, t: float, y) -> np.ndarray:
    """∇log p_t(y) of the OU-smoothed marginal of the target."""
    if isinstance(target, GaussianMixture):
        return target.smoothed(t).score(y)
    if isinstance(target, UniformCube):
        return target.smoothed_score(t, y)
    raise TypeError(f"unsupported target {type(target).__name__}")


def true_density(target, t: float, y) -> np.ndarray:
    """p_t(y) of the OU-smoothed marginal."""
    return np.exp(true_log_density(target, t, y))


def true_log_density(target, t: float, y) -> np.ndarray:
    if isinstance(target, GaussianMixture):
        return target.smoothed(t).log_density(y)
    if isinstance(target, UniformCube):
        return target.smoothed_log_density(t, y)
    raise TypeError(f"unsupported target {type(target).__name__}")


def standard_normal(d: int = 1) -> GaussianMixture:
    return GaussianMixture(
        np.ones(1), np.zeros((1, d)), np.ones((1, d))
    )


def symmetric_bimodal(d: int = 1, sep: float = 2.0, var: float = 0.25) -> GaussianMixture:
    """The ½N(−sep, var) + ½N(+sep, var) test mixture (first axis shifted)."""
    mu = np.zeros((2, d))
    mu[0, 0], mu[1, 0] = -sep, sep
    return GaussianMixture(np.array([0.5, 0.5]), mu, np.full((2, d), var))
