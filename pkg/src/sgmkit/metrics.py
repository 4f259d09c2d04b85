"""
metrics.py
──────────
Divergences, losses, and rate fitting — the measurable quantities.

Score losses integrate kde_score.weighted_mse over a log-time grid by the
composite trapezoid rule; f-divergences are grid quadratures with the
usual flooring (q ≥ 1e−300 inside logs, integrand clipped where p is
negligible); TV between sample clouds is a binned L¹ with a bootstrap
standard error.  Rate claims are operationalized as least-squares slopes
on (log x, log y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import targets
from .kde_score import QuadratureSpec, weighted_mse
from .schedule import DiffusionSchedule
from .targets import GaussianMixture

_Q_FLOOR = 1e-300
_P_CLIP = 1e-14


@dataclass(frozen=True)
class RateFit:
    """Least-squares line on (log x, log y)."""

    xs: tuple
    ys: tuple
    slope: float
    intercept: float
    residual: float

    def __post_init__(self):
        if len(self.xs) < 3:
            raise ValueError("rate fit needs >= 3 points")


def fit_rate(xs, ys) -> RateFit:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 3:
        raise ValueError("rate fit needs >= 3 points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("rate fit needs positive data")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("x values must be strictly increasing")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = float(np.linalg.norm(ly - (slope * lx + intercept)))
    return RateFit(tuple(xs), tuple(ys), float(slope), float(intercept), resid)


def score_matching_loss(field_a, field_b, schedule: DiffusionSchedule,
                        weight_target, t_grid, quadrature: QuadratureSpec,
                        seed: int = 0) -> float:
    """∫_{t₀}^{T} E_{p_t}‖a − b‖² dt by composite trapezoid over t_grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ValueError("empty time grid")
    vals = []
    for t in t_grid:
        v = weighted_mse(field_a, field_b, float(t), weight_target, quadrature,
                         schedule.d, seed)
        vals.append(v[0] if isinstance(v, tuple) else v)
    return float(np.trapezoid(vals, t_grid))


def tv_histogram(samples_a, samples_b, bins: int = 64, rng_range=(-5.0, 5.0),
                 bootstrap: int = 100, seed: int = 0):
    """½Σ|p̂ − q̂| over a shared binning; returns (tv, bootstrap se)."""
    a = np.asarray(samples_a, dtype=float).reshape(len(samples_a), -1)
    b = np.asarray(samples_b, dtype=float).reshape(len(samples_b), -1)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("both sample sets must be nonempty")
    if not rng_range[0] < rng_range[1]:
        raise ValueError("degenerate range")
    d = a.shape[1]
    if d > 2:
        raise ValueError("binned TV supports d <= 2")
    edges = [np.linspace(rng_range[0], rng_range[1], bins + 1)] * d

    def tv_of(u, v):
        hu = np.histogramdd(u, bins=edges)[0] / len(u)
        hv = np.histogramdd(v, bins=edges)[0] / len(v)
        return 0.5 * float(np.sum(np.abs(hu - hv)))

    tv = tv_of(a, b)
    rng = np.random.default_rng(seed)
    reps = [
        tv_of(a[rng.integers(0, len(a), len(a))], b[rng.integers(0, len(b), len(b))])
        for _ in range(bootstrap)
    ]
    return tv, float(np.std(reps))


def _grid_weights(grid):
    grid = np.asarray(grid, dtype=float)
    w = np.gradient(grid)
    return grid, w


def kl_grid(p, q, grid) -> float:
    """∫ p log(p/q) on the grid, q floored, negligible-p region clipped."""
    x, w = _grid_weights(grid)
    pv = np.asarray(p(x), dtype=float)
    qv = np.maximum(np.asarray(q(x), dtype=float), _Q_FLOOR)
    mask = pv > _P_CLIP
    integrand = np.zeros_like(pv)
    integrand[mask] = pv[mask] * np.log(pv[mask] / qv[mask])
    return float(np.sum(integrand * w))


def hellinger_grid(p, q, grid) -> float:
    """H²(p,q) = ∫(√p − √q)²; asserted ≤ KL on the same grid."""
    x, w = _grid_weights(grid)
    pv = np.maximum(np.asarray(p(x), dtype=float), 0.0)
    qv = np.maximum(np.asarray(q(x), dtype=float), 0.0)
    h2 = float(np.sum((np.sqrt(pv) - np.sqrt(qv)) ** 2 * w))
    assert h2 <= kl_grid(p, q, grid) + 1e-9, "H² ≤ KL violated on grid"
    return h2


def tv_grid(p, q, grid) -> float:
    """½∫|p − q| on the grid (exact-density TV for the Pinsker chain)."""
    x, w = _grid_weights(grid)
    return 0.5 * float(np.sum(np.abs(np.asarray(p(x)) - np.asarray(q(x))) * w))


def smoothed_empirical_kl(target, n: int, sigma: float, seed, grid) -> float:
    """KL(P̂_σ ‖ P_σ): the σ-smoothed empirical mixture of n draws against
    the σ-smoothed target, integrated on the grid (d = 1)."""
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    x = targets.sample(target, n, seed)
    if x.shape[1] != 1:
        raise NotImplementedError("grid quadrature KL implemented for d = 1")
    emp = GaussianMixture(np.full(n, 1.0 / n), x, np.full((n, 1), sigma ** 2))
    smoothed = target.pushed(1.0, sigma)
    return kl_grid(lambda u: emp.density(u[:, None]),
                   lambda u: smoothed.density(u[:, None]), grid)


def truncation_l1(density, sigma: float, grid) -> float:
    """‖p − p∗φ_σ‖₁ by numerical convolution on a uniform grid (d = 1)."""
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    x = np.asarray(grid, dtype=float)
    dx = x[1] - x[0]
    if not np.allclose(np.diff(x), dx):
        raise ValueError("convolution grid must be uniform")
    p = np.asarray(density(x), dtype=float)
    half = int(math.ceil(8.0 * sigma / dx))
    offs = np.arange(-half, half + 1) * dx
    kern = np.exp(-offs ** 2 / (2.0 * sigma ** 2))
    kern /= kern.sum()  # discrete normalization keeps mass exactly
    conv = np.convolve(p, kern, mode="same")
    return float(np.sum(np.abs(p - conv)) * dx)
