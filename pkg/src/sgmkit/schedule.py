"""
schedule.py
───────────
Ornstein–Uhlenbeck time maps and the derived quantities every other module
consumes.

The forward process dX_t = −X_t dt + √2 dB_t has the closed-form marginal

    X_t = m_t · X_0 + σ_t · Z,    m_t = e^{−t},   σ_t = sqrt(1 − e^{−2t}),

so m_t² + σ_t² = 1 exactly.  σ_t is evaluated as sqrt(−expm1(−2t)) to keep
full precision near t = 0 where 1 − e^{−2t} cancels catastrophically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _check_time(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("time must be nonnegative")
    return t


def m(t):
    """Mean-decay factor m_t = e^{−t}."""
    return np.exp(-_check_time(t))


def sigma2(t):
    """Noise variance σ_t² = 1 − e^{−2t}, computed via expm1."""
    return -np.expm1(-2.0 * _check_time(t))


def sigma(t):
    """Noise scale σ_t = sqrt(1 − e^{−2t})."""
    return np.sqrt(sigma2(t))


def regularizer(n: int, t, d: int):
    """Density floor ρ_{n,t} = (2πσ_t²)^{−d/2} e⁻¹ n⁻¹.

    Diverges as t → 0, hence t = 0 is a domain error.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if d < 1:
        raise ValueError("d must be >= 1")
    t = _check_time(t)
    s2 = sigma2(t)
    if np.any(s2 <= 0.0):
        raise ValueError("regularizer requires t > 0 (σ_t = 0 at t = 0)")
    return (2.0 * np.pi * s2) ** (-0.5 * d) / (math.e * n)


def log_regularizer(n: int, t, d: int):
    """log ρ_{n,t}, for comparisons that must stay in log space."""
    if n < 1:
        raise ValueError("n must be >= 1")
    t = _check_time(t)
    s2 = sigma2(t)
    if np.any(s2 <= 0.0):
        raise ValueError("log_regularizer requires t > 0")
    return -0.5 * d * np.log(2.0 * np.pi * s2) - 1.0 - math.log(n)


def score_sup_bound(n: int, t):
    """Uniform bound sqrt(2(log n + 1))/σ_t on the regularized score norm.

    This is sqrt((2/σ²)·log((2πσ²)^{−d/2}/ρ_{n,t})) with ρ_{n,t} as above;
    the d-dependent prefactors cancel.
    """
    return math.sqrt(2.0 * (math.log(n) + 1.0)) / sigma(t)


def early_stop_time(n: int, s: float, d: int) -> float:
    """Early-stopping time t₀ = n^{−2/(d+2s)} for smoothness s ∈ (0, 2]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 < s <= 2.0):
        raise ValueError("smoothness s must lie in (0, 2]")
    if d < 1:
        raise ValueError("d must be >= 1")
    return float(n) ** (-2.0 / (d + 2.0 * s))


def default_horizon(n: int, c: float = 1.0) -> float:
    """Default reverse-process horizon T = c·log n (any polylog horizon works)."""
    if n < 2:
        raise ValueError("n must be >= 2 for a positive horizon")
    return c * math.log(n)


@dataclass(frozen=True)
class DiffusionSchedule:
    """OU schedule: early-stop time t0, horizon T, dimension d, sub-Gaussian α.

    alpha is metadata used by network builders to size evaluation domains.
    """

    t0: float
    T: float
    d: int
    alpha: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.t0 < self.T):
            raise ValueError("need 0 < t0 < T")
        if self.d < 1:
            raise ValueError("d must be a positive integer")
        if self.alpha < 0.0:
            raise ValueError("alpha must be nonnegative")

    def m(self, t):
        return m(t)

    def sigma(self, t):
        return sigma(t)

    def sigma2(self, t):
        return sigma2(t)

    def regularizer(self, n: int, t):
        return regularizer(n, t, self.d)

    def log_time_grid(self, num: int) -> np.ndarray:
        """Log-uniform grid from t0 up to T (increasing)."""
        if num < 2:
            raise ValueError("need at least 2 grid points")
        return np.exp(np.linspace(math.log(self.t0), math.log(self.T), num))
