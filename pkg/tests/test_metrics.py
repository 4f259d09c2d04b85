"""Divergences and rate fits against closed-form Gaussian oracles."""

import math

import numpy as np
import pytest
from scipy.stats import norm

from sgmkit import metrics, targets
from sgmkit.kde_score import default_quadrature, field_of
from sgmkit.metrics import fit_rate
from sgmkit.schedule import DiffusionSchedule

GRID = np.linspace(-12, 12, 8001)
P = lambda x: norm.pdf(x)                 # N(0,1)
Q = lambda x: norm.pdf(x, loc=0.5)        # N(0.5,1)


def test_fit_rate_exact_power_law():
    xs = np.array([1.0, 2.0, 4.0, 8.0])
    fit = fit_rate(xs, 3.0 * xs ** -1.5)
    assert fit.slope == pytest.approx(-1.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
    assert fit.residual == pytest.approx(0.0, abs=1e-10)


def test_fit_rate_validation():
    with pytest.raises(ValueError):
        fit_rate([1, 2], [1, 2])
    with pytest.raises(ValueError):
        fit_rate([1, 2, 2], [1, 1, 1])
    with pytest.raises(ValueError):
        fit_rate([1, 2, 3], [1, -1, 1])


def test_kl_gaussian_mean_shift():
    # KL(N(0,1) ‖ N(μ,1)) = μ²/2
    assert metrics.kl_grid(P, Q, GRID) == pytest.approx(0.125, abs=1e-6)


def test_hellinger_gaussian_oracle():
    # H² = 2(1 − exp(−μ²/8)) for equal unit variances
    want = 2.0 * (1.0 - math.exp(-0.25 / 8.0))
    assert metrics.hellinger_grid(P, Q, GRID) == pytest.approx(want, abs=1e-6)


def test_tv_gaussian_oracle():
    # TV(N(0,1), N(μ,1)) = 2Φ(μ/2) − 1
    want = 2.0 * norm.cdf(0.25) - 1.0
    assert metrics.tv_grid(P, Q, GRID) == pytest.approx(want, abs=1e-6)


def test_pinsker_chain_on_grid():
    kl = metrics.kl_grid(P, Q, GRID)
    assert metrics.hellinger_grid(P, Q, GRID) <= kl + 1e-9
    assert metrics.tv_grid(P, Q, GRID) <= math.sqrt(kl / 2.0) + 1e-9


def test_tv_histogram_identical_and_disjoint():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((5000, 1))
    tv, se = metrics.tv_histogram(a, a.copy(), 64, (-5, 5))
    assert tv == 0.0
    b = a + 100.0  # fully outside the binning range on the other side
    tv2, _ = metrics.tv_histogram(a, b, 64, (-5, 5))
    assert tv2 == pytest.approx(0.5)  # b contributes no in-range mass
    with pytest.raises(ValueError):
        metrics.tv_histogram(np.zeros((4, 3)), np.zeros((4, 3)))


def test_score_matching_loss_constant_field_oracle():
    # fields differing by c: loss = c²(T − t0)
    tgt = targets.standard_normal(1)
    sch = DiffusionSchedule(t0=0.2, T=1.2, d=1)
    f = field_of(tgt, "true")
    g = lambda t, y: f(t, y) + 0.3
    tg = np.linspace(sch.t0, sch.T, 21)
    loss = metrics.score_matching_loss(f, g, sch, tgt, tg, default_quadrature(1))
    assert loss == pytest.approx(0.09 * 1.0, rel=1e-5)


def test_smoothed_empirical_kl_positive_and_decreasing():
    tgt = targets.standard_normal(1)
    grid = np.linspace(-10, 10, 2001)
    small = np.mean([metrics.smoothed_empirical_kl(tgt, 32, 0.5, s, grid)
                     for s in range(5)])
    big = np.mean([metrics.smoothed_empirical_kl(tgt, 1024, 0.5, s, grid)
                   for s in range(5)])
    assert 0.0 < big < small


def test_truncation_l1_gaussian_oracle():
    # ‖p − p∗φ_σ‖₁ for p = N(0,1): difference of N(0,1) and N(0,1+σ²)
    sigma = 0.3
    x = np.linspace(-10, 10, 8001)
    got = metrics.truncation_l1(lambda u: norm.pdf(u), sigma, x)
    want = np.trapezoid(np.abs(norm.pdf(x) -
                               norm.pdf(x, scale=math.sqrt(1 + sigma ** 2))), x)
    assert got == pytest.approx(want, rel=2e-3)


def test_truncation_l1_requires_uniform_grid():
    with pytest.raises(ValueError):
        metrics.truncation_l1(lambda u: norm.pdf(u), 0.1, np.geomspace(1, 10, 50))


def test_truncation_quadratic_scaling():
    # C² density ⇒ error ∝ σ²
    dens = lambda u: targets.symmetric_bimodal(1).density(u[:, None])
    x = np.linspace(-8, 8, 8001)
    sigmas = [0.4, 0.2, 0.1, 0.05]
    vals = [metrics.truncation_l1(dens, s, x) for s in sigmas]
    fit = fit_rate(sorted(sigmas), [v for _, v in sorted(zip(sigmas, vals))])
    assert 1.8 <= fit.slope <= 2.2
