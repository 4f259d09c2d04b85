"""KDE score estimators against brute-force and closed-form oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sgmkit import schedule as sched
from sgmkit import targets
from sgmkit.kde_score import (
    KdeScoreEstimator,
    QuadratureSpec,
    default_quadrature,
    field_of,
    weighted_mse,
)
from sgmkit.schedule import DiffusionSchedule

SCH = DiffusionSchedule(t0=0.05, T=2.0, d=1)


def _brute_kde(x, t, y):
    """Direct (unvectorized-ish) diffused KDE density and gradient."""
    mt, s2 = float(sched.m(t)), float(sched.sigma2(t))
    d = x.shape[1]
    norm = (2 * math.pi * s2) ** (-d / 2) / len(x)
    diff = y[:, None, :] - mt * x[None, :, :]
    kern = np.exp(-np.sum(diff ** 2, axis=2) / (2 * s2))
    dens = norm * kern.sum(axis=1)
    grad = norm * np.einsum("gi,gid->gd", kern, -diff / s2)
    return dens, grad


@pytest.fixture(scope="module")
def est():
    x = targets.symmetric_bimodal(1).sample(32, 0)
    return KdeScoreEstimator(x, SCH)


def test_log_density_matches_brute_force(est):
    y = np.linspace(-4, 4, 25)[:, None]
    dens, _ = _brute_kde(est.samples, 0.3, y)
    assert np.allclose(np.exp(est.log_density(0.3, y)), dens, rtol=1e-10)


def test_score_matches_brute_force_gradient(est):
    y = np.linspace(-4, 4, 25)[:, None]
    dens, grad = _brute_kde(est.samples, 0.3, y)
    assert np.allclose(est.score(0.3, y), grad / dens[:, None], rtol=1e-9)


def test_score_stable_in_far_tail(est):
    # log-space softmax keeps the score finite where the density underflows
    y = np.array([[80.0], [-80.0]])
    out = est.score(0.05, y)
    assert np.all(np.isfinite(out))


def test_regularized_equals_ratio_oracle(est):
    t, y = 0.3, np.linspace(-6, 6, 101)[:, None]
    dens, grad = _brute_kde(est.samples, t, y)
    rho = float(sched.regularizer(est.n, t, 1))
    expect = grad / np.maximum(dens, rho)[:, None]
    assert np.allclose(est.regularized_score(t, y), expect, rtol=1e-8, atol=1e-12)


def test_truncated_zeroes_low_density(est):
    t = 0.3
    y = np.array([[0.0], [30.0]])  # near mass / far tail
    out = est.truncated_score(t, y)
    dens, _ = _brute_kde(est.samples, t, y)
    rho = float(sched.regularizer(est.n, t, 1))
    assert dens[0] > rho and np.any(out[0] != 0.0)
    assert dens[1] <= rho and np.all(out[1] == 0.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.06, 1.9), st.floats(-30.0, 30.0))
def test_regularized_score_uniform_bound(seed, t, y0):
    x = np.random.default_rng(seed).standard_normal((8, 1)) * 2.0
    e = KdeScoreEstimator(x, SCH)
    g = e.regularized_score(t, np.array([[y0]]))
    assert abs(g[0, 0]) <= sched.score_sup_bound(8, t) * (1 + 1e-12)


def test_requires_positive_time(est):
    with pytest.raises(ValueError):
        est.score(0.0, np.zeros((1, 1)))


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        KdeScoreEstimator(np.zeros((4, 2)), SCH)


def test_weighted_mse_zero_for_identical_fields():
    tgt = targets.standard_normal(1)
    f = field_of(tgt, "true")
    assert weighted_mse(f, f, 0.5, tgt, default_quadrature(1), 1) == 0.0


def test_weighted_mse_constant_offset_oracle():
    # fields differing by constant c: MSE = c² ∫p = c²
    tgt = targets.standard_normal(1)
    f = field_of(tgt, "true")
    g = lambda t, y: f(t, y) + 0.3
    v = weighted_mse(f, g, 0.5, tgt, default_quadrature(1), 1)
    assert v == pytest.approx(0.09, rel=1e-6)


def test_weighted_mse_grid_vs_mc_agree(est):
    tgt = targets.symmetric_bimodal(1)
    f = field_of(est, "regularized")
    g = field_of(tgt, "true")
    grid = weighted_mse(f, g, 0.4, tgt, default_quadrature(1), 1)
    mc, se = weighted_mse(f, g, 0.4, tgt,
                          QuadratureSpec("mc", points=40_000), 1, seed=3)
    assert abs(mc - grid) < 5 * se + 1e-3


def test_field_of_kinds(est):
    y = np.linspace(-2, 2, 7)[:, None]
    assert np.allclose(field_of(est, "regularized")(0.4, y),
                       est.regularized_score(0.4, y))
    assert np.allclose(field_of(est, "truncated")(0.4, y),
                       est.truncated_score(0.4, y))
    with pytest.raises(ValueError):
        field_of(est, "bogus")
