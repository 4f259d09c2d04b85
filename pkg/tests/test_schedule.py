"""Closed-form oracles and domain checks for the OU time maps."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sgmkit import schedule as sched
from sgmkit.schedule import DiffusionSchedule


def test_m_closed_form():
    t = np.array([0.0, 0.1, 1.0, 5.0])
    assert np.allclose(sched.m(t), np.exp(-t), rtol=0, atol=0)


def test_sigma2_matches_series_near_zero():
    # independent oracle: σ² = 2t − 2t² + (4/3)t³ − … for tiny t
    for t in (1e-12, 1e-9, 1e-6):
        series = 2 * t - 2 * t * t + (4.0 / 3.0) * t ** 3
        assert sched.sigma2(t) == pytest.approx(series, rel=1e-10)


def test_sigma2_no_cancellation_loss():
    # the naive 1 − e^{−2t} would round to 0 here
    t = 1e-18
    assert sched.sigma2(t) > 0.0
    assert sched.sigma2(t) == pytest.approx(2e-18, rel=1e-12)


def test_regularizer_formula():
    n, t, d = 64, 0.3, 2
    s2 = -math.expm1(-2 * t)
    expected = (2 * math.pi * s2) ** (-d / 2) / (math.e * n)
    assert sched.regularizer(n, t, d) == pytest.approx(expected, rel=1e-14)
    assert math.log(sched.regularizer(n, t, d)) == pytest.approx(
        sched.log_regularizer(n, t, d), rel=1e-12)


def test_regularizer_domain():
    with pytest.raises(ValueError):
        sched.regularizer(64, 0.0, 1)
    with pytest.raises(ValueError):
        sched.regularizer(0, 0.5, 1)
    with pytest.raises(ValueError):
        sched.m(-0.1)


def test_score_sup_bound_formula():
    n, t = 128, 0.25
    expected = math.sqrt(2 * (math.log(n) + 1)) / math.sqrt(-math.expm1(-2 * t))
    assert sched.score_sup_bound(n, t) == pytest.approx(expected, rel=1e-14)


def test_early_stop_time():
    assert sched.early_stop_time(2 ** 10, 2.0, 1) == pytest.approx(
        2.0 ** (-20.0 / 5.0))
    with pytest.raises(ValueError):
        sched.early_stop_time(16, 2.5, 1)


def test_default_horizon():
    assert sched.default_horizon(100, c=2.0) == pytest.approx(2 * math.log(100))
    with pytest.raises(ValueError):
        sched.default_horizon(1)


@given(st.floats(min_value=0.0, max_value=50.0))
def test_pythagorean_identity(t):
    assert float(sched.m(t)) ** 2 + float(sched.sigma2(t)) == pytest.approx(
        1.0, abs=1e-14)


@given(st.floats(min_value=1e-6, max_value=20.0),
       st.floats(min_value=1e-6, max_value=20.0))
def test_monotone_maps(t1, t2):
    lo, hi = sorted((t1, t2))
    assert float(sched.m(hi)) <= float(sched.m(lo))
    assert float(sched.sigma(hi)) >= float(sched.sigma(lo))


def test_schedule_object():
    s = DiffusionSchedule(t0=0.05, T=2.0, d=1)
    grid = s.log_time_grid(9)
    assert grid[0] == pytest.approx(0.05) and grid[-1] == pytest.approx(2.0)
    assert np.all(np.diff(np.log(grid)) > 0)
    # log-uniform spacing
    assert np.allclose(np.diff(np.log(grid)), np.diff(np.log(grid))[0])
    with pytest.raises(ValueError):
        DiffusionSchedule(t0=1.0, T=0.5, d=1)
    with pytest.raises(ValueError):
        DiffusionSchedule(t0=0.1, T=1.0, d=0)
