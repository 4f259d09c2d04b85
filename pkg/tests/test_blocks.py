"""Elementary constructive builders vs exact references."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sgmkit.relunet import (
    ApproxParams,
    BudgetError,
    build_abs,
    build_max,
    build_mid,
    build_monomial,
    build_point_fit,
    build_polynomial,
    build_product,
    build_square,
    build_step,
    pwl_net,
    step_capacity,
)


def test_abs_max_mid_exact():
    x = np.linspace(-3, 3, 31)
    assert np.array_equal(build_abs()(x[:, None]).ravel(), np.abs(x))
    pairs = np.random.default_rng(1).standard_normal((50, 2))
    assert np.allclose(build_max()(pairs).ravel(), pairs.max(axis=1), atol=1e-14)
    triples = np.random.default_rng(2).standard_normal((50, 3))
    assert np.allclose(build_mid()(triples).ravel(),
                       np.median(triples, axis=1), atol=1e-12)


def test_pwl_net_interpolates_and_clamps():
    xs = np.array([0.0, 1.0, 3.0])
    ys = np.array([1.0, -1.0, 2.0])
    net = pwl_net(xs, ys)
    assert np.allclose(net(xs[:, None]).ravel(), ys, atol=1e-14)
    assert net(np.array([[-5.0]]))[0, 0] == pytest.approx(1.0)   # left clamp
    assert net(np.array([[10.0]]))[0, 0] == pytest.approx(2.0)   # right clamp
    assert net(np.array([[0.5]]))[0, 0] == pytest.approx(0.0)    # linear inside


def test_square_certificate_and_paper_value():
    net, cert = build_square(0.0, 1.0, ApproxParams(4, 3))
    assert cert.measured <= cert.claimed
    assert cert.claimed == pytest.approx(4.0 ** -3)  # N^{-L} on a unit interval
    x = np.linspace(0, 1, 5001)
    assert np.max(np.abs(net(x[:, None]).ravel() - x ** 2)) <= cert.claimed


def test_square_general_interval():
    net, cert = build_square(-2.0, 3.0, ApproxParams(4, 4))
    x = np.linspace(-2, 3, 4001)
    err = np.max(np.abs(net(x[:, None]).ravel() - x ** 2))
    assert err <= 25.0 * 4.0 ** -4  # (b−a)²·N^{−L}
    assert err == pytest.approx(cert.measured, rel=1e-4)  # different grids


def test_square_error_decreases_with_depth():
    errs = [build_square(0, 1, ApproxParams(4, L))[1].measured for L in (1, 2, 3, 4)]
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_product_certificate_and_exact_edges():
    net, cert = build_product(-1.0, 2.0, 0.5, 3.0, ApproxParams(4, 3))
    assert cert.measured <= cert.claimed
    # polarization is exact where any factor sits at a sawtooth node corner
    corners = np.array([[-1.0, 0.5], [-1.0, 3.0], [2.0, 0.5], [2.0, 3.0]])
    assert np.allclose(net(corners).ravel(), corners.prod(axis=1), atol=1e-9)


def test_product_n1_affine_fallback():
    net, cert = build_product(0.0, 1.0, 0.0, 1.0, ApproxParams(1, 1))
    assert cert.measured <= cert.claimed == pytest.approx(6.0)


def test_monomial_matches_power():
    net, cert = build_monomial(3, 1.5, ApproxParams(2, 1, s=3))
    x = np.random.default_rng(3).uniform(-1.5, 1.5, (500, 3))
    err = np.max(np.abs(net(x).ravel() - x.prod(axis=1)))
    assert err <= cert.claimed
    with pytest.raises(ValueError):
        build_monomial(3, 1.0, ApproxParams(2, 1, s=2))  # needs s >= k


def test_polynomial_multi_index():
    net, cert = build_polynomial([2, 1], 1.0, ApproxParams(2, 1, s=3))
    y = np.random.default_rng(4).uniform(-1, 1, (300, 2))
    err = np.max(np.abs(net(y).ravel() - y[:, 0] ** 2 * y[:, 1]))
    assert err <= cert.claimed
    # degenerate indices are exact selectors/constants
    net0, cert0 = build_polynomial([0, 0], 1.0, ApproxParams(2, 1))
    assert np.allclose(net0(y).ravel(), 1.0)
    net1, cert1 = build_polynomial([0, 1], 1.0, ApproxParams(2, 1))
    assert np.array_equal(net1(y).ravel(), y[:, 1])


def test_step_exact_on_retained_intervals():
    params = ApproxParams(4, 2)
    K, a, b, delta = 12, -1.0, 2.0, 0.02
    net = build_step(a, b, K, delta, params)
    w = (b - a) / K
    for k in range(K):
        lo = a + k * w
        hi = a + (k + 1) * w - (delta if k < K - 1 else 0.0)
        xs = np.linspace(lo, hi, 25)[:, None]
        assert np.allclose(net(xs).ravel(), k, atol=1e-8), f"cell {k}"


def test_step_capacity_and_budget():
    params = ApproxParams(4, 2)
    assert step_capacity(params) == 64  # ⌊N^{1/d}⌋²·⌊L^{2/d}⌋ = 4²·4 at d=1
    with pytest.raises(ValueError):
        build_step(0.0, 1.0, 4, 0.2, params)  # delta too large


def test_point_fit_exact_at_integers():
    vals = np.random.default_rng(5).random(9)
    net = build_point_fit(vals, ApproxParams(3, 2))
    got = net(np.arange(9, dtype=float)[:, None]).ravel()
    assert np.allclose(got, vals, atol=1e-12)
    # constant extrapolation keeps the output in [0,1]
    assert net(np.array([[-4.0]]))[0, 0] == pytest.approx(vals[0])
    assert net(np.array([[40.0]]))[0, 0] == pytest.approx(vals[-1])


def test_point_fit_budget_enforced():
    with pytest.raises(BudgetError):
        build_point_fit(np.linspace(0, 1, 50), ApproxParams(2, 2))  # K > N²L²
    with pytest.raises(ValueError):
        build_point_fit([0.5, 1.5], ApproxParams(2, 2))


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 6), st.integers(1, 4))
def test_square_meets_lemma_bound(N, L):
    net, cert = build_square(0.0, 1.0, ApproxParams(N, L))
    x = np.linspace(0, 1, 2001)
    assert np.max(np.abs(net(x[:, None]).ravel() - x ** 2)) <= float(N) ** -L
