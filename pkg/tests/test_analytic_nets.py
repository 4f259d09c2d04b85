"""Interpolant networks for exp, roots, reciprocal, and the OU time maps."""

import math

import numpy as np
import pytest

from sgmkit.relunet import (
    ApproxParams,
    build_exp,
    build_inv_sigma2k_net,
    build_m_net,
    build_reciprocal,
    build_root,
    build_schedule_nets,
    build_sigma2_net,
    clamp_above_net,
    graded_mesh,
    pwl_interp_net,
)


def test_graded_mesh_meets_tolerance():
    # interpolating x² on the mesh must satisfy the requested sup error
    tol = 1e-4
    nodes = graded_mesh(lambda x: np.full_like(np.asarray(x, float), 2.0),
                        0.0, 1.0, tol)
    net = pwl_interp_net(lambda x: np.asarray(x) ** 2, nodes)
    x = np.linspace(0, 1, 20001)
    assert np.max(np.abs(net(x[:, None]).ravel() - x ** 2)) <= tol * (1 + 1e-9)


def test_pwl_interp_exact_at_nodes():
    nodes = np.array([0.1, 0.4, 1.0, 2.0])
    net = pwl_interp_net(np.sin, nodes)
    assert np.allclose(net(nodes[:, None]).ravel(), np.sin(nodes), atol=1e-14)


def test_clamp_above():
    net = clamp_above_net(2.0)
    x = np.array([[-1.0], [1.5], [5.0]])
    assert np.allclose(net(x).ravel(), [-1.0, 1.5, 2.0])


@pytest.mark.parametrize("R,params", [(4.0, ApproxParams(4, 2)),
                                      (9.0, ApproxParams(3, 3, s=2))])
def test_exp_certificate(R, params):
    net, cert = build_exp(R, params)
    assert cert.measured <= cert.claimed
    x = np.linspace(0, R, 3001)
    assert np.max(np.abs(net(x[:, None]).ravel() - np.exp(-x))) <= cert.claimed


def test_exp_domain_guard():
    with pytest.raises(ValueError):
        build_exp(100.0, ApproxParams(2, 2))  # needs N⁻²L⁻² ≤ 1/R


@pytest.mark.parametrize("k", [2, 3])
def test_root_certificate(k):
    net, cert = build_root(k, 2.0, ApproxParams(4, 2))
    assert cert.measured <= cert.claimed
    x = np.concatenate([[0.0], np.geomspace(1e-10, 2.0, 3001)])
    err = np.max(np.abs(net(x[:, None]).ravel() - x ** (1.0 / k)))
    assert err <= cert.claimed


def test_root_identity_case():
    net, cert = build_root(1, 3.0, ApproxParams(2, 2))
    x = np.linspace(0, 3, 11)[:, None]
    assert np.array_equal(net(x), x)


def test_reciprocal_robust_contract():
    eps = 0.05
    net, cert = build_reciprocal(eps)
    assert cert.measured <= eps
    # robust bound: |φ(x′) − 1/x| ≤ ε + |x′ − x|/ε² including outside [ε, 1/ε]
    rng = np.random.default_rng(0)
    x = rng.uniform(eps, 1 / eps, 500)
    xp = x + rng.uniform(-0.5, 0.5, 500)
    err = np.abs(net(xp[:, None]).ravel() - 1.0 / x)
    assert np.all(err <= eps + np.abs(xp - x) / eps ** 2 + 1e-12)


def test_m_and_sigma2_nets():
    params = ApproxParams(4, 2)
    mnet, mcert = build_m_net(params)
    s2net, s2cert = build_sigma2_net(params)
    t = np.linspace(0, 6, 2001)
    assert np.max(np.abs(mnet(t[:, None]).ravel() - np.exp(-t))) <= mcert.claimed
    assert np.max(np.abs(s2net(t[:, None]).ravel() + np.expm1(-2 * t))) \
        <= s2cert.claimed


def test_inv_sigma2k_net():
    params = ApproxParams(4, 2)
    t0 = 0.1
    net, cert = build_inv_sigma2k_net(params, t0, k=2)
    t = np.geomspace(t0, 8.0, 2001)
    f = (-np.expm1(-2 * t)) ** -2.0
    assert np.max(np.abs(net(t[:, None]).ravel() - f)) <= cert.claimed


def test_schedule_nets_bundle():
    nets, certs = build_schedule_nets(ApproxParams(3, 2), t0=0.2)
    assert len(nets) == 3 and all(c.measured <= c.claimed for c in certs)
