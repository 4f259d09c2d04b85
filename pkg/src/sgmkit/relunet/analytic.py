"""
analytic.py
───────────
Constructive approximations of analytic scalar functions: exp(−x) on [0,R]
(step → table lookup → Taylor remainder → product, patched over the δ-gaps
with the three-shift mid trick), k-th roots, the reciprocal, and the OU
schedule maps m_t, σ_t², σ_t^{−2k}.

Roots, reciprocals and σ_t^{−2k} are realized as graded-mesh piecewise
linear interpolants: the mesh is refined where |f''| is large so every cell
meets the target tolerance, and the contract is certified on a dense grid.
"""

from __future__ import annotations

import math

import numpy as np

from .blocks import (
    build_mid,
    build_point_fit,
    build_step,
    product_to_tolerance,
    pwl_net,
)
from .certificate import (
    ApproxParams,
    BudgetError,
    ErrorCertificate,
    measure_sup,
)
from .network import (
    Layer,
    ReluNetwork,
    chain,
    from_affine,
    identity_net,
    parallel,
    selector_net,
)


# ── graded piecewise-linear meshes ───────────────────────────────────────
def graded_mesh(d2f, lo: float, hi: float, tol: float, max_nodes: int = 200_000):
    """Nodes lo=x₀<…<x_m=hi with per-cell chord error ≤ tol, assuming |f''|
    is nonincreasing on [lo, hi] (error ≤ h²·|f''(x_left)|/8)."""
    if lo >= hi:
        raise ValueError("need lo < hi")
    nodes = [lo]
    x = lo
    while x < hi:
        c = abs(float(d2f(x)))
        h = (hi - lo) if c == 0.0 else math.sqrt(8.0 * tol / c)
        h = min(h, hi - lo)
        x = min(hi, x + h)
        nodes.append(x)
        if len(nodes) > max_nodes:
            raise BudgetError("graded mesh needs too many nodes")
    return np.array(nodes)


def pwl_interp_net(f, nodes, clamp_right: bool = True) -> ReluNetwork:
    return pwl_net(nodes, f(np.asarray(nodes, dtype=float)), clamp_right)


def clamp_above_net(cap: float) -> ReluNetwork:
    """x ↦ min(x, cap), exact."""
    return ReluNetwork(
        (
            Layer(np.array([[-1.0]]), np.array([cap]), "relu"),
            Layer(np.array([[-1.0]]), np.array([cap]), "identity"),
        )
    )


# ── exp(−x) on [0, R] ────────────────────────────────────────────────────
def _exp_base_net(R: float, params: ApproxParams):
    """Unpatched g(x) ≈ exp(−x): exact on retained step cells, ramping in
    the δ-gaps.  Returns (net, interior error bound, δ)."""
    N, L, s = params.N, params.L, params.s
    K = N * N * L * L
    h = R / K
    base_tol = float(N) ** (-2 * s) * float(L) ** (-2 * s)
    delta = min(R / (3.0 * K), base_tol)
    step = build_step(0.0, R, K, delta, params)
    stage1 = parallel(step, identity_net(1))  # x -> [β, x]

    xi_branch = chain(
        selector_net(2, [0]), build_point_fit(np.exp(-h * np.arange(K)), params)
    )
    # Taylor factor T(x̃) = Σ_{r<s} (−x̃)^r/r!, x̃ = x − h·β ∈ [−h−δ, h+δ]
    xt_affine = from_affine(np.array([[-h, 1.0]]), np.array([0.0]))
    xt_lo, xt_hi = -h - delta, h + delta
    taylor_err = 0.0
    if s == 1:
        t_branch = from_affine(np.zeros((1, 2)), np.array([1.0]))
    elif s == 2:
        t_branch = from_affine(np.array([[h, -1.0]]), np.array([1.0]))
    else:
        pow_tol = base_tol / s
        branches = [identity_net(1)]
        for r in range(2, s):
            branches.append(_power_chain(r, xt_lo, xt_hi, pow_tol))
        coeffs = [(-1.0) ** r / math.factorial(r) for r in range(1, s)]
        t_of_xt = chain(
            parallel(*branches),
            from_affine(np.array([coeffs]), np.array([1.0])),
        )
        t_branch = chain(xt_affine, t_of_xt)
        taylor_err = (s - 2) * pow_tol
    stage2 = parallel(xi_branch, t_branch)

    grid = np.linspace(xt_lo, xt_hi, 200)
    tvals = sum(
        (-grid) ** r / math.factorial(r) for r in range(0, s)
    ) if s > 1 else np.ones_like(grid)
    t_lo = float(tvals.min()) - taylor_err - 1e-9
    t_hi = float(tvals.max()) + taylor_err + 1e-9
    prod = product_to_tolerance(0.0, 1.0, t_lo, t_hi, base_tol)
    g = chain(stage1, stage2, prod)
    # retained-cell error: Taylor remainder + Taylor sub-net + product
    interior = h ** s / math.factorial(s) + taylor_err * 1.0 + base_tol
    return g, interior, delta


def _power_chain(k: int, lo: float, hi: float, tol: float) -> ReluNetwork:
    """x^k on [lo, hi] within tol, by a chain of sawtooth products."""
    if k == 1:
        return identity_net(1)
    A = max(abs(lo), abs(hi), 1e-12)
    stage_tol = tol / (k * max(1.0, A) ** (k - 1))
    net = from_affine(np.array([[1.0], [1.0]]))  # x -> [P=x, x]
    cur = (min(lo, hi), max(lo, hi))
    err = 0.0
    from .blocks import _product_core  # noqa: PLC0415

    for _ in range(1, k):
        plo, phi = cur[0] - err, cur[1] + err
        stage = None
        for M in (2, 4, 6, 8):
            for depth in range(1, 40):
                if 0.75 * (phi - plo) * (hi - lo) * M ** (-2 * depth) <= stage_tol:
                    stage, stage_err = _product_core(plo, phi, lo, hi, M, depth)
                    break
            if stage is not None:
                break
        if stage is None:
            raise BudgetError("power chain tolerance unreachable")
        keep_x = selector_net(2, [1])
        net = chain(net, parallel(stage, keep_x))  # [P·x, x]
        err = stage_err + A * err
        corners = np.array([cur[0] * lo, cur[0] * hi, cur[1] * lo, cur[1] * hi])
        cur = (float(corners.min()), float(corners.max()))
    return chain(net, selector_net(2, [0]))


def exp_budget(params: ApproxParams) -> tuple[float, float]:
    s, N, L = params.s, params.N, params.L
    return (
        48.0 * s * s * (N + 1) * math.log2(8 * N),
        18.0 * s * s * (L + 2) * math.log2(4 * L) + 2,
    )


def build_exp(R: float, params: ApproxParams):
    """exp(−x) on [0,R]: error ≤ (45s + R^s + 4)N^{−2s}L^{−2s}, width ≤
    48s²(N+1)log₂(8N), depth ≤ 18s²(L+2)log₂(4L)+2 (needs N⁻²L⁻² ≤ R⁻¹)."""
    N, L, s = params.N, params.L, params.s
    if R <= 0.0:
        raise ValueError("R must be positive")
    if N ** -2 * L ** -2 > 1.0 / R * (1 + 1e-12):
        raise ValueError("exp lemma needs N^-2 L^-2 <= 1/R")
    g, interior, delta = _exp_base_net(R, params)
    shifted = [
        chain(from_affine(np.array([[1.0]]), np.array([sh])), g)
        for sh in (-delta, 0.0, delta)
    ]
    net = chain(parallel(*shifted), build_mid())
    wmax, dmax = exp_budget(params)
    if net.width > wmax or net.depth > dmax:
        raise BudgetError(
            f"exp: size ({net.width}×{net.depth}) exceeds budget ({wmax:.0f}×{dmax:.0f})"
        )
    base = float(N) ** (-2 * s) * float(L) ** (-2 * s)
    claimed = (45.0 * s + R ** s + 4.0) * base
    assert interior + delta <= claimed, "internal bound exceeds lemma bound"
    grid = np.linspace(0.0, R, 4001)[:, None]
    measured = measure_sup(net, lambda x: np.exp(-x), grid)
    cert = ErrorCertificate(
        "exp", f"R={R} N={N} L={L} s={s}", claimed, measured,
        net.width, net.depth, grid="4001 uniform",
    )
    return net, cert


# ── roots and reciprocal ─────────────────────────────────────────────────
def build_root(k: int, R: float, params: ApproxParams):
    """x^{1/k} on [0,R]: error ≤ (45s+5)R^{1/k}N^{−2s}L^{−2s}, sizes within
    the same budget as exp.  Realized as a graded-mesh interpolant: the
    first cell [0, (tol/2)^k] exploits concavity, the rest refine by |f''|."""
    if k < 1 or R <= 0.0:
        raise ValueError("need k >= 1 and R > 0")
    N, L, s = params.N, params.L, params.s
    claimed = (45.0 * s + 5.0) * R ** (1.0 / k) * float(N) ** (-2 * s) * float(L) ** (-2 * s)
    if k == 1:
        net = identity_net(1)
        cert = ErrorCertificate("root", f"k=1 R={R}", claimed, 0.0, 0, 0)
        return net, cert
    tol = claimed
    x1 = min((0.5 * tol) ** k, R)
    c2 = (1.0 / k) * (1.0 - 1.0 / k)
    if x1 >= R:
        nodes = np.array([0.0, R])
    else:
        tail = graded_mesh(lambda x: c2 * x ** (1.0 / k - 2.0), x1, R, 0.5 * tol)
        nodes = np.concatenate([[0.0], tail])
    net = pwl_interp_net(lambda x: x ** (1.0 / k), nodes)
    wmax, dmax = exp_budget(params)
    if net.width > wmax or net.depth > dmax:
        raise BudgetError("root: mesh exceeds the width budget")
    grid = np.concatenate([[0.0], np.geomspace(1e-12 * R, R, 4001)])[:, None]
    measured = measure_sup(net, lambda x: x ** (1.0 / k), grid)
    cert = ErrorCertificate(
        "root", f"k={k} R={R} N={N} L={L} s={s}", claimed, measured,
        net.width, net.depth, grid="4001 geometric + 0",
    )
    return net, cert


def build_reciprocal(eps: float, s: int = 1):
    """1/x on [ε, 1/ε] with the robust contract
    |φ(x′) − 1/x| ≤ ε + |x′−x|/ε² for all real x′.

    Graded-mesh interpolant, constant beyond the ends; width is recorded in
    a fitted certificate (the budget here is only up to constants).
    """
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1)")
    nodes = graded_mesh(lambda x: 2.0 / x ** 3, eps, 1.0 / eps, 0.9 * eps)
    net = pwl_interp_net(lambda x: 1.0 / x, nodes)
    grid = np.geomspace(eps, 1.0 / eps, 4001)[:, None]
    measured = measure_sup(net, lambda x: 1.0 / x, grid)
    cert = ErrorCertificate(
        "reciprocal", f"eps={eps}", eps, measured, net.width, net.depth,
        fitted=True, grid="4001 geometric",
    )
    return net, cert


# ── OU schedule maps ─────────────────────────────────────────────────────
def build_m_net(params: ApproxParams):
    """m_t = e^{−t} on [0, ∞): exp net on [0, s·log(1/ε)] behind a clamp;
    beyond the range the output is within ε^s + cert of 0."""
    s = params.s
    eps = params.eps_value
    R = max(s * math.log(1.0 / eps), 1.0)
    exp_net, exp_cert = build_exp(R, params)
    net = chain(clamp_above_net(R), exp_net)
    claimed = exp_cert.claimed + eps ** s
    grid = np.linspace(0.0, 2.0 * R, 4001)[:, None]
    measured = measure_sup(net, lambda t: np.exp(-t), grid)
    cert = ErrorCertificate(
        "m_net", f"N={params.N} L={params.L} s={s}", claimed, measured,
        net.width, net.depth, fitted=True, grid="4001 uniform on [0,2R]",
    )
    return net, cert


def build_sigma2_net(params: ApproxParams):
    """σ_t² = 1 − e^{−2t} on [0, ∞), via the exp net at argument 2t."""
    s = params.s
    eps = params.eps_value
    R = max(s * math.log(1.0 / eps), 1.0)
    exp_net, exp_cert = build_exp(R, params)
    inner = chain(from_affine(np.array([[2.0]])), clamp_above_net(R), exp_net)
    net = chain(inner, from_affine(np.array([[-1.0]]), np.array([1.0])))
    claimed = exp_cert.claimed + eps ** s
    grid = np.linspace(0.0, 2.0 * R, 4001)[:, None]
    measured = measure_sup(net, lambda t: -np.expm1(-2.0 * t), grid)
    cert = ErrorCertificate(
        "sigma2_net", f"N={params.N} L={params.L} s={s}", claimed, measured,
        net.width, net.depth, fitted=True, grid="4001 uniform on [0,2R]",
    )
    return net, cert


def build_inv_sigma2k_net(params: ApproxParams, t0: float, k: int = 1,
                          tol: float | None = None):
    """σ_t^{−2k} on [t₀, ∞): graded-mesh interpolant in t, constant ≈ 1
    beyond s·log(1/ε).  Tolerance defaults to ε^s·σ(t₀)^{−2k}."""
    if t0 <= 0.0:
        raise ValueError("t0 must be positive")
    s = params.s
    eps = params.eps_value
    if tol is None:
        tol = eps ** s * float(-np.expm1(-2.0 * t0)) ** (-k)

    def f(t):
        return (-np.expm1(-2.0 * np.asarray(t, dtype=float))) ** (-float(k))

    def d2f(t):
        w = -np.expm1(-2.0 * t)
        e = np.exp(-2.0 * t)
        return 4.0 * k * (k + 1) * w ** (-k - 2) * e * e + 4.0 * k * w ** (-k - 1) * e

    hi = max(s * math.log(1.0 / eps), t0 * 2.0, 2.0)
    nodes = graded_mesh(d2f, t0, hi, 0.5 * tol)
    net = pwl_interp_net(f, nodes)
    claimed = tol + abs(float(f(hi)) - 1.0)
    grid = np.geomspace(t0, 2.0 * hi, 4001)[:, None]
    measured = measure_sup(net, f, grid)
    cert = ErrorCertificate(
        "inv_sigma2k", f"k={k} t0={t0} N={params.N} L={params.L} s={s}",
        claimed, measured, net.width, net.depth, fitted=True,
        grid="4001 geometric",
    )
    return net, cert


def build_schedule_nets(params: ApproxParams, t0: float | None = None, k: int = 1):
    """(m-net, σ²-net, σ^{−2k}-net) with certificates, per the OU maps."""
    if t0 is None:
        t0 = params.eps_value
    m_net, m_cert = build_m_net(params)
    s2_net, s2_cert = build_sigma2_net(params)
    inv_net, inv_cert = build_inv_sigma2k_net(params, t0, k)
    return (m_net, s2_net, inv_net), (m_cert, s2_cert, inv_cert)
