"""
blocks.py
─────────
Elementary constructive builders: exact abs/max/mid gadgets, the sawtooth
square and product approximators, monomials/polynomials by product chains,
the exact-on-retained-intervals step network, and point fitting.

The square network refines the piecewise-linear interpolant of u² on [0,1]
in base M: with f_K the K-piece interpolant and χ_M the M-piece interpolant
of u(1−u),

    f_{KM}(u) = f_K(u) − K^{−2} χ_M(t_K(u)),

where t_K is the K-tooth sawtooth mapping each cell of f_K onto [0,1].  One
hidden layer realizes one refinement step from a shared ReLU basis
ReLU(t − j/M), so depth L yields interpolation error M^{−2L}/4.
"""

from __future__ import annotations

import math

import numpy as np

from .certificate import (
    ApproxParams,
    BudgetError,
    ErrorCertificate,
    check_budget,
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


# ── exact gadgets ────────────────────────────────────────────────────────
def build_abs() -> ReluNetwork:
    """|x| = ReLU(x) + ReLU(−x), exact."""
    return ReluNetwork(
        (
            Layer(np.array([[1.0], [-1.0]]), np.zeros(2), "relu"),
            Layer(np.array([[1.0, 1.0]]), np.zeros(1), "identity"),
        )
    )


def build_max() -> ReluNetwork:
    """max(x, y) = y + ReLU(x − y), exact; width 3, depth 1."""
    return ReluNetwork(
        (
            Layer(np.array([[1.0, -1.0], [0.0, 1.0], [0.0, -1.0]]), np.zeros(3), "relu"),
            Layer(np.array([[1.0, 1.0, -1.0]]), np.zeros(1), "identity"),
        )
    )


def build_mid() -> ReluNetwork:
    """Middle value of three inputs; exact, width 6 ≤ 14, depth 2.

    mid = s₁₂/2 − |max(x₁,x₂) − x₃|/2 + |min(x₁,x₂) − x₃|/2 with
    s₁₂ = x₁ + x₂, using max/min = (s₁₂ ± |x₁−x₂|)/2.
    """
    # layer 1 units: ±(x1−x2), ±s12, ±x3
    W1 = np.array(
        [
            [1.0, -1.0, 0.0],
            [-1.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
            [-1.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ]
    )
    # signals: a = |x1−x2| = u0+u1, s12 = u2−u3, x3 = u4−u5
    # layer 2 units: ±(M2−x3), ±(m2−x3), ±s12   with M2=(s12+a)/2, m2=(s12−a)/2
    half = 0.5
    M2 = np.array([half, half, half, -half, 0.0, 0.0])
    m2 = np.array([-half, -half, half, -half, 0.0, 0.0])
    x3 = np.array([0.0, 0.0, 0.0, 0.0, 1.0, -1.0])
    s12 = np.array([0.0, 0.0, 1.0, -1.0, 0.0, 0.0])
    W2 = np.vstack([M2 - x3, -(M2 - x3), m2 - x3, -(m2 - x3), s12, -s12])
    # readout: s12/2 − |M2−x3|/2 + |m2−x3|/2
    W3 = np.array([[-half, -half, half, half, half, -half]])
    return ReluNetwork(
        (
            Layer(W1, np.zeros(6), "relu"),
            Layer(W2, np.zeros(6), "relu"),
            Layer(W3, np.zeros(1), "identity"),
        )
    )


# ── piecewise-linear helpers ─────────────────────────────────────────────
def pwl_net(xs, ys, clamp_right: bool = True) -> ReluNetwork:
    """Depth-1 network through the nodes (xs, ys), constant left of xs[0];
    constant right of xs[-1] if clamp_right, else last slope continues."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.shape != ys.shape or len(xs) < 2:
        raise ValueError("need matching 1-D nodes, at least two")
    if np.any(np.diff(xs) <= 0.0):
        raise ValueError("nodes must be strictly increasing")
    slopes = np.diff(ys) / np.diff(xs)
    breaks = xs[:-1] if not clamp_right else xs
    coeffs = np.empty(len(breaks))
    coeffs[0] = slopes[0]
    coeffs[1 : len(slopes)] = np.diff(slopes)
    if clamp_right:
        coeffs[-1] = -slopes[-1]
    W1 = np.ones((len(breaks), 1))
    return ReluNetwork(
        (
            Layer(W1, -breaks, "relu"),
            Layer(coeffs.reshape(1, -1), np.array([ys[0]]), "identity"),
        )
    )


def _tooth_count(N: int) -> int:
    """Sawtooth size M = 2·ceil(√N/2) (even, M² ≥ N)."""
    return 2 * max(1, math.ceil(math.sqrt(N) / 2.0))


def _sq_layer_coeffs(M: int):
    """Shared-basis coefficients of the M-tooth sawtooth g and of χ_M."""
    j = np.arange(M + 1) / M
    g_vals = (np.arange(M + 1) % 2).astype(float)  # 0,1,0,1,…
    chi_vals = j * (1.0 - j)
    def coeffs(vals):
        slopes = np.diff(vals) * M
        c = np.empty(M)
        c[0] = slopes[0]
        c[1:] = np.diff(slopes)
        return c
    return coeffs(g_vals), coeffs(chi_vals)


def _square_core(a: float, b: float, M: int, depth: int) -> ReluNetwork:
    """x² approximation on [a,b]: interpolation error (b−a)²·M^{−2·depth}/4."""
    width_span = b - a
    beta = b * b - a * a
    net = from_affine(
        np.array([[1.0 / width_span], [beta / width_span]]),
        np.array([-a / width_span, -a * beta / width_span]),
    )  # x -> [u, A0 = β·u]
    g_c, chi_c = _sq_layer_coeffs(M)
    breaks = np.arange(M) / M
    for s in range(1, depth + 1):
        # hidden: r_j = ReLU(t − j/M), aP = ReLU(A), aN = ReLU(−A)
        Wh = np.zeros((M + 2, 2))
        Wh[:M, 0] = 1.0
        Wh[M, 1] = 1.0
        Wh[M + 1, 1] = -1.0
        bh = np.concatenate([-breaks, [0.0, 0.0]])
        scale = width_span ** 2 * M ** (-2 * (s - 1))
        Wo = np.zeros((2, M + 2))
        Wo[0, :M] = g_c
        Wo[1, :M] = -scale * chi_c
        Wo[1, M] = 1.0
        Wo[1, M + 1] = -1.0
        net = chain(net, ReluNetwork((Layer(Wh, bh, "relu"), Layer(Wo, np.zeros(2), "identity"))))
    return chain(net, from_affine(np.array([[0.0, 1.0]]), np.array([a * a])))


def build_square(a: float, b: float, params: ApproxParams):
    """x² on [a,b]: width ≤ 3N+1, depth ≤ L, error ≤ (b−a)²N^{−L}."""
    if a >= b:
        raise ValueError("need a < b")
    N, L = params.N, params.L
    M = _tooth_count(N)
    net = _square_core(a, b, M, L)
    check_budget("square", net, 3 * N + 1, L)
    claimed = (b - a) ** 2 * float(N) ** -L
    grid = np.linspace(a, b, 10_001)[:, None]
    measured = measure_sup(net, lambda y: y * y, grid)
    cert = ErrorCertificate(
        "square", f"[{a},{b}] N={N} L={L}", claimed, measured,
        net.width, net.depth, grid="10001 uniform",
    )
    return net, cert


def _product_core(a1, b1, a2, b2, M: int, depth: int) -> tuple[ReluNetwork, float]:
    """xy on [a1,b1]×[a2,b2] via polarization over three unit-square chains;
    returns (net, error bound (3/4)Δ₁Δ₂M^{−2·depth})."""
    d1, d2 = b1 - a1, b2 - a2
    # signals: [t_w, A_w, t_u, A_u, t_v, A_v, λ]
    # u=(x−a1)/Δ1, v=(y−a2)/Δ2, w=(u+v)/2, λ = a2·x + a1·y − 2a1a2
    A_in = np.array(
        [
            [0.5 / d1, 0.5 / d2],
            [0.5 / d1, 0.5 / d2],
            [1.0 / d1, 0.0],
            [1.0 / d1, 0.0],
            [0.0, 1.0 / d2],
            [0.0, 1.0 / d2],
            [a2, a1],
        ]
    )
    b_in = np.array(
        [
            -0.5 * (a1 / d1 + a2 / d2),
            -0.5 * (a1 / d1 + a2 / d2),
            -a1 / d1,
            -a1 / d1,
            -a2 / d2,
            -a2 / d2,
            -2.0 * a1 * a2,
        ]
    )
    net = from_affine(A_in, b_in)
    g_c, chi_c = _sq_layer_coeffs(M)
    breaks = np.arange(M) / M
    nsig = 7
    for s in range(1, depth + 1):
        rows = []
        bias = []
        for c in range(3):  # chains w, u, v
            for j in range(M):
                r = np.zeros(nsig)
                r[2 * c] = 1.0
                rows.append(r)
                bias.append(-breaks[j])
            r = np.zeros(nsig)
            r[2 * c + 1] = 1.0  # ReLU(A_c); A_c = partial interpolant ≥ 0
            rows.append(r)
            bias.append(0.0)
        for sign in (1.0, -1.0):
            r = np.zeros(nsig)
            r[6] = sign
            rows.append(r)
            bias.append(0.0)
        Wh = np.vstack(rows)
        bh = np.array(bias)
        nun = Wh.shape[0]  # 3(M+1) + 2
        scale = M ** (-2 * (s - 1))
        Wo = np.zeros((nsig, nun))
        for c in range(3):
            base = c * (M + 1)
            Wo[2 * c, base : base + M] = g_c
            Wo[2 * c + 1, base : base + M] = -scale * chi_c
            Wo[2 * c + 1, base + M] = 1.0
        Wo[6, nun - 2] = 1.0
        Wo[6, nun - 1] = -1.0
        net = chain(net, ReluNetwork((Layer(Wh, bh, "relu"), Layer(Wo, np.zeros(nsig), "identity"))))
    # out = Δ1Δ2(2A_w − A_u/2 − A_v/2) + λ + a1a2
    A_out = np.zeros((1, nsig))
    A_out[0, 1] = 2.0 * d1 * d2
    A_out[0, 3] = -0.5 * d1 * d2
    A_out[0, 5] = -0.5 * d1 * d2
    A_out[0, 6] = 1.0
    net = chain(net, from_affine(A_out, np.array([a1 * a2])))
    return net, 0.75 * d1 * d2 * M ** (-2 * depth)


def _product_affine(a1, b1, a2, b2) -> tuple[ReluNetwork, float]:
    """Tangent plane of xy at the box center (fallback for N=1).

    xy − (yc·x + xc·y − xc·yc) = (x−xc)(y−yc), so the error is ±Δ₁Δ₂/4.
    """
    d1, d2 = b1 - a1, b2 - a2
    xc, yc = 0.5 * (a1 + b1), 0.5 * (a2 + b2)
    net = from_affine(np.array([[yc, xc]]), np.array([-xc * yc]))
    return net, d1 * d2 / 4.0


def build_product(a1, b1, a2, b2, params: ApproxParams):
    """xy on [a1,b1]×[a2,b2]: width ≤ 9N+1, depth ≤ L, error ≤ 6Δ₁Δ₂N^{−L}."""
    if a1 >= b1 or a2 >= b2:
        raise ValueError("need a1 < b1 and a2 < b2")
    N, L = params.N, params.L
    M = _tooth_count(N)
    if 3 * M + 5 <= 9 * N + 1:
        net, bound = _product_core(a1, b1, a2, b2, M, L)
        bound = min(bound, 6 * (b1 - a1) * (b2 - a2) * float(N) ** -L)
    else:  # N = 1: the affine surrogate already meets the 6Δ₁Δ₂ bound
        net, bound = _product_affine(a1, b1, a2, b2)
    check_budget("product", net, 9 * N + 1, L)
    claimed = 6.0 * (b1 - a1) * (b2 - a2) * float(N) ** -L
    if bound > claimed:
        raise BudgetError("product: internal bound exceeds lemma bound")
    g1 = np.linspace(a1, b1, 201)
    g2 = np.linspace(a2, b2, 201)
    pts = np.stack([g.ravel() for g in np.meshgrid(g1, g2)], axis=1)
    measured = measure_sup(net, lambda p: p[:, 0] * p[:, 1], pts)
    cert = ErrorCertificate(
        "product", f"[{a1},{b1}]x[{a2},{b2}] N={N} L={L}", claimed, measured,
        net.width, net.depth, grid="201x201 uniform",
    )
    return net, cert


def product_to_tolerance(a1, b1, a2, b2, tol: float) -> ReluNetwork:
    """Internal: smallest sawtooth product net with error bound ≤ tol."""
    d1d2 = (b1 - a1) * (b2 - a2)
    for M in (2, 4, 6, 8):
        for depth in range(1, 40):
            if 0.75 * d1d2 * M ** (-2 * depth) <= tol:
                net, bound = _product_core(a1, b1, a2, b2, M, depth)
                assert bound <= tol
                return net
    raise BudgetError(f"product tolerance {tol:g} unreachable")


# ── monomials and polynomials ────────────────────────────────────────────
def _monomial_net(k: int, R: float, M: int, stage_depth: int):
    """x₁·…·x_k on [−R,R]^k by a product chain; returns (net, error bound)."""
    if k == 1:
        return identity_net(1), 0.0
    err = 0.0
    net = identity_net(k)  # signals [P_1 = x_1, x_2, …, x_k]
    for j in range(1, k):
        rj = R ** j + err  # running range of the accumulated product
        stage, stage_err = _product_core(-rj, rj, -R, R, M, stage_depth)
        net = chain(net, _stack_first_two(stage, k - j - 1))
        err = stage_err + R * err
    return net, err


def _stack_first_two(stage: ReluNetwork, carry: int) -> ReluNetwork:
    """Apply `stage` to inputs 0,1 and pass inputs 2..2+carry−1 through."""
    if carry == 0:
        return stage
    dim = 2 + carry
    head = chain(selector_net(dim, [0, 1]), stage)
    tail = selector_net(dim, range(2, dim))
    return parallel(head, tail)


def build_monomial(k: int, R: float, params: ApproxParams):
    """x₁·…·x_k on [−R,R]^k: width ≤ 9(N+1)+k−1, depth ≤ 7sL(k−1),
    error ≤ 30(k−1)R^k(N+1)^{−7sL} (needs s ≥ k for k ≥ 2)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if R <= 0.0:
        raise ValueError("R must be positive")
    N, L, s = params.N, params.L, params.s
    if k >= 2 and s < k:
        raise ValueError("monomial lemma needs s >= k")
    claimed = 30.0 * (k - 1) * R ** k * float(N + 1) ** (-7 * s * L)
    if k == 1:
        net = identity_net(1)
        cert = ErrorCertificate("monomial", f"k=1 R={R}", 0.0, 0.0, 0, 0)
        return net, cert
    M = _tooth_count(N + 1)
    stage_depth = 7 * s * L
    net, bound = _monomial_net(k, R, M, stage_depth)
    if bound > claimed:
        raise BudgetError("monomial: propagated bound exceeds lemma bound")
    check_budget("monomial", net, 9 * (N + 1) + k - 1, 7 * s * L * (k - 1))
    rng = np.random.default_rng(0)
    pts = rng.uniform(-R, R, size=(4000, k))
    corners = np.array(np.meshgrid(*([[-R, R]] * k))).reshape(k, -1).T
    pts = np.vstack([pts, corners])
    measured = measure_sup(net, lambda p: np.prod(p, axis=1), pts)
    cert = ErrorCertificate(
        "monomial", f"k={k} R={R} N={N} L={L} s={s}", claimed, measured,
        net.width, net.depth, grid="4000 random + corners",
    )
    return net, cert


def build_polynomial(nu, R: float, params: ApproxParams):
    """y^ν on [−R,R]^d for a multi-index ν: duplication affine + monomial."""
    nu = np.asarray(nu, dtype=int)
    if np.any(nu < 0):
        raise ValueError("multi-index entries must be nonnegative")
    d = len(nu)
    k = int(nu.sum())
    if k == 0:
        net = from_affine(np.zeros((1, d)), np.array([1.0]))
        return net, ErrorCertificate("polynomial", f"nu={tuple(nu)}", 0.0, 0.0, 0, 0)
    if k == 1:
        net = selector_net(d, [int(np.argmax(nu > 0))])
        return net, ErrorCertificate("polynomial", f"nu={tuple(nu)}", 0.0, 0.0, 0, 0)
    dup = np.zeros((k, d))
    r = 0
    for i, p in enumerate(nu):
        for _ in range(int(p)):
            dup[r, i] = 1.0
            r += 1
    mono, mcert = build_monomial(k, R, params)
    net = chain(from_affine(dup), mono)
    claimed = 30.0 * k * R ** k * float(params.N + 1) ** (-7 * params.s * params.L)
    rng = np.random.default_rng(1)
    pts = rng.uniform(-R, R, size=(4000, d))
    measured = measure_sup(net, lambda p: np.prod(p ** nu, axis=1), pts)
    cert = ErrorCertificate(
        "polynomial", f"nu={tuple(nu)} R={R} N={params.N} L={params.L} s={params.s}",
        claimed, measured, net.width, net.depth, grid="4000 random",
    )
    return net, cert


# ── step function and point fitting ──────────────────────────────────────
def _int_root(N: int, d: int) -> int:
    r = int(round(N ** (1.0 / d)))
    while r ** d > N:
        r -= 1
    while (r + 1) ** d <= N:
        r += 1
    return max(1, r)


def step_capacity(params: ApproxParams, d: int = 1) -> int:
    """The piece count K = ⌊N^{1/d}⌋²·⌊L^{2/d}⌋ the budget is stated for."""
    return _int_root(params.N, d) ** 2 * int(math.floor(params.L ** (2.0 / d)))


def build_step(a: float, b: float, K: int, delta: float, params: ApproxParams,
               d: int = 1) -> ReluNetwork:
    """K-piece step on [a,b]: output k exactly on the k-th retained interval
    [a+k·w, a+(k+1)·w − δ·1{k≤K−2}], w=(b−a)/K; ramps inside δ-gaps.

    Width ≤ 4⌊N^{1/d}⌋+3, depth ≤ 4L+5; raises BudgetError if K needs more
    levels than the depth budget allows.
    """
    if a >= b or K < 1:
        raise ValueError("need a < b and K >= 1")
    if not (0.0 < delta <= (b - a) / (3.0 * K)):
        raise ValueError("delta must lie in (0, (b−a)/(3K)]")
    n_star = _int_root(params.N, d)
    J = 2 * n_star + 1  # per-level radix: width 2(J−1)+2 ≤ 4·n*+3
    levels = max(1, math.ceil(math.log(K) / math.log(J))) if K > 1 else 1
    while J ** levels < K:  # guard rounding
        levels += 1
    if levels + 1 > 4 * params.L + 5:
        raise BudgetError("step: K too large for the depth budget")
    scale = K / (b - a)  # to cell units z ∈ [0, K]
    dz = delta * scale
    # signals: [r, acc]
    net = from_affine(np.array([[scale], [0.0]]), np.array([-a * scale, 0.0]))
    for lvl in range(levels):
        B = J ** (levels - 1 - lvl)
        rows, bias = [], []
        for i in range(1, J):
            rows.append([1.0, 0.0]); bias.append(-(i * B - dz))
            rows.append([1.0, 0.0]); bias.append(-(i * B))
        rows.append([1.0, 0.0]); bias.append(0.0)   # carry r
        rows.append([0.0, 1.0]); bias.append(0.0)   # carry acc ≥ 0
        Wh = np.array(rows)
        bh = np.array(bias)
        nun = Wh.shape[0]
        digit = np.zeros(nun)
        digit[0 : 2 * (J - 1) : 2] = 1.0 / dz
        digit[1 : 2 * (J - 1) : 2] = -1.0 / dz
        Wo = np.zeros((2, nun))
        Wo[0, nun - 2] = 1.0          # r stays; digit subtracted below
        Wo[0, :] -= B * digit
        Wo[1, nun - 1] = 1.0
        Wo[1, :] += B * digit
        net = chain(net, ReluNetwork((Layer(Wh, bh, "relu"), Layer(Wo, np.zeros(2), "identity"))))
    # clamp: out = (K−1) − ReLU(K−1 − acc)
    clamp = ReluNetwork(
        (
            Layer(np.array([[0.0, -1.0]]), np.array([K - 1.0]), "relu"),
            Layer(np.array([[-1.0]]), np.array([K - 1.0]), "identity"),
        )
    )
    net = chain(net, clamp)
    check_budget("step", net, 4 * n_star + 3, 4 * params.L + 5)
    return net


def build_point_fit(values, params: ApproxParams) -> ReluNetwork:
    """Interpolate values ξ_0..ξ_{K−1} ⊂ [0,1] at the integers, exactly,
    with constant extrapolation (so the output stays in [0,1] everywhere).

    Budget: width ≤ 16s(N+1)log₂(8N), depth ≤ 5(L+2)log₂(4L); K ≤ N²L².
    Raises BudgetError when the clamped-interpolant width K does not fit.
    """
    vals = np.asarray(values, dtype=float).reshape(-1)
    if np.any(vals < 0.0) or np.any(vals > 1.0):
        raise ValueError("point-fit values must lie in [0,1]")
    K = len(vals)
    N, L, s = params.N, params.L, params.s
    if K > N * N * L * L:
        raise BudgetError("point-fit: more values than K = N²L²")
    if K == 1:
        net = from_affine(np.zeros((1, 1)), np.array([vals[0]]))
        return net
    net = pwl_net(np.arange(K, dtype=float), vals, clamp_right=True)
    max_width = int(16 * s * (N + 1) * math.log2(8 * N))
    max_depth = int(5 * (L + 2) * math.log2(4 * L))
    check_budget("point_fit", net, max_width, max(1, max_depth))
    return net
