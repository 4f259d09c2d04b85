"""
kde_net.py
──────────
Constructive networks for the Gaussian KDE of diffused samples and for the
regularized empirical score, in one spatial dimension.

For observations x⁽¹⁾…x⁽ⁿ⁾ and exponents h_i(y,t) = (y − m_t x⁽ⁱ⁾)²/(2σ_t²)
the targets are the exponent averages

    f(y,t) = (1/n) Σ exp(−h_i),     g(y,t) = (1/n) Σ x⁽ⁱ⁾ exp(−h_i),

and the score  (m_t·g − y·f)·σ_t^{−2} / max(f, e⁻¹n⁻¹),  which coincides
with the softmax-rescaled regularized estimator.

Architecture (second-order Taylor about a cell value of the quadratic-mean
aggregate h̃ = ((1/n)Σh_i²)^{1/2}):

  1. sample moments M_j = (1/n)Σ(x⁽ⁱ⁾)^j reduce the h-averages to
     polynomials in y, m_t and (2σ_t²)^{−1} — no per-sample sub-networks;
  2. a square-root network recovers h̃ from (1/n)Σh_i², a step network
     picks its cell β of width Δ_h, a table network reads exp(−Δ_h β), and
     the affine Taylor factor 1 + Δ_h β − (1/n)Σh_i corrects in the cell;
  3. wiring is by pairwise sawtooth products whose tolerances are
     allocated so the construction slop is ∝ ε², matching the (2Δ_h)²/2
     cell remainder; the h̃ channel only needs accuracy Δ_h, with the
     (2σ²)^{−2} map held to a *relative* tolerance so its mesh stays small.

Certificates compare the network on a (y,t)-grid with the exact KDE/score
and with the architecture's mathematical ideal (the expansion evaluated in
exact arithmetic); the worst case of the ideal over cell mis-selections of
±1 plus the tolerance budget gives the claimed (fitted-constant) bound.
Only d = 1 and Taylor order s = 2 are implemented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..kde_score import KdeScoreEstimator
from ..schedule import DiffusionSchedule
from .analytic import _power_chain, graded_mesh, pwl_interp_net
from .blocks import _product_core, build_step, pwl_net
from .certificate import ApproxParams, BudgetError, ErrorCertificate
from .network import (
    Layer,
    ReluNetwork,
    chain,
    from_affine,
    identity_net,
    parallel,
    selector_net,
)

_GATE_SLOPE = 1e6


# ── named-channel pipeline over the exact combinators ────────────────────
class _Bus:
    def __init__(self, names: list[str]):
        self.names = list(names)
        self.net = identity_net(len(names))

    def idx(self, name: str) -> int:
        return self.names.index(name)

    def apply(self, sub: ReluNetwork, ins: list[str], outs: list[str],
              drop: tuple[str, ...] = ()):
        dim = len(self.names)
        branch = chain(selector_net(dim, [self.idx(n) for n in ins]), sub)
        keep = [n for n in self.names if n not in drop]
        if keep:
            block = parallel(selector_net(dim, [self.idx(n) for n in keep]), branch)
        else:
            block = branch
        self.net = chain(self.net, block)
        self.names = keep + list(outs)

    def products(self, specs, iv, drop: tuple[str, ...] = ()):
        """specs: (out, in1, in2, tol); builds the sawtooth products in
        parallel and updates the interval table."""
        dim = len(self.names)
        sub = parallel(*[
            chain(selector_net(dim, [self.idx(a), self.idx(b)]),
                  _prod_net(iv[a], iv[b], tol))
            for _, a, b, tol in specs
        ])
        self.apply(sub, list(self.names), [sp[0] for sp in specs], drop)
        for out, a, b, tol in specs:
            lo, hi = _iv_mul(iv[a], iv[b])
            iv[out] = (lo - tol, hi + tol)

    def affine(self, combos: list[tuple[dict, float]], outs: list[str],
               drop: tuple[str, ...] = ()):
        """New channels as linear combinations {name: coef} + const;
        costs no depth (adjacent affines merge)."""
        dim = len(self.names)
        A = np.zeros((len(combos), dim))
        b = np.zeros(len(combos))
        for r, (coefs, const) in enumerate(combos):
            for nm, c in coefs.items():
                A[r, self.idx(nm)] = c
            b[r] = const
        self.apply(from_affine(A, b), list(self.names), outs, drop)

    def finish(self, outs: list[str]) -> ReluNetwork:
        return chain(self.net, selector_net(len(self.names),
                                            [self.idx(n) for n in outs]))


# ── small helpers ────────────────────────────────────────────────────────
def _iv_mul(a, b):
    c = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    return (min(c), max(c))


def _combo_iv(coefs: dict, const: float, iv) -> tuple[float, float]:
    lo = hi = const
    for nm, c in coefs.items():
        l2, h2 = sorted((c * iv[nm][0], c * iv[nm][1]))
        lo, hi = lo + l2, hi + h2
    return (lo, hi)


def _prod_net(iv1, iv2, tol: float) -> ReluNetwork:
    a1, b1 = iv1[0] - 1e-12, iv1[1] + 1e-12
    a2, b2 = iv2[0] - 1e-12, iv2[1] + 1e-12
    d = 0.75 * (b1 - a1) * (b2 - a2)
    for M in (2, 4, 6, 8):
        for depth in range(1, 60):
            if d * M ** (-2 * depth) <= tol:
                net, _ = _product_core(a1, b1, a2, b2, M, depth)
                return net
    raise BudgetError(f"product tolerance {tol:g} unreachable on {iv1}×{iv2}")


def _guard(c: float) -> float:
    return max(abs(c), 1e-9)


# ── configuration ────────────────────────────────────────────────────────
@dataclass(frozen=True)
class KdeNetConfig:
    cell_scale: float = 1.0     # Δ_h = cell_scale · ε
    t_max: float | None = None
    y_grid: int = 161
    t_grid: int = 7
    param_cap: int = 10_000_000


# ── exact references (the oracle side of the certificates) ───────────────
def _h_stats(x, y, t):
    """Exact h_i-derived quantities on broadcast (y, t) arrays."""
    mt = np.exp(-np.asarray(t, dtype=float))
    s2 = -np.expm1(-2.0 * np.asarray(t, dtype=float))
    h = (np.asarray(y, dtype=float)[..., None] - mt[..., None] * x) ** 2 \
        / (2.0 * s2[..., None])
    htilde = np.sqrt(np.mean(h ** 2, axis=-1))
    S1 = np.mean(h, axis=-1)
    S1w = np.mean(x * h, axis=-1)
    e = np.exp(-np.minimum(h, 700.0))
    return htilde, S1, S1w, np.mean(e, axis=-1), np.mean(x * e, axis=-1)


def _ideal_fg(x, y, t, delta_h, K, offset):
    """The architecture's mathematical ideal with a forced cell offset."""
    htilde, S1, S1w, _, _ = _h_stats(x, y, t)
    beta = np.clip(np.floor(htilde / delta_h) + offset, 0, K - 1)
    hb = delta_h * beta
    xi = np.exp(-hb)
    M1 = float(np.mean(x))
    fi = np.clip(xi * (1.0 + hb - S1), 0.0, 1.0)
    gi = xi * (M1 * (1.0 + hb) - S1w)
    return fi, gi


# ── the combined builder ─────────────────────────────────────────────────
def _build_combined(samples, params: ApproxParams, schedule: DiffusionSchedule,
                    cfg: KdeNetConfig, want_score: bool):
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if schedule.d != 1 or samples.shape[1] != 1:
        raise NotImplementedError("constructive KDE networks support d = 1 only")
    if params.s != 2:
        raise NotImplementedError("constructive KDE networks need Taylor order s = 2")
    x = samples[:, 0]
    n = len(x)
    if n < 1:
        raise ValueError("empty sample set")
    eps = params.eps_value
    eps2 = eps * eps
    delta_h = cfg.cell_scale * eps

    # certification box: |y| ≤ B with the boundedness scale inflated if the
    # observations exceed it, t ∈ [t₀, t_max]
    alpha = schedule.alpha
    xb = float(np.max(np.abs(x)))
    if xb > math.sqrt(2.0 * alpha * 2 * math.log(1.0 / eps)):
        alpha = xb ** 2 / (4.0 * math.log(1.0 / eps)) * 1.0001
    By = 2.0 * math.sqrt(4.0 * alpha * math.log(1.0 / eps))
    t0 = schedule.t0
    t_max = cfg.t_max if cfg.t_max is not None else max(schedule.T, 2.0 * t0)
    M = np.array([np.mean(x ** j) for j in range(5)])

    s2 = lambda t: -np.expm1(-2.0 * np.asarray(t, dtype=float))
    inv1_min, inv1_max = float(1.0 / (2 * s2(t_max))), float(1.0 / (2 * s2(t0)))
    inv2_min, inv2_max = inv1_min ** 2, inv1_max ** 2
    invs_max = float(1.0 / s2(t0))

    # h̃ range over the box (with margin), hence the cell count
    yg = np.linspace(-By, By, 201)
    tg = np.geomspace(t0, t_max, 41)
    YY, TT = np.meshgrid(yg, tg, indexing="ij")
    H_max = float(_h_stats(x, YY, TT)[0].max()) * 1.05 + 3.0 * delta_h + 1.0
    K = max(2, int(math.ceil(H_max / delta_h)))

    # ── tolerance allocation ────────────────────────────────────────────
    # h̃ channel: total error ≤ Δ_h, so the step cell is off by at most one
    e_W = delta_h ** 2 / (8.0 * inv2_max)
    tol_A = delta_h ** 2 / 8.0
    e_inv2 = 0.25 * delta_h * inv2_min / max(H_max, 1.0)
    tol_y4 = e_W / 5.0
    tol_P31 = e_W / (15.0 * _guard(4 * M[1]))
    tol_y3 = tol_P31
    tol_P22 = e_W / (15.0 * _guard(6 * M[2]))
    tol_P13 = e_W / (15.0 * _guard(4 * M[3]))
    # f channel: construction slop ≤ ~3ε²/4 on top of the cell remainder
    e_inv1 = eps2 * inv1_min / 8.0
    e_V = eps2 / (8.0 * inv1_max)
    tol_y2 = min(e_V / 3.0, tol_P22 / max(1.0, inv2_max))
    tol_P11 = e_V / (6.0 * _guard(2 * M[1]))
    tol_VV = eps2 / 8.0
    tol_fg = eps2 / 8.0
    e_m1 = min(e_V / (6.0 * _guard(2 * M[1]) * By),
               e_W / (15.0 * _guard(4 * M[1]) * By ** 3))
    e_m2 = min(e_V / (3.0 * _guard(M[2])),
               e_W / (15.0 * _guard(6 * M[2]) * By ** 2))
    e_m3 = e_W / (10.0 * _guard(4 * M[3]) * By)
    e_m4 = e_W / (5.0 * _guard(M[4]))
    if want_score:
        e_Vw = eps2 / (8.0 * inv1_max)
        tol_y2 = min(tol_y2, e_Vw / (3.0 * _guard(M[1])))
        tol_P11 = min(tol_P11, e_Vw / (6.0 * _guard(2 * M[2])))
        e_m1 = min(e_m1, eps2 / (20.0 * max(1.0, xb)),
                   e_Vw / (6.0 * _guard(2 * M[2]) * By))
        e_m2 = min(e_m2, e_Vw / (3.0 * _guard(M[3])))

    bus = _Bus(["y", "t"])
    iv = {"y": (-By, By), "t": (t0, t_max)}

    # ── stage 1: maps of t, powers of y, the ball gate ──────────────────
    def t_map(fun, d2, tol):
        return pwl_interp_net(fun, graded_mesh(d2, t0, t_max * 1.0001, tol))

    def exp_kt(k):
        return (lambda t: np.exp(-k * np.asarray(t, dtype=float)),
                lambda t: k * k * np.exp(-k * t))

    def inv_2s2_pow(q):
        def d2(t):
            w, e = 2.0 * s2(t), np.exp(-2.0 * t)
            return q * (q + 1) * w ** (-q - 2) * 16 * e * e + q * w ** (-q - 1) * 8 * e
        return (lambda t: (2.0 * s2(t)) ** (-q), d2)

    specs = [("m1", *exp_kt(1), e_m1), ("m2", *exp_kt(2), e_m2),
             ("m3", *exp_kt(3), e_m3), ("m4", *exp_kt(4), e_m4),
             ("inv1", *inv_2s2_pow(1), e_inv1), ("inv2", *inv_2s2_pow(2), e_inv2)]
    if want_score:
        specs.append(("invs", lambda t: 1.0 / s2(t),
                      lambda t: 8 * s2(t) ** -3 * np.exp(-4 * t)
                      + 4 * s2(t) ** -2 * np.exp(-2 * t), eps2 / 8.0))
    t_branches, t_names = [], []
    for nm, fn, d2, tol in specs:
        t_branches.append(t_map(fn, d2, tol))
        t_names.append(nm)
        lo_v, hi_v = sorted((float(fn(t0)), float(fn(t_max))))
        iv[nm] = (lo_v - tol, hi_v + tol)

    y_specs = [("y2", 2, tol_y2), ("y3", 3, tol_y3), ("y4", 4, tol_y4)]
    y_branches = [_power_chain(p, -By, By, tol) for _, p, tol in y_specs]
    for nm, p, tol in y_specs:
        hi = By ** p + tol
        iv[nm] = (-tol if p % 2 == 0 else -hi, hi)
    gate = ReluNetwork((
        Layer(np.array([[1.0], [-1.0]]), np.array([-By, -By]), "relu"),
        Layer(np.array([[_GATE_SLOPE, _GATE_SLOPE]]), np.zeros(1), "identity"),
    ))
    y_branches.append(gate)
    y_names = [sp[0] for sp in y_specs] + ["gate"]
    iv["gate"] = (0.0, _GATE_SLOPE * 10 * By)

    stage1 = parallel(
        chain(selector_net(2, [0]), parallel(*y_branches)),
        chain(selector_net(2, [1]), parallel(*t_branches)),
    )
    bus.apply(stage1, ["y", "t"], y_names + t_names)

    # ── stage 2: cross products y^p·m^j, then the moment polynomials ────
    bus.products([("P11", "y", "m1", tol_P11), ("P31", "y3", "m1", tol_P31),
                  ("P22", "y2", "m2", tol_P22), ("P13", "y", "m3", tol_P13)],
                 iv, drop=("y3", "m3"))
    combos = [({"y2": 1.0, "P11": -2 * M[1], "m2": M[2]}, 0.0)]
    outs = ["V"]
    if want_score:
        combos.append(({"y2": M[1], "P11": -2 * M[2], "m2": M[3]}, 0.0))
        outs.append("Vw")
    combos.append(({"y4": 1.0, "P31": -4 * M[1], "P22": 6 * M[2],
                    "P13": -4 * M[3], "m4": M[4]}, 0.0))
    outs.append("W")
    dropped = ("y4", "P31", "P22", "P13", "m4", "y2", "m2", "P11")
    if not want_score:
        dropped = dropped + ("m1",)
    bus.affine(combos, outs, drop=dropped)
    for (coefs, const), nm in zip(combos, outs):
        iv[nm] = _combo_iv(coefs, const, iv)

    # ── stage 3: scale by (2σ²)^{−q}, recover h̃, pick its cell ─────────
    prods = [("VV", "inv1", "V", tol_VV)]
    if want_score:
        prods.append(("VVw", "inv1", "Vw", tol_VV))
    prods.append(("A", "inv2", "W", tol_A))
    bus.products(prods, iv,
                 drop=("V", "Vw", "W", "inv1", "inv2") if want_score
                 else ("V", "W", "inv1", "inv2"))

    A_hi = max(iv["A"][1], 1.0) + 1.0
    x1 = (0.25 * delta_h) ** 2  # first cell of the sqrt mesh, by concavity
    nodes = np.concatenate([[0.0], graded_mesh(
        lambda u: 0.25 * u ** -1.5, x1, A_hi, 0.125 * delta_h)])
    bus.apply(pwl_interp_net(np.sqrt, nodes), ["A"], ["htilde"], drop=("A",))

    H_cap = K * delta_h
    step_params = ApproxParams(max(params.N, 2) ** 2, max(params.L, 2) ** 2, 2)
    step = build_step(0.0, H_cap, K, delta_h / 4.0, step_params)
    bus.apply(step, ["htilde"], ["beta"], drop=("htilde",))
    iv["beta"] = (0.0, float(K - 1))

    table = pwl_net(np.arange(K, dtype=float), np.exp(-delta_h * np.arange(K)))
    bus.apply(table, ["beta"], ["xi"])
    iv["xi"] = (0.0, 1.0)

    # ── stage 4: Taylor factors and the exponential products ────────────
    combosU = [({"beta": delta_h, "VV": -1.0}, 1.0)]
    outsU = ["U"]
    if want_score:
        combosU.append(({"beta": delta_h * M[1], "VVw": -1.0}, M[1]))
        outsU.append("Uw")
    bus.affine(combosU, outsU,
               drop=("beta", "VV", "VVw") if want_score else ("beta", "VV"))
    for (coefs, const), nm in zip(combosU, outsU):
        iv[nm] = _combo_iv(coefs, const, iv)

    fprods = [("fraw", "xi", "U", tol_fg)]
    if want_score:
        fprods.append(("graw", "xi", "Uw", tol_fg))
    bus.products(fprods, iv, drop=("U", "Uw", "xi") if want_score else ("U", "xi"))

    # gate outside the ball, clamp into [0, 1]
    f_sub = ReluNetwork((
        Layer(np.array([[1.0, -1.0]]), np.zeros(1), "relu"),
        Layer(np.array([[-1.0]]), np.array([1.0]), "relu"),
        Layer(np.array([[-1.0]]), np.array([1.0]), "identity"),
    ))
    bus.apply(f_sub, ["fraw", "gate"], ["f"], drop=("fraw",))
    iv["f"] = (0.0, 1.0)

    slop_f = eps2 + 2.0 * delta_h ** 2  # covers the ≤ 3ε²/4 budget + gaps
    info = {
        "x": x, "n": n, "eps": eps, "By": By, "t0": t0, "t_max": t_max,
        "K": K, "delta_h": delta_h, "slop_f": slop_f, "cfg": cfg,
    }
    if not want_score:
        return bus.finish(["f"]), info

    # ── stage 5: the regularized score ──────────────────────────────────
    g_sub = ReluNetwork((
        Layer(np.array([[1.0, -1.0], [-1.0, -1.0]]), np.zeros(2), "relu"),
        Layer(np.array([[1.0, -1.0]]), np.zeros(1), "identity"),
    ))
    bus.apply(g_sub, ["graw", "gate"], ["g"], drop=("graw", "gate"))
    iv["g"] = iv["graw"]
    slop_g = eps2 * max(1.0, xb) + 2.0 * delta_h ** 2

    tol_t = eps2 / 8.0
    bus.products([("t1", "m1", "g", tol_t), ("t2", "y", "f", tol_t)],
                 iv, drop=("g", "m1"))
    bus.affine([({"t1": 1.0, "t2": -1.0}, 0.0)], ["num"], drop=("t1", "t2", "y"))
    iv["num"] = _combo_iv({"t1": 1.0, "t2": -1.0}, 0.0, iv)
    num_max = max(abs(iv["num"][0]), abs(iv["num"][1]))

    floor_c = math.exp(-1.0) / n
    mx = ReluNetwork((
        Layer(np.array([[1.0]]), np.array([-floor_c]), "relu"),
        Layer(np.array([[1.0]]), np.array([floor_c]), "identity"),
    ))
    bus.apply(mx, ["f"], ["den"], drop=("f",))
    tol_rec = eps2 / (8.0 * max(1.0, num_max * invs_max))
    rec_nodes = graded_mesh(lambda u: 2.0 / u ** 3, floor_c * 0.98, 1.5, tol_rec)
    bus.apply(pwl_interp_net(lambda u: 1.0 / u, rec_nodes), ["den"], ["r"],
              drop=("den",))
    iv["r"] = (1.0 / 1.5 - tol_rec, 1.0 / (floor_c * 0.98) + tol_rec)

    tol_p1 = eps2 / (8.0 * max(1.0, invs_max))
    bus.products([("p1", "num", "r", tol_p1)], iv, drop=("num", "r"))
    tol_p2 = eps2 / 8.0
    bus.products([("sraw", "p1", "invs", tol_p2)], iv, drop=("p1", "invs"))

    c_out = 2.5 * math.sqrt(math.log(max(n, 2)))
    bnd = t_map(lambda t: c_out / np.sqrt(s2(t)),
                lambda t: c_out * (3.0 * s2(t) ** -2.5 * np.exp(-4 * t)
                                   + 2.0 * s2(t) ** -1.5 * np.exp(-2 * t)),
                eps2 / 8.0)
    bus.apply(bnd, ["t"], ["bnd"], drop=("t",))
    clamp_hi = ReluNetwork((  # (s, b) ↦ min(s, b) = b − ReLU(b − s), b ≥ 0
        Layer(np.array([[-1.0, 1.0], [0.0, 1.0]]), np.zeros(2), "relu"),
        Layer(np.array([[-1.0, 1.0]]), np.zeros(1), "identity"),
    ))
    bus.apply(clamp_hi, ["sraw", "bnd"], ["sm"], drop=("sraw",))
    clamp_lo = ReluNetwork((  # (s, b) ↦ max(s, −b) = ReLU(s + b) − b
        Layer(np.array([[1.0, 1.0], [0.0, 1.0]]), np.zeros(2), "relu"),
        Layer(np.array([[1.0, -1.0]]), np.zeros(1), "identity"),
    ))
    bus.apply(clamp_lo, ["sm", "bnd"], ["score"], drop=("sm", "bnd"))

    # the f/g slop amplified through the quotient (|g| ≤ max|x|·f keeps the
    # 1/den² term proportional to f/den² ≤ 1/den at the floor)
    amp_f = invs_max * (2.0 * By + xb) / floor_c
    amp_g = invs_max / floor_c
    info["slop_score"] = (
        amp_f * slop_f + amp_g * slop_g + 2 * tol_t * invs_max / floor_c
        + tol_rec * num_max * invs_max + tol_p1 * invs_max + tol_p2 + eps2 / 4.0
    )
    info["c_out"] = c_out
    return bus.finish(["score"]), info


def _cert_grid(info):
    cfg = info["cfg"]
    yg = np.linspace(-info["By"], info["By"], cfg.y_grid)
    tg = np.geomspace(info["t0"], info["t_max"], cfg.t_grid)
    YY, TT = np.meshgrid(yg, tg, indexing="ij")
    return np.stack([YY.ravel(), TT.ravel()], axis=1), YY, TT


def build_kde_net(samples, params: ApproxParams, schedule: DiffusionSchedule,
                  config: KdeNetConfig | None = None):
    """Network approximation of the exponent-average KDE f(y,t), certified
    on a (y,t)-grid over |y| ≤ B, t ∈ [t₀, t_max]."""
    cfg = config or KdeNetConfig()
    net, info = _build_combined(samples, params, schedule, cfg, want_score=False)
    if net.n_params > cfg.param_cap:
        raise BudgetError(f"kde net: {net.n_params} parameters > cap {cfg.param_cap}")
    pts, YY, TT = _cert_grid(info)
    x = info["x"]
    f_exact = _h_stats(x, YY, TT)[3]
    measured = float(np.max(np.abs(net(pts).reshape(YY.shape) - f_exact)))
    ideal_worst = max(
        float(np.max(np.abs(_ideal_fg(x, YY, TT, info["delta_h"], info["K"], o)[0]
                            - f_exact)))
        for o in (-1, 0, 1)
    )
    cert = ErrorCertificate(
        "kde_net",
        f"n={info['n']} N={params.N} L={params.L} s=2 eps={info['eps']:g}",
        ideal_worst + info["slop_f"], measured, net.width, net.depth, fitted=True,
        grid=f"{cfg.y_grid}x{cfg.t_grid} |y|<={info['By']:.3g} "
             f"t in [{info['t0']:g},{info['t_max']:g}]",
    )
    return net, cert


def build_score_net(samples, params: ApproxParams, schedule: DiffusionSchedule,
                    config: KdeNetConfig | None = None):
    """Network approximation of the regularized empirical score, certified
    against the exact estimator; output clamped at ±2.5√(log n)/σ_t."""
    cfg = config or KdeNetConfig()
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n = samples.shape[0]
    eps = params.eps_value
    if eps > schedule.t0 * (1 + 1e-9) or eps > n ** -0.5 * (1 + 1e-9):
        raise ValueError("score net needs eps <= min(t0, n^{-1/2})")
    net, info = _build_combined(samples, params, schedule, cfg, want_score=True)
    if net.n_params > cfg.param_cap:
        raise BudgetError(f"score net: {net.n_params} parameters > cap {cfg.param_cap}")
    pts, YY, TT = _cert_grid(info)
    est = KdeScoreEstimator(samples, schedule)
    exact = np.stack([
        est.regularized_score(float(t), YY[:, j:j + 1])[:, 0]
        for j, t in enumerate(TT[0])
    ], axis=1)
    measured = float(np.max(np.abs(net(pts).reshape(YY.shape) - exact)))

    x = info["x"]
    s2v = -np.expm1(-2.0 * TT)
    mt = np.exp(-TT)
    floor_c = math.exp(-1.0) / n
    bndv = info["c_out"] / np.sqrt(s2v)
    ideal_worst = 0.0
    for o in (-1, 0, 1):
        fi, gi = _ideal_fg(x, YY, TT, info["delta_h"], info["K"], o)
        sc = np.clip((mt * gi - YY * fi) / s2v / np.maximum(fi, floor_c),
                     -bndv, bndv)
        ideal_worst = max(ideal_worst, float(np.max(np.abs(sc - exact))))
    cert = ErrorCertificate(
        "score_net",
        f"n={n} N={params.N} L={params.L} s=2 eps={eps:g}",
        ideal_worst + info["slop_score"], measured, net.width, net.depth,
        fitted=True,
        grid=f"{cfg.y_grid}x{cfg.t_grid} |y|<={info['By']:.3g} "
             f"t in [{info['t0']:g},{info['t_max']:g}]",
    )
    return net, cert
