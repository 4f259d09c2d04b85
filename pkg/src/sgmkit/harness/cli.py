"""
cli.py
──────
Command-line harness: canned experiment suites over the library kernels.

Subcommands: rates, sample, build-net, verify-net, train, sweep-kl,
sweep-truncation, girsanov-check.  Every command reads one JSON config
(--config), resolves all defaults, echoes the resolved config next to its
outputs, and writes byte-stable CSVs.  Exit codes: 0 success, 2 config
error, 3 numeric failure, 4 certificate violation.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .. import metrics, mlp, sampler, targets
from ..kde_score import KdeScoreEstimator, default_quadrature, field_of
from ..relunet import (
    CERT_FIELDS,
    ApproxParams,
    BudgetError,
    CertificateError,
    ErrorCertificate,
    KdeNetConfig,
    ReluNetwork,
    build_exp,
    build_kde_net,
    build_monomial,
    build_point_fit,
    build_product,
    build_root,
    build_score_net,
    build_square,
    build_step,
)
from ..schedule import DiffusionSchedule
from .config import (
    ConfigError,
    echo_config,
    load_config,
    resolve,
    target_from,
    validate,
    write_csv,
)


def _sigma_to_t(sigma: float) -> float:
    """t with σ_t = sigma under the OU schedule."""
    if not 0.0 < sigma < 1.0:
        raise ConfigError("sigma must lie in (0, 1)")
    return -0.5 * math.log1p(-sigma * sigma)


def _seeds(cfg, offset: int) -> list:
    seeds = [int(s) + offset for s in cfg["seeds"]]
    if len(set(seeds)) != len(seeds):
        raise ConfigError("seeds must be distinct")
    return seeds


# ── rates ────────────────────────────────────────────────────────────────
def cmd_rates(cfg: dict, out: Path, args) -> int:
    cfg = resolve({
        "target": {"kind": "bimodal"}, "mode": "n-sweep", "estimator": "regularized",
        "n_list": [2 ** k for k in range(7, 14)], "sigma": 0.5, "t_list": None,
        "n": 4096, "t0_list": [0.2, 0.1, 0.05, 0.025], "T": 1.0, "t_points": 9,
        "seeds": list(range(20)),
    }, cfg)
    validate(cfg, [
        ("mode", cfg["mode"] in ("n-sweep", "t0-sweep"), "mode must be n-sweep or t0-sweep"),
        ("estimator", cfg["estimator"] in ("regularized", "truncated", "unregularized"),
         "estimator must be regularized/truncated/unregularized"),
        ("seeds", len(cfg["seeds"]) > 0, "seeds must be nonempty"),
        ("n_list", len(cfg["n_list"]) > 0, "n_list must be nonempty"),
        ("t0_list", len(cfg["t0_list"]) > 0, "t0_list must be nonempty"),
    ])
    target = target_from(cfg["target"])
    d = target.d
    seeds = _seeds(cfg, args.seed_offset)
    quad = default_quadrature(d)
    rows = []
    if cfg["mode"] == "n-sweep":
        ts = cfg["t_list"] or [_sigma_to_t(float(cfg["sigma"]))]
        sch = DiffusionSchedule(t0=min(ts) / 2.0, T=max(2.0 * max(ts), 1.0), d=d)
        for t in ts:
            per_n = []
            for n in cfg["n_list"]:
                vals = []
                for seed in seeds:
                    est = KdeScoreEstimator(targets.sample(target, int(n), seed), sch)
                    v = metrics.weighted_mse(
                        field_of(est, cfg["estimator"]), field_of(target, "true"),
                        float(t), target, quad, d)
                    v = v[0] if isinstance(v, tuple) else v
                    vals.append(v)
                    rows.append(["cell", n, float(t), seed, v])
                per_n.append(float(np.mean(vals)))
            if len(cfg["n_list"]) >= 3:
                fit = metrics.fit_rate(cfg["n_list"], per_n)
                rows.append(["summary", "", float(t), "", fit.slope])
    else:
        n = int(cfg["n"])
        for t0 in cfg["t0_list"]:
            sch = DiffusionSchedule(t0=float(t0), T=float(cfg["T"]), d=d)
            tg = np.geomspace(sch.t0, sch.T, int(cfg["t_points"]))
            vals = []
            for seed in seeds:
                est = KdeScoreEstimator(targets.sample(target, n, seed), sch)
                v = metrics.score_matching_loss(
                    field_of(est, cfg["estimator"]), field_of(target, "true"),
                    sch, target, tg, quad)
                vals.append(v)
                rows.append(["cell", n, float(t0), seed, v])
        per_t0 = [float(np.mean([r[4] for r in rows if r[0] == "cell" and r[2] == float(t0)]))
                  for t0 in cfg["t0_list"]]
        if len(cfg["t0_list"]) >= 3:
            fit = metrics.fit_rate(sorted(cfg["t0_list"]),
                                   [v for _, v in sorted(zip(cfg["t0_list"], per_t0))])
            rows.append(["summary", n, "", "", fit.slope])
    write_csv(out / "rates.csv", ["kind", "n", "t", "seed", "value"], rows)
    echo_config(out, "rates", cfg)
    return 0


# ── sample ───────────────────────────────────────────────────────────────
def _score_field(cfg, target, sch) -> sampler.ScoreField:
    kind = cfg["score"]
    if kind == "true":
        field = sampler.true_score_field(target)
    elif kind in ("kde-regularized", "kde-truncated"):
        data = targets.sample(target, int(cfg["n_data"]), int(cfg["seed"]) + 991)
        est = KdeScoreEstimator(data, sch)
        fn = est.regularized_score if kind == "kde-regularized" else est.truncated_score
        field = sampler.ScoreField(fn, tag=kind)
    else:
        raise ConfigError(f"unknown score kind {kind!r}")
    if cfg.get("bias"):
        field = sampler.perturb(field, cfg["bias"])
    return field


def cmd_sample(cfg: dict, out: Path, args) -> int:
    cfg = resolve({
        "target": "standard-normal", "score": "true", "n_paths": 10000,
        "steps": 400, "T": 8.0, "t0": 0.01, "seed": 0, "start": "gaussian",
        "bias": None, "n_data": 1024,
    }, cfg)
    target = target_from(cfg["target"])
    sch = DiffusionSchedule(t0=float(cfg["t0"]), T=float(cfg["T"]), d=target.d)
    field = _score_field(cfg, target, sch)
    spec = sampler.ReverseRunSpec(
        steps=int(cfg["steps"]), n_paths=int(cfg["n_paths"]),
        seed=int(cfg["seed"]) + args.seed_offset, start=cfg["start"],
        target=target if cfg["start"] == "exact-pt" else None)
    pts = sampler.reverse_sample(field, spec, sch)
    write_csv(out / "samples.csv", [f"y{i}" for i in range(target.d)],
              [[float(v) for v in row] for row in pts])
    echo_config(out, "sample", cfg)
    return 0


# ── build-net / verify-net ───────────────────────────────────────────────
def _load_samples(cfg, target):
    if cfg.get("samples_file"):
        return np.loadtxt(cfg["samples_file"], ndmin=2, delimiter=",")
    return targets.sample(target, int(cfg["n"]), int(cfg["seed"]))


def cmd_build_net(cfg: dict, out: Path, args) -> int:
    cfg = resolve({
        "builder": "square", "N": 4, "L": 3, "s": 1, "a": 0.0, "b": 1.0,
        "a2": 0.0, "b2": 1.0, "k": 2, "R": 4.0, "K": 8, "delta": 0.01,
        "values": None, "samples_file": None, "n": 16, "target": "standard-normal",
        "seed": 0, "t0": 0.25, "T": 2.0, "cell_scale": 1.0, "grid_points": 2001,
    }, cfg)
    params = ApproxParams(int(cfg["N"]), int(cfg["L"]), int(cfg["s"]))
    b = cfg["builder"]
    cert = None
    if b == "square":
        net, cert = build_square(float(cfg["a"]), float(cfg["b"]), params)
    elif b == "product":
        net, cert = build_product(float(cfg["a"]), float(cfg["b"]),
                                  float(cfg["a2"]), float(cfg["b2"]), params)
    elif b == "monomial":
        net, cert = build_monomial(int(cfg["k"]), float(cfg["R"]), params)
    elif b == "exp":
        net, cert = build_exp(float(cfg["R"]), params)
    elif b == "root":
        net, cert = build_root(int(cfg["k"]), float(cfg["R"]), params)
    elif b == "step":
        net = build_step(float(cfg["a"]), float(cfg["b"]), int(cfg["K"]),
                         float(cfg["delta"]), params)
        K, a, bb = int(cfg["K"]), float(cfg["a"]), float(cfg["b"])
        mids = a + ((bb - a) / K) * (np.arange(K) + 0.5)
        measured = float(np.max(np.abs(net(mids[:, None]).ravel() - np.arange(K))))
        cert = ErrorCertificate("step", f"K={K} N={params.N} L={params.L}",
                                1e-9, measured, net.width, net.depth,
                                grid=f"{K} cell midpoints")
    elif b == "point-fit":
        vals = np.asarray(cfg["values"], dtype=float)
        net = build_point_fit(vals, params)
        measured = float(np.max(np.abs(
            net(np.arange(len(vals), dtype=float)[:, None]).ravel() - vals)))
        cert = ErrorCertificate("point_fit", f"K={len(vals)} N={params.N} L={params.L}",
                                1e-9, measured, net.width, net.depth,
                                grid=f"{len(vals)} integers")
    elif b in ("kde", "score"):
        target = target_from(cfg["target"])
        samples = _load_samples(cfg, target)
        sch = DiffusionSchedule(t0=float(cfg["t0"]), T=float(cfg["T"]), d=samples.shape[1])
        knc = KdeNetConfig(cell_scale=float(cfg["cell_scale"]), param_cap=args.param_cap)
        build = build_kde_net if b == "kde" else build_score_net
        net, cert = build(samples, params, sch, knc)
    else:
        raise ConfigError(f"unknown builder {b!r}")
    if net.n_params > args.param_cap:
        raise BudgetError(f"{net.n_params} parameters exceed cap {args.param_cap}")
    net.save(out / "net.json")
    write_csv(out / "certificates.csv", CERT_FIELDS, [cert.csv_row()])
    echo_config(out, "build-net", cfg)
    return 0


_REFERENCES = {
    "square": lambda cfg: (lambda x: x ** 2),
    "exp": lambda cfg: (lambda x: np.exp(-x)),
    "root": lambda cfg: (lambda x: np.maximum(x, 0.0) ** (1.0 / int(cfg["k"]))),
    "reciprocal": lambda cfg: (lambda x: 1.0 / x),
}


def cmd_verify_net(cfg: dict, out: Path, args) -> int:
    cfg = resolve({
        "network_file": None, "reference": "square", "k": 2, "claimed": None,
        "lo": 0.0, "hi": 1.0, "points": 2001,
    }, cfg)
    validate(cfg, [
        ("network_file", bool(cfg["network_file"]), "network_file is required"),
        ("claimed", cfg["claimed"] is not None, "claimed bound is required"),
        ("reference", cfg["reference"] in _REFERENCES,
         f"reference must be one of {sorted(_REFERENCES)}"),
    ])
    net = ReluNetwork.load(cfg["network_file"])
    ref = _REFERENCES[cfg["reference"]](cfg)
    xs = np.linspace(float(cfg["lo"]), float(cfg["hi"]), int(cfg["points"]))
    measured = float(np.max(np.abs(net(xs[:, None]).ravel() - ref(xs))))
    cert = ErrorCertificate(f"verify:{cfg['reference']}",
                            f"grid [{cfg['lo']},{cfg['hi']}]x{cfg['points']}",
                            float(cfg["claimed"]), measured, net.width, net.depth)
    write_csv(out / "certificates.csv", CERT_FIELDS, [cert.csv_row()])
    echo_config(out, "verify-net", cfg)
    return 0


# ── train ────────────────────────────────────────────────────────────────
def cmd_train(cfg: dict, out: Path, args) -> int:
    cfg = resolve({
        "target": "standard-normal", "n": 512, "samples_file": None,
        "widths": [64, 64], "step": 1e-3, "iters": 5000, "batch": 128,
        "seed": 0, "c_clip": 4.0, "momentum": 0.0, "t0": 0.1, "T": 3.0,
    }, cfg)
    target = target_from(cfg["target"])
    samples = _load_samples(cfg, target)
    sch = DiffusionSchedule(t0=float(cfg["t0"]), T=float(cfg["T"]), d=samples.shape[1])
    tc = mlp.TrainConfig(widths=tuple(int(w) for w in cfg["widths"]),
                         step=float(cfg["step"]), iters=int(cfg["iters"]),
                         batch=int(cfg["batch"]), seed=int(cfg["seed"]) + args.seed_offset,
                         c_clip=float(cfg["c_clip"]), momentum=float(cfg["momentum"]))
    net, curve = mlp.train_erm(samples, tc, sch)
    net.to_relunet().save(out / "net.json")
    write_csv(out / "curve.csv", ["iteration", "loss"],
              [[int(i), float(l)] for i, l in curve])
    echo_config(out, "train", cfg)
    return 0


# ── sweep-kl / sweep-truncation / girsanov-check ─────────────────────────
def cmd_sweep_kl(cfg: dict, out: Path, args) -> int:
    cfg = resolve({
        "target": "standard-normal", "sigma": 0.5,
        "n_list": [2 ** k for k in range(7, 13)], "seeds": list(range(20)),
        "lo": -10.0, "hi": 10.0, "points": 4001,
    }, cfg)
    target = target_from(cfg["target"])
    seeds = _seeds(cfg, args.seed_offset)
    grid = np.linspace(float(cfg["lo"]), float(cfg["hi"]), int(cfg["points"]))
    rows, per_n = [], []
    for n in cfg["n_list"]:
        vals = [metrics.smoothed_empirical_kl(target, int(n), float(cfg["sigma"]),
                                              seed, grid) for seed in seeds]
        for seed, v in zip(seeds, vals):
            rows.append(["cell", n, seed, v])
        per_n.append(float(np.mean(vals)))
    if len(cfg["n_list"]) >= 3:
        fit = metrics.fit_rate(cfg["n_list"], per_n)
        rows.append(["summary", "", "", fit.slope])
    write_csv(out / "kl.csv", ["kind", "n", "seed", "value"], rows)
    echo_config(out, "sweep-kl", cfg)
    return 0


def cmd_sweep_truncation(cfg: dict, out: Path, args) -> int:
    cfg = resolve({
        "target": {"kind": "bimodal"}, "sigma_list": [0.4, 0.2, 0.1, 0.05],
        "lo": -8.0, "hi": 8.0, "points": 8001,
    }, cfg)
    target = target_from(cfg["target"])
    grid = np.linspace(float(cfg["lo"]), float(cfg["hi"]), int(cfg["points"]))
    dens = lambda x: target.density(x[:, None])
    rows = []
    vals = []
    for s in cfg["sigma_list"]:
        v = metrics.truncation_l1(dens, float(s), grid)
        vals.append(v)
        rows.append(["cell", float(s), v])
    if len(vals) >= 3:
        order = np.argsort(cfg["sigma_list"])
        fit = metrics.fit_rate([cfg["sigma_list"][i] for i in order],
                               [vals[i] for i in order])
        rows.append(["summary", "", fit.slope])
    write_csv(out / "truncation.csv", ["kind", "sigma", "value"], rows)
    echo_config(out, "sweep-truncation", cfg)
    return 0


def cmd_girsanov_check(cfg: dict, out: Path, args) -> int:
    cfg = resolve({
        "biases": [0.05, 0.1, 0.2], "T": 5.01, "t0": 0.01, "n_paths": 20000,
        "steps": 400, "seed": 0, "bins": 64, "lo": -5.0, "hi": 5.0,
        "margin": 0.03,
    }, cfg)
    target = targets.standard_normal(1)
    sch = DiffusionSchedule(t0=float(cfg["t0"]), T=float(cfg["T"]), d=1)
    seed = int(cfg["seed"]) + args.seed_offset
    ref = np.random.default_rng(seed + 1).standard_normal((int(cfg["n_paths"]), 1))
    rows = []
    for b in cfg["biases"]:
        field = sampler.perturb(sampler.true_score_field(target), [float(b)])
        spec = sampler.ReverseRunSpec(steps=int(cfg["steps"]),
                                      n_paths=int(cfg["n_paths"]), seed=seed)
        pts = sampler.reverse_sample(field, spec, sch)
        tv, se = metrics.tv_histogram(ref, pts, int(cfg["bins"]),
                                      (float(cfg["lo"]), float(cfg["hi"])))
        bound = math.sqrt(0.5 * b * b * (sch.T - sch.t0)) + float(cfg["margin"])
        rows.append([float(b), tv, se, bound, tv <= bound])
    write_csv(out / "girsanov.csv", ["bias", "tv", "se", "bound", "within"], rows)
    echo_config(out, "girsanov-check", cfg)
    return 0


# ── entry point ──────────────────────────────────────────────────────────
_COMMANDS = {
    "rates": cmd_rates,
    "sample": cmd_sample,
    "build-net": cmd_build_net,
    "verify-net": cmd_verify_net,
    "train": cmd_train,
    "sweep-kl": cmd_sweep_kl,
    "sweep-truncation": cmd_sweep_truncation,
    "girsanov-check": cmd_girsanov_check,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sgmkit",
        description="score-based generative modeling experiment harness")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON experiment config (defaults used if omitted)")
    parser.add_argument("--out", type=Path, default=Path("out"))
    parser.add_argument("--seed-offset", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1,
                        help="accepted for interface stability; execution is "
                             "sequential for reproducible logs")
    parser.add_argument("--param-cap", type=int, default=10_000_000)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else {}
        args.out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, args.out, args)
    except (ConfigError, BudgetError, ValueError) as e:
        if isinstance(e, CertificateError):
            print(f"certificate violation: {e}", file=sys.stderr)
            return 4
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except FloatingPointError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
