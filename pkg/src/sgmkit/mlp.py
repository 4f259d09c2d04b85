"""
mlp.py
──────
A small trainable ReLU multilayer perceptron and the denoising
score-matching loop — the "learned score" arm at toy scale.

The net maps (y, t, σ_t, m_t) ∈ ℝ^{d+3} to a score value in ℝ^d, so the
schedule quantities the constructive approximations consume are available
as raw input features.  Its output is rescaled by min(1, c(t)/‖g‖) with
c(t) = c_clip·√(log n)/σ_t, keeping the field inside the bounded class the
estimator analysis works with; the rescale has a defined gradient
everywhere (zero in the saturated region for d = 1).

Training is plain gradient descent with optional momentum, single-threaded
and bit-deterministic given (config, seed, samples).  The ERM here is a
heuristic stand-in for an idealized minimizer; reports label it as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .relunet.network import Layer, ReluNetwork
from .schedule import DiffusionSchedule


@dataclass(frozen=True)
class TrainConfig:
    widths: tuple[int, ...] = (64, 64)
    step: float = 1e-3
    iters: int = 5000
    batch: int = 128
    seed: int = 0
    c_clip: float = 4.0
    momentum: float = 0.0

    def __post_init__(self):
        if self.step <= 0.0 or self.iters < 0 or self.batch < 1:
            raise ValueError("need positive step, nonnegative iters, batch >= 1")


class TrainableNet:
    """ReLU MLP (y, t, σ_t, m_t) ↦ φ(y,t) with per-parameter gradients."""

    def __init__(self, d: int, widths, clip_scale: float | None, rng):
        self.d = d
        dims = [d + 3, *widths, d]
        self.W = []
        self.b = []
        for fan_in, fan_out in zip(dims, dims[1:]):
            self.W.append(rng.standard_normal((fan_out, fan_in))
                          * math.sqrt(2.0 / fan_in))
            self.b.append(np.zeros(fan_out))
        self.clip_scale = clip_scale  # c_clip·√(log n), or None for no clip

    # ── forward ──────────────────────────────────────────────────────────
    @staticmethod
    def features(y, t, schedule: DiffusionSchedule) -> np.ndarray:
        y = np.atleast_2d(np.asarray(y, dtype=float))
        t = np.broadcast_to(np.asarray(t, dtype=float), (y.shape[0],))
        return np.concatenate(
            [y, t[:, None], schedule.sigma(t)[:, None], schedule.m(t)[:, None]],
            axis=1,
        )

    def _forward_raw(self, X):
        acts = [X]
        h = X
        for W, b in zip(self.W[:-1], self.b[:-1]):
            h = np.maximum(h @ W.T + b, 0.0)
            acts.append(h)
        g = h @ self.W[-1].T + self.b[-1]
        return g, acts

    def __call__(self, y, t, schedule: DiffusionSchedule) -> np.ndarray:
        X = self.features(y, t, schedule)
        g, _ = self._forward_raw(X)
        if self.clip_scale is None:
            return g
        sig = X[:, self.d + 1]
        cap = self.clip_scale / sig
        norm = np.linalg.norm(g, axis=1)
        scale = np.minimum(1.0, cap / np.maximum(norm, 1e-300))
        return g * scale[:, None]

    # ── loss and gradients ───────────────────────────────────────────────
    def loss_and_grads(self, x0, t, z, schedule: DiffusionSchedule):
        """Denoising score-matching loss over the batch and its exact
        parameter gradients; t drawn log-uniformly on [t₀, T] carries the
        importance weight t·log(T/t₀)."""
        x0 = np.atleast_2d(np.asarray(x0, dtype=float))
        if x0.shape[0] == 0:
            raise ValueError("empty batch")
        t = np.asarray(t, dtype=float)
        z = np.atleast_2d(np.asarray(z, dtype=float))
        B = x0.shape[0]
        m = schedule.m(t)[:, None]
        sig = schedule.sigma(t)[:, None]
        xt = m * x0 + sig * z
        X = self.features(xt, t, schedule)
        g, acts = self._forward_raw(X)

        if self.clip_scale is not None:
            cap = (self.clip_scale / sig[:, 0])[:, None]
            norm = np.linalg.norm(g, axis=1, keepdims=True)
            clipped = norm > cap
            scale = np.where(clipped, cap / np.maximum(norm, 1e-300), 1.0)
            phi = g * scale
        else:
            clipped = np.zeros((B, 1), dtype=bool)
            scale = np.ones((B, 1))
            phi = g

        w = (t * math.log(schedule.T / schedule.t0))[:, None]
        resid = phi + z / sig  # target conditional score is −z/σ_t
        loss = float(np.mean(w * np.sum(resid ** 2, axis=1, keepdims=True)))

        dphi = 2.0 * w * resid / B
        if self.clip_scale is not None:
            ghat = g / np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-300)
            proj = np.sum(dphi * ghat, axis=1, keepdims=True) * ghat
            dg = np.where(clipped, scale * (dphi - proj), dphi)
        else:
            dg = dphi

        gW = [None] * len(self.W)
        gb = [None] * len(self.b)
        delta = dg
        for li in range(len(self.W) - 1, -1, -1):
            gW[li] = delta.T @ acts[li]
            gb[li] = delta.sum(axis=0)
            if li > 0:
                delta = (delta @ self.W[li]) * (acts[li] > 0.0)
        return loss, gW, gb

    # ── interop ──────────────────────────────────────────────────────────
    def as_score_field(self, schedule: DiffusionSchedule):
        """(t, y-batch) -> score batch, the shared field contract."""
        return lambda t, y: self(y, t, schedule)

    def to_relunet(self) -> ReluNetwork:
        """The affine/ReLU stack on (y, t, σ_t, m_t); the output rescale is
        a post-composition and is not part of the serialized net."""
        layers = [Layer(W, b, "relu") for W, b in zip(self.W[:-1], self.b[:-1])]
        layers.append(Layer(self.W[-1], self.b[-1], "identity"))
        return ReluNetwork(tuple(layers))

    def copy_params(self):
        return [W.copy() for W in self.W], [b.copy() for b in self.b]

    def set_params(self, params):
        Ws, bs = params
        self.W = [W.copy() for W in Ws]
        self.b = [b.copy() for b in bs]


def dsm_loss(net: TrainableNet, x0, t, z, schedule: DiffusionSchedule) -> float:
    loss, _, _ = net.loss_and_grads(x0, t, z, schedule)
    return loss


def train_erm(samples, config: TrainConfig, schedule: DiffusionSchedule):
    """Gradient descent on the denoising score-matching objective; returns
    (net with the lowest-recorded-loss parameters, training curve array of
    (iteration, batch loss))."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n = samples.shape[0]
    if n < 2:
        raise ValueError("need at least 2 samples")
    rng = np.random.default_rng(config.seed)
    net = TrainableNet(schedule.d, config.widths,
                       config.c_clip * math.sqrt(math.log(n)), rng)
    vel_W = [np.zeros_like(W) for W in net.W]
    vel_b = [np.zeros_like(b) for b in net.b]
    best = (math.inf, net.copy_params())
    curve = np.empty((config.iters, 2))
    log_ratio = math.log(schedule.T / schedule.t0)
    for it in range(config.iters):
        idx = rng.integers(0, n, size=config.batch)
        u = rng.random(config.batch)
        t = schedule.t0 * np.exp(u * log_ratio)
        z = rng.standard_normal((config.batch, schedule.d))
        loss, gW, gb = net.loss_and_grads(samples[idx], t, z, schedule)
        if not math.isfinite(loss) or loss > 1e10:
            raise FloatingPointError(f"training diverged at step {it}: loss {loss}")
        curve[it] = (it, loss)
        if loss < best[0]:
            best = (loss, net.copy_params())
        for li in range(len(net.W)):
            vel_W[li] = config.momentum * vel_W[li] - config.step * gW[li]
            vel_b[li] = config.momentum * vel_b[li] - config.step * gb[li]
            net.W[li] = net.W[li] + vel_W[li]
            net.b[li] = net.b[li] + vel_b[li]
    if best[0] < math.inf:
        net.set_params(best[1])
    return net, curve
