"""
network.py
──────────
Exact piecewise-affine ReLU networks: evaluation, width/depth accounting,
combinators, and serialization.

Convention: φ = A_L ∘ ReLU ∘ A_{L−1} ∘ … ∘ ReLU ∘ A_0, i.e. every layer but
the last applies ReLU.  depth = number of ReLU (hidden) layers, width = max
hidden layer size.  A depth-0 network is a plain affine map.

The combinators are exact piecewise-affine algebra: compose merges adjacent
affine maps, parallel block-stacks layers, and depth mismatches are padded
with the 2-neuron identity gadget x = ReLU(x) − ReLU(−x), which is exact on
all of R.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Layer:
    W: np.ndarray
    b: np.ndarray
    act: str  # "relu" or "identity"

    def __post_init__(self):
        W = np.atleast_2d(np.asarray(self.W, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if W.shape[0] != b.shape[0]:
            raise ValueError("bias length must equal weight rows")
        if self.act not in ("relu", "identity"):
            raise ValueError("activation must be 'relu' or 'identity'")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class ReluNetwork:
    layers: tuple[Layer, ...]

    def __post_init__(self):
        if not self.layers:
            raise ValueError("network needs at least one affine layer")
        layers = tuple(self.layers)
        for a, b in zip(layers, layers[1:]):
            if b.W.shape[1] != a.W.shape[0]:
                raise ValueError("adjacent layer dimensions do not chain")
        if layers[-1].act != "identity":
            raise ValueError("final layer must be affine (identity activation)")
        object.__setattr__(self, "layers", layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].W.shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].W.shape[0]

    @property
    def depth(self) -> int:
        return sum(1 for l in self.layers if l.act == "relu")

    @property
    def width(self) -> int:
        hidden = [l.W.shape[0] for l in self.layers if l.act == "relu"]
        return max(hidden) if hidden else 0

    @property
    def n_params(self) -> int:
        return sum(l.W.size + l.b.size for l in self.layers)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 1
        h = np.atleast_2d(x)
        if h.shape[1] != self.input_dim:
            raise ValueError(
                f"expected input dim {self.input_dim}, got {h.shape[1]}"
            )
        for l in self.layers:
            h = h @ l.W.T + l.b
            if l.act == "relu":
                np.maximum(h, 0.0, out=h)
        return h[0] if squeeze else h

    # ── serialization ────────────────────────────────────────────────────
    def to_json(self) -> str:
        obj = {
            "input_dim": self.input_dim,
            "output_dim": self.output_dim,
            "layers": [
                {
                    "rows": l.W.shape[0],
                    "cols": l.W.shape[1],
                    "weights": [repr(float(v)) for v in l.W.ravel()],
                    "bias": [repr(float(v)) for v in l.b],
                    "activation": l.act,
                }
                for l in self.layers
            ],
        }
        return json.dumps(obj, indent=1)

    @staticmethod
    def from_json(text: str) -> "ReluNetwork":
        obj = json.loads(text)
        layers = []
        for spec in obj["layers"]:
            W = np.array([float(v) for v in spec["weights"]]).reshape(
                spec["rows"], spec["cols"]
            )
            b = np.array([float(v) for v in spec["bias"]])
            layers.append(Layer(W, b, spec["activation"]))
        net = ReluNetwork(tuple(layers))
        if net.input_dim != obj["input_dim"] or net.output_dim != obj["output_dim"]:
            raise ValueError("declared dims disagree with layer shapes")
        return net

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @staticmethod
    def load(path) -> "ReluNetwork":
        with open(path, encoding="utf-8") as fh:
            return ReluNetwork.from_json(fh.read())


# ── constructors ─────────────────────────────────────────────────────────
def from_affine(A, b=None) -> ReluNetwork:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if b is None:
        b = np.zeros(A.shape[0])
    return ReluNetwork((Layer(A, b, "identity"),))


def identity_net(dim: int) -> ReluNetwork:
    return from_affine(np.eye(dim))


def constant_net(values, input_dim: int) -> ReluNetwork:
    v = np.asarray(values, dtype=float).reshape(-1)
    return from_affine(np.zeros((v.size, input_dim)), v)


def selector_net(input_dim: int, indices) -> ReluNetwork:
    A = np.zeros((len(indices), input_dim))
    for r, c in enumerate(indices):
        A[r, c] = 1.0
    return from_affine(A)


# ── combinators ──────────────────────────────────────────────────────────
def compose(f: ReluNetwork, g: ReluNetwork) -> ReluNetwork:
    """h with h(x) = f(g(x)) exactly; adjacent affine maps are merged."""
    if f.input_dim != g.output_dim:
        raise ValueError("compose: dimension mismatch")
    glast = g.layers[-1]
    ffirst = f.layers[0]
    merged = Layer(
        ffirst.W @ glast.W, ffirst.W @ glast.b + ffirst.b, ffirst.act
    )
    return ReluNetwork(g.layers[:-1] + (merged,) + f.layers[1:])


def chain(*nets: ReluNetwork) -> ReluNetwork:
    """compose(nets[-1], …, nets[0]): data flows left to right."""
    out = nets[0]
    for nxt in nets[1:]:
        out = compose(nxt, out)
    return out


def _append_identity_layer(net: ReluNetwork) -> ReluNetwork:
    W, b = net.layers[-1].W, net.layers[-1].b
    m = W.shape[0]
    hidden = Layer(np.vstack([W, -W]), np.concatenate([b, -b]), "relu")
    readout = Layer(
        np.hstack([np.eye(m), -np.eye(m)]), np.zeros(m), "identity"
    )
    return ReluNetwork(net.layers[:-1] + (hidden, readout))


def extend_depth(net: ReluNetwork, target_depth: int) -> ReluNetwork:
    """Pad with exact identity gadget layers until depth == target_depth."""
    while net.depth < target_depth:
        net = _append_identity_layer(net)
    if net.depth != target_depth:
        raise ValueError("cannot shrink depth")
    return net


def parallel(*nets: ReluNetwork) -> ReluNetwork:
    """Stack outputs of networks sharing one input vector.

    Shallower branches are padded with identity gadgets, so semantics are
    exact; widths add.
    """
    if len({n.input_dim for n in nets}) != 1:
        raise ValueError("parallel: branches must share input_dim")
    depth = max(n.depth for n in nets)
    nets = [extend_depth(n, depth) for n in nets]
    layers = []
    for i in range(depth + 1):
        rows = [n.layers[i] for n in nets]
        act = rows[0].act
        if i == 0:
            W = np.vstack([l.W for l in rows])
        else:
            W = _block_diag([l.W for l in rows])
        b = np.concatenate([l.b for l in rows])
        layers.append(Layer(W, b, act))
    return ReluNetwork(tuple(layers))


def _block_diag(mats) -> np.ndarray:
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols))
    r = c = 0
    for m_ in mats:
        out[r : r + m_.shape[0], c : c + m_.shape[1]] = m_
        r += m_.shape[0]
        c += m_.shape[1]
    return out


def pre_affine(net: ReluNetwork, A, b=None) -> ReluNetwork:
    """net(Ax + b)."""
    return compose(net, from_affine(A, b))


def post_affine(A, b, net: ReluNetwork) -> ReluNetwork:
    """A·net(x) + b."""
    return compose(from_affine(A, b), net)


def scale_output(net: ReluNetwork, c: float, shift: float = 0.0) -> ReluNetwork:
    m = net.output_dim
    return post_affine(c * np.eye(m), np.full(m, shift), net)


def sum_outputs(net: ReluNetwork, coeffs=None, const: float = 0.0) -> ReluNetwork:
    """Scalar linear readout Σ c_i out_i + const."""
    m = net.output_dim
    c = np.ones(m) if coeffs is None else np.asarray(coeffs, dtype=float)
    return post_affine(c.reshape(1, m), np.array([const]), net)
