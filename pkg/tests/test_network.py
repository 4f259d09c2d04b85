"""Exact network algebra: every combinator is checked by evaluation."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sgmkit.relunet import (
    Layer,
    ReluNetwork,
    chain,
    compose,
    constant_net,
    extend_depth,
    from_affine,
    identity_net,
    parallel,
    post_affine,
    pre_affine,
    scale_output,
    selector_net,
    sum_outputs,
)


def _random_net(rng, din, dout, hidden=5, depth=2):
    dims = [din] + [hidden] * depth + [dout]
    layers = [
        Layer(rng.standard_normal((o, i)), rng.standard_normal(o),
              "relu" if k < depth else "identity")
        for k, (i, o) in enumerate(zip(dims, dims[1:]))
    ]
    return ReluNetwork(tuple(layers))


RNG = np.random.default_rng(0)
X1 = RNG.standard_normal((17, 1))
X2 = RNG.standard_normal((17, 2))


def test_identity_and_constant():
    assert np.array_equal(identity_net(2)(X2), X2)
    c = constant_net([2.0, -1.0], 2)
    assert np.allclose(c(X2), np.tile([2.0, -1.0], (17, 1)))


def test_selector_and_affine():
    s = selector_net(2, [1, 0])
    assert np.array_equal(s(X2), X2[:, [1, 0]])
    A, b = np.array([[1.0, 2.0], [0.0, -1.0]]), np.array([0.5, 0.0])
    assert np.allclose(from_affine(A, b)(X2), X2 @ A.T + b)


def test_compose_is_function_composition():
    f = _random_net(RNG, 2, 3)
    g = _random_net(RNG, 1, 2)
    h = compose(f, g)
    assert np.allclose(h(X1), f(g(X1)), atol=1e-12)
    with pytest.raises(ValueError):
        compose(g, f)


def test_chain_flows_left_to_right():
    f = _random_net(RNG, 1, 2)
    g = _random_net(RNG, 2, 1)
    assert np.allclose(chain(f, g)(X1), g(f(X1)), atol=1e-12)


def test_parallel_stacks_outputs_exactly():
    f = _random_net(RNG, 2, 1, depth=1)
    g = _random_net(RNG, 2, 3, depth=3)  # mismatched depths get padded
    p = parallel(f, g)
    assert np.allclose(p(X2), np.hstack([f(X2), g(X2)]), atol=1e-12)


def test_extend_depth_preserves_function():
    f = _random_net(RNG, 1, 1, depth=1)
    deep = extend_depth(f, 6)
    assert deep.depth == 6
    assert np.allclose(deep(X1), f(X1), atol=1e-12)


def test_output_helpers():
    f = _random_net(RNG, 1, 2)
    assert np.allclose(scale_output(f, -0.5)(X1), -0.5 * f(X1))
    assert np.allclose(sum_outputs(f)(X1), f(X1).sum(axis=1, keepdims=True))
    A, b = np.array([[1.0, 1.0]]), np.array([2.0])
    assert np.allclose(post_affine(A, b, f)(X1), f(X1) @ A.T + b)
    assert np.allclose(pre_affine(f, np.array([[3.0]]), np.array([1.0]))(X1),
                       f(3.0 * X1 + 1.0))


def test_width_depth_params_counts():
    f = _random_net(RNG, 2, 1, hidden=7, depth=3)
    assert f.width == 7
    assert f.depth == 3
    assert f.n_params == sum(l.W.size + l.b.size for l in f.layers)


def test_json_roundtrip_is_exact():
    f = _random_net(RNG, 2, 2, hidden=4, depth=2)
    g = ReluNetwork.from_json(f.to_json())
    assert np.allclose(g(X2), f(X2), rtol=0, atol=0)
    for la, lb in zip(f.layers, g.layers):
        assert np.array_equal(la.W, lb.W) and np.array_equal(la.b, lb.b)


def test_save_load_roundtrip(tmp_path):
    f = _random_net(RNG, 1, 1)
    f.save(tmp_path / "net.json")
    g = ReluNetwork.load(tmp_path / "net.json")
    assert np.array_equal(g(X1), f(X1))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_compose_associative_by_evaluation(seed):
    rng = np.random.default_rng(seed)
    a = _random_net(rng, 1, 2, hidden=3, depth=1)
    b = _random_net(rng, 2, 2, hidden=3, depth=1)
    c = _random_net(rng, 2, 1, hidden=3, depth=1)
    x = rng.standard_normal((5, 1))
    assert np.allclose(chain(chain(a, b), c)(x), chain(a, chain(b, c))(x),
                       atol=1e-10)
