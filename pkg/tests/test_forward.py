import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_head
from headcam.errors import ShapeError
from headcam.forward import forward_head, sigmoid
from headcam.types import Activation, DenseHead, DenseLayer


def test_sigmoid_zero():
    assert sigmoid(0.0) == 0.5


def test_sigmoid_saturation():
    assert abs(sigmoid(40.0) - 1.0) < 1e-15
    assert sigmoid(-40.0) < 1e-15


def test_sigmoid_ln3():
    # (1 + e^{-z})^{-1} = 3/4  <=>  z = ln 3
    assert sigmoid(np.log(3.0)) == pytest.approx(0.75, abs=1e-15)


def test_sigmoid_no_overflow():
    assert sigmoid(-1000.0) == 0.0
    assert sigmoid(1000.0) == 1.0


@given(st.floats(min_value=-50, max_value=50))
def test_sigmoid_symmetry(z):
    assert sigmoid(-z) == pytest.approx(1.0 - sigmoid(z), abs=1e-12)


def _identity_head(activation):
    return DenseHead(
        layers=(DenseLayer(weight=np.eye(2), bias=np.zeros(2)),),
        activation=activation,
    )


def test_forward_relu_identity_affine():
    trace = forward_head(_identity_head(Activation.RELU), [1.0, -1.0])
    np.testing.assert_array_equal(trace.pre_activation(1), [1, -1])
    np.testing.assert_array_equal(trace.post_activation(1), [1, 0])


def test_forward_sigmoid_zero_weights():
    head = DenseHead(
        layers=(DenseLayer(weight=np.zeros((3, 2)), bias=np.zeros(3)),),
        activation=Activation.SIGMOID,
    )
    trace = forward_head(head, [4.0, -7.0])
    np.testing.assert_array_equal(trace.post_activation(1), [0.5, 0.5, 0.5])


def test_forward_matches_naive_loop(rng):
    head = random_head(rng, [5, 4, 3, 2])
    x = rng.normal(size=5)
    trace = forward_head(head, x)

    q = x
    for layer in head.layers:
        delta = np.array([layer.weight[i] @ q + layer.bias[i] for i in range(layer.bias.size)])
        q = 1.0 / (1.0 + np.exp(-delta))
    np.testing.assert_allclose(trace.post_activation(3), q, rtol=1e-12)


def test_forward_depth_truncates(rng):
    head = random_head(rng, [4, 3, 2])
    x = rng.normal(size=4)
    assert forward_head(head, x, depth=1).depth == 1
    full = forward_head(head, x)
    partial = forward_head(head, x, depth=1)
    np.testing.assert_array_equal(full.post_activation(1), partial.post_activation(1))


def test_forward_shape_errors(rng):
    head = random_head(rng, [4, 3])
    with pytest.raises(ShapeError):
        forward_head(head, np.zeros(5))
    with pytest.raises(ShapeError):
        forward_head(head, np.zeros(4), depth=2)


def test_trace_consistency_exact(rng):
    head = random_head(rng, [6, 5, 4], activation=Activation.RELU)
    trace = forward_head(head, rng.normal(size=6))
    for layer in (1, 2):
        np.testing.assert_array_equal(
            trace.post_activation(layer), np.maximum(trace.pre_activation(layer), 0.0)
        )


def test_forward_deterministic(rng):
    head = random_head(rng, [6, 4])
    x = rng.normal(size=6)
    t1 = forward_head(head, x)
    t2 = forward_head(head, x)
    assert np.array_equal(t1.pre_activation(1), t2.pre_activation(1))
    assert np.array_equal(t1.post_activation(1), t2.post_activation(1))
