import numpy as np
import pytest

from conftest import random_head, random_stack
from headcam.errors import LayerPositionError, ShapeError
from headcam.forward import forward_head
from headcam.jacobian import (
    activation_jacobian,
    build_bundle,
    chain_class,
    chain_pca,
    chain_svm,
    dense_jacobian,
    flatten_jacobian,
    pca_jacobian,
)
from headcam.oracle import FDConfig, compare, fd_jacobian
from headcam.pca import fit, project
from headcam.svm import SVMModel, decision, linear_kernel, rbf_kernel
from headcam.types import Activation, DenseHead, DenseLayer, FeatureStack, concat_features


def fitted_projector(rng, d, b):
    obs = rng.normal(size=(d + 6, d))
    return fit(obs, b)


def rbf_model(rng, b, i=3, gamma=0.9):
    return SVMModel(
        support_vectors=rng.normal(size=(i, b)),
        duals=rng.uniform(0.1, 1.0, size=i),
        labels=rng.choice([-1.0, 1.0], size=i),
        bias=float(rng.normal()),
        kernel=rbf_kernel(gamma),
    )


def test_activation_jacobian_sigmoid_zero():
    np.testing.assert_allclose(activation_jacobian(Activation.SIGMOID, [0.0]), [[0.25]])


def test_activation_jacobian_relu_strict_positive():
    # derivative is 1 only for strictly positive pre-activation, 0 at exactly 0
    np.testing.assert_array_equal(
        activation_jacobian(Activation.RELU, [1.0, -1.0, 0.0]), np.diag([1.0, 0.0, 0.0])
    )


def test_activation_jacobian_sigmoid_saturated():
    assert activation_jacobian(Activation.SIGMOID, [40.0])[0, 0] < 1e-15


def test_dense_jacobian_identity_relu(rng):
    head = DenseHead(
        layers=(
            DenseLayer(weight=np.eye(3), bias=np.ones(3)),
            DenseLayer(weight=np.eye(3), bias=np.zeros(3)),
        ),
        activation=Activation.RELU,
    )
    trace = forward_head(head, np.array([1.0, 2.0, 3.0]))
    np.testing.assert_array_equal(dense_jacobian(head, trace, 2), np.eye(3))


def test_dense_jacobian_dead_units():
    head = DenseHead(
        layers=(
            DenseLayer(weight=np.eye(2), bias=np.zeros(2)),
            DenseLayer(weight=np.ones((2, 2)), bias=np.array([-10.0, -10.0])),
        ),
        activation=Activation.RELU,
    )
    trace = forward_head(head, np.array([0.5, 0.5]))
    np.testing.assert_array_equal(dense_jacobian(head, trace, 2), np.zeros((2, 2)))


def test_dense_jacobian_vs_fd(rng):
    head = random_head(rng, [4, 5, 3])
    x = rng.normal(size=4)
    trace = forward_head(head, x)
    closed = dense_jacobian(head, trace, 2)
    q1 = trace.post_activation(1)

    def layer2(q):
        t = forward_head(
            DenseHead(layers=(head.layers[1],), activation=head.activation), q
        )
        return t.post_activation(1)

    fd = fd_jacobian(layer2, q1, FDConfig())
    assert compare(closed, fd, 1e-6).passed


def test_flatten_jacobian_single_map_equals_whole(rng):
    head = random_head(rng, [6, 4])
    trace = forward_head(head, rng.normal(size=6))
    block = flatten_jacobian(head, trace, 1, 6)
    d = activation_jacobian(head.activation, trace.pre_activation(1))
    np.testing.assert_array_equal(block, d @ head.layers[0].weight)


def test_flatten_jacobian_zero_weights():
    head = DenseHead(
        layers=(DenseLayer(weight=np.zeros((3, 4)), bias=np.ones(3)),),
        activation=Activation.SIGMOID,
    )
    trace = forward_head(head, np.ones(4))
    np.testing.assert_array_equal(flatten_jacobian(head, trace, 2, 2), np.zeros((3, 2)))


def test_flatten_jacobian_blocks_tile_full_fd(rng):
    t, m, n = 2, 2, 2
    head = random_head(rng, [t * m * n, 5])
    x = rng.normal(size=t * m * n)
    trace = forward_head(head, x)
    closed = np.hstack([flatten_jacobian(head, trace, k, m * n) for k in (1, 2)])
    fd = fd_jacobian(lambda v: forward_head(head, v).post_activation(1), x, FDConfig())
    assert compare(closed, fd, 1e-6).passed


def test_flatten_jacobian_map_index_range(rng):
    head = random_head(rng, [6, 4])
    trace = forward_head(head, rng.normal(size=6))
    with pytest.raises(IndexError):
        flatten_jacobian(head, trace, 4, 2)


def test_pca_jacobian_identity():
    from headcam.pca import PCAProjector

    proj = PCAProjector(mean=np.zeros(3), eigenvectors=np.eye(3), eigenvalues=np.ones(3))
    np.testing.assert_array_equal(pca_jacobian(proj), np.eye(3))


def test_pca_jacobian_two_point_fit():
    proj = fit([[0.0, 0.0], [2.0, 2.0]], 1)
    np.testing.assert_allclose(pca_jacobian(proj), [[1 / np.sqrt(2), 1 / np.sqrt(2)]], atol=1e-12)


def test_pca_jacobian_matches_fd(rng):
    proj = fitted_projector(rng, 5, 3)
    fd = fd_jacobian(lambda q: project(proj, q), rng.normal(size=5), FDConfig())
    assert np.max(np.abs(fd.entries - pca_jacobian(proj))) < 1e-7


def test_chain_pca_layer_one_empty_product(rng):
    stack = random_stack(rng, 2, 2, 2)
    head = random_head(rng, [8, 5, 4])
    proj = fitted_projector(rng, 5, 2)
    trace = forward_head(head, concat_features(stack), depth=1)
    blocks = chain_pca(head, proj, stack, 1)
    for k, block in enumerate(blocks, start=1):
        expected = proj.eigenvectors.T @ flatten_jacobian(head, trace, k, 4)
        np.testing.assert_allclose(block, expected, rtol=1e-12)


def test_chain_pca_zero_middle_weights(rng):
    stack = random_stack(rng, 2, 2, 2)
    layers = (
        DenseLayer(weight=np.random.default_rng(0).normal(size=(5, 8)), bias=np.zeros(5)),
        DenseLayer(weight=np.zeros((4, 5)), bias=np.zeros(4)),
        DenseLayer(weight=np.random.default_rng(1).normal(size=(3, 4)), bias=np.zeros(3)),
    )
    head = DenseHead(layers=layers, activation=Activation.SIGMOID)
    proj = fitted_projector(rng, 4, 2)
    for block in chain_pca(head, proj, stack, 2):
        np.testing.assert_array_equal(block, np.zeros((2, 4)))


def test_chain_pca_vs_fd_sigmoid(rng):
    stack = random_stack(rng, 2, 2, 2)
    head = random_head(rng, [8, 8, 6, 4])
    proj = fitted_projector(rng, 6, 3)
    layer = 2
    closed = np.hstack(chain_pca(head, proj, stack, layer))
    fd = fd_jacobian(
        lambda v: project(proj, forward_head(head, v, depth=layer).post_activation(layer)),
        concat_features(stack),
        FDConfig(),
    )
    report = compare(closed, fd, 1e-5)
    assert report.passed, report


def test_chain_pca_layer_position_error(rng):
    stack = random_stack(rng, 1, 2, 2)
    head = random_head(rng, [4, 3, 2])
    proj = fitted_projector(rng, 2, 1)
    with pytest.raises(LayerPositionError):
        chain_pca(head, proj, stack, 2)


def test_chain_pca_dim_mismatch(rng):
    stack = random_stack(rng, 1, 2, 2)
    head = random_head(rng, [4, 3, 2])
    proj = fitted_projector(rng, 5, 2)
    with pytest.raises(ShapeError):
        chain_pca(head, proj, stack, 1)


def test_chain_svm_linear_factorization_exact(rng):
    stack = random_stack(rng, 2, 2, 2)
    head = random_head(rng, [8, 7, 6, 4])
    proj = fitted_projector(rng, 6, 3)
    model = SVMModel(
        support_vectors=rng.normal(size=(4, 3)),
        duals=rng.uniform(0.1, 1.0, size=4),
        labels=rng.choice([-1.0, 1.0], size=4),
        bias=0.2,
        kernel=linear_kernel(),
    )
    blocks = chain_pca(head, proj, stack, 2)
    rows = chain_svm(head, proj, model, stack, 2)
    w = (model.duals * model.labels) @ model.support_vectors
    for row, block in zip(rows, blocks):
        np.testing.assert_array_equal(row, w @ block)


def test_chain_svm_rbf_zero_at_support_vector(rng):
    stack = random_stack(rng, 1, 2, 2)
    head = random_head(rng, [4, 3, 2])
    proj = fitted_projector(rng, 3, 2)
    trace = forward_head(head, concat_features(stack), depth=1)
    p = project(proj, trace.post_activation(1))
    model = SVMModel(
        support_vectors=p[None, :],
        duals=np.ones(1),
        labels=np.ones(1),
        bias=0.0,
        kernel=rbf_kernel(1.0),
    )
    for row in chain_svm(head, proj, model, stack, 1):
        np.testing.assert_array_equal(row, np.zeros(4))


def test_chain_svm_rbf_vs_fd(rng):
    stack = random_stack(rng, 2, 2, 2)
    head = random_head(rng, [8, 7, 6, 4])
    proj = fitted_projector(rng, 6, 3)
    model = rbf_model(rng, 3)
    layer = 2
    closed = np.hstack(chain_svm(head, proj, model, stack, layer))[None, :]
    fd = fd_jacobian(
        lambda v: np.array(
            [decision(model, project(proj, forward_head(head, v, depth=layer).post_activation(layer)))]
        ),
        concat_features(stack),
        FDConfig(),
    )
    report = compare(closed, fd, 1e-5)
    assert report.passed, report


def test_chain_class_vs_fd(rng):
    stack = random_stack(rng, 2, 2, 2)
    head = random_head(rng, [8, 6, 3])
    closed = np.hstack(chain_class(head, stack))
    fd = fd_jacobian(
        lambda v: forward_head(head, v).post_activation(2), concat_features(stack), FDConfig()
    )
    report = compare(closed, fd, 1e-5)
    assert report.passed, report


def test_chain_class_zero_last_layer(rng):
    stack = random_stack(rng, 1, 2, 2)
    layers = (
        DenseLayer(weight=np.random.default_rng(3).normal(size=(3, 4)), bias=np.zeros(3)),
        DenseLayer(weight=np.zeros((2, 3)), bias=np.zeros(2)),
    )
    head = DenseHead(layers=layers, activation=Activation.SIGMOID)
    for block in chain_class(head, stack):
        np.testing.assert_array_equal(block, np.zeros((2, 4)))


def test_chain_class_single_layer(rng):
    stack = random_stack(rng, 1, 2, 2)
    head = random_head(rng, [4, 1])
    trace = forward_head(head, concat_features(stack))
    blocks = chain_class(head, stack)
    np.testing.assert_allclose(blocks[0], flatten_jacobian(head, trace, 1, 4), rtol=1e-12)


def test_build_bundle_contents(rng):
    stack = random_stack(rng, 2, 2, 2)
    head = random_head(rng, [8, 7, 6, 4])
    proj = fitted_projector(rng, 6, 3)
    model = rbf_model(rng, 3)
    jac = build_bundle(head, stack, proj=proj, model=model, layer=2, include_class=True)
    assert len(jac.per_map_pca) == 2 and jac.per_map_pca[0].shape == (3, 4)
    assert len(jac.per_map_svm) == 2 and jac.per_map_svm[0].shape == (4,)
    assert len(jac.per_map_class) == 2 and jac.per_map_class[0].shape == (4, 4)
