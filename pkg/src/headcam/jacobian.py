"""Closed-form per-layer Jacobians and the chain products feeding the CAMs.

Products are accumulated left-to-right so intermediates never exceed B (or C)
rows. The Relu derivative at exactly zero pre-activation is 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LayerPositionError, ShapeError, TraceDepthError
from .forward import forward_head, sigmoid
from .pca import PCAProjector, project
from .svm import SVMModel, decision_grad
from .types import Activation, DenseHead, FeatureStack, ForwardTrace, concat_features


@dataclass(frozen=True)
class JacobianBundle:
    """Per-feature-map Jacobians: dp/dx^t, da(p)/dx^t and optionally dy/dx^t."""

    per_map_pca: tuple[np.ndarray, ...] | None = None  # T of (B, M*N)
    per_map_svm: tuple[np.ndarray, ...] | None = None  # T of (M*N,)
    per_map_class: tuple[np.ndarray, ...] | None = None  # T of (C, M*N)


def _activation_diag(activation: Activation, delta: np.ndarray) -> np.ndarray:
    if activation is Activation.SIGMOID:
        f = sigmoid(delta)
        return (1.0 - f) * f
    return (delta > 0).astype(np.float64)


def activation_jacobian(activation: Activation, delta) -> np.ndarray:
    """Diagonal Jacobian of the elementwise activation at pre-activation delta."""
    delta = np.asarray(delta, dtype=np.float64)
    return np.diag(_activation_diag(activation, delta))


def dense_jacobian(head: DenseHead, trace: ForwardTrace, layer: int) -> np.ndarray:
    """dq_l/dq_{l-1} = diag(f'(delta_l)) W_l for 1-based layer >= 2."""
    if layer < 2:
        raise LayerPositionError("dense-to-dense Jacobian requires layer >= 2")
    delta = trace.pre_activation(layer)
    d = _activation_diag(head.activation, delta)
    return d[:, None] * head.layers[layer - 1].weight


def flatten_jacobian(head: DenseHead, trace: ForwardTrace, map_index: int, map_size: int) -> np.ndarray:
    """dq_1/dx^t = diag(f'(delta_1)) W_1^t for the 1-based map index t."""
    if head.input_dim % map_size != 0:
        raise ShapeError(f"map size {map_size} does not divide input dim {head.input_dim}")
    t_count = head.input_dim // map_size
    if not 1 <= map_index <= t_count:
        raise IndexError(f"map index must be in 1..{t_count}, got {map_index}")
    d = _activation_diag(head.activation, trace.pre_activation(1))
    lo = (map_index - 1) * map_size
    return d[:, None] * head.layers[0].weight[:, lo : lo + map_size]


def pca_jacobian(proj: PCAProjector) -> np.ndarray:
    """dp/dq_l = V^T."""
    return proj.eigenvectors.T.copy()


def _dense_product(head: DenseHead, trace: ForwardTrace, top: np.ndarray, layer: int) -> np.ndarray:
    """top @ (dense Jacobians layer..2); the empty product (layer = 1) is identity."""
    a = top
    for j in range(layer, 1, -1):
        a = a @ dense_jacobian(head, trace, j)
    return a


def _flatten_blocks(head: DenseHead, trace: ForwardTrace, a: np.ndarray, stack: FeatureStack):
    d1 = _activation_diag(head.activation, trace.pre_activation(1))
    a1 = a * d1[None, :]
    w1 = head.layers[0].weight
    size = stack.map_size
    return tuple(
        a1 @ w1[:, t * size : (t + 1) * size] for t in range(stack.t_count)
    )


def _check_stack(head: DenseHead, stack: FeatureStack) -> None:
    if head.input_dim != stack.t_count * stack.map_size:
        raise ShapeError(
            f"head input dim {head.input_dim} does not match feature stack size "
            f"{stack.t_count}x{stack.map_size}"
        )


def chain_pca(head: DenseHead, proj: PCAProjector, stack: FeatureStack, layer: int):
    """T matrices dp/dx^t of shape (B, M*N) for PCA attached at 1-based `layer`."""
    _check_stack(head, stack)
    if not 1 <= layer < head.depth:
        raise LayerPositionError(
            f"PCA layer must satisfy 1 <= l < L = {head.depth}, got {layer}"
        )
    if proj.input_dim != head.dims[layer]:
        raise ShapeError(
            f"projector dim {proj.input_dim} does not match layer width {head.dims[layer]}"
        )
    trace = forward_head(head, concat_features(stack), depth=layer)
    a = _dense_product(head, trace, proj.eigenvectors.T, layer)
    return _flatten_blocks(head, trace, a, stack)


def chain_svm(head: DenseHead, proj: PCAProjector, model: SVMModel, stack: FeatureStack, layer: int):
    """T row vectors da(p)/dx^t of length M*N."""
    if model.dim != proj.components:
        raise ShapeError(
            f"SVM dim {model.dim} does not match projector components {proj.components}"
        )
    blocks = chain_pca(head, proj, stack, layer)
    trace = forward_head(head, concat_features(stack), depth=layer)
    p = project(proj, trace.post_activation(layer))
    row = decision_grad(model, p)
    return tuple(row @ block for block in blocks)


def chain_class(head: DenseHead, stack: FeatureStack):
    """T matrices dy/dx^t of shape (C, M*N) through the full head depth."""
    _check_stack(head, stack)
    trace = forward_head(head, concat_features(stack))
    depth = head.depth
    top = np.eye(head.dims[depth])
    if depth >= 2:
        d = _activation_diag(head.activation, trace.pre_activation(depth))
        top = d[:, None] * head.layers[depth - 1].weight
        top = _dense_product(head, trace, top, depth - 1) if depth > 2 else top
    return _flatten_blocks(head, trace, top, stack)


def build_bundle(
    head: DenseHead,
    stack: FeatureStack,
    proj: PCAProjector | None = None,
    model: SVMModel | None = None,
    layer: int | None = None,
    include_class: bool = False,
) -> JacobianBundle:
    """Assemble all Jacobians a CAM computation may need from one input."""
    per_pca = per_svm = per_class = None
    if proj is not None:
        if layer is None:
            raise LayerPositionError("a PCA layer index is required with a projector")
        per_pca = chain_pca(head, proj, stack, layer)
        if model is not None:
            trace = forward_head(head, concat_features(stack), depth=layer)
            p = project(proj, trace.post_activation(layer))
            row = decision_grad(model, p)
            per_svm = tuple(row @ block for block in per_pca)
    if include_class:
        per_class = chain_class(head, stack)
    return JacobianBundle(per_map_pca=per_pca, per_map_svm=per_svm, per_map_class=per_class)
