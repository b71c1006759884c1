"""Forward pass of the dense head, recording the trace the Jacobians need."""

from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .types import Activation, DenseHead, ForwardTrace


def sigmoid(z):
    """Numerically stable (1 + exp(-z))^-1, elementwise."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


def relu(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.maximum(z, 0.0)
    return out if out.ndim else float(out)


def apply_activation(activation: Activation, z):
    if activation is Activation.SIGMOID:
        return sigmoid(z)
    return relu(z)


def forward_head(head: DenseHead, x, depth: int | None = None) -> ForwardTrace:
    """Compute delta_j and q_j for j = 1..depth (default: the full head)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != head.input_dim:
        raise ShapeError(f"input of length {x.size} does not match head input dim {head.input_dim}")
    if depth is None:
        depth = head.depth
    if not 1 <= depth <= head.depth:
        raise ShapeError(f"depth must be in 1..{head.depth}, got {depth}")

    pre, post = [], []
    q = x
    for layer in head.layers[:depth]:
        delta = layer.weight @ q + layer.bias
        q = apply_activation(head.activation, delta)
        pre.append(delta)
        post.append(q)
    return ForwardTrace(pre=tuple(pre), post=tuple(post))
