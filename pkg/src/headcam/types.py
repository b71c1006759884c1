"""Core tensor and model-parameter types plus the flatten/concat conventions.

Indexing convention: documentation and CLI flags count layers, feature maps,
principal components and classes from 1; ndarray storage is 0-based row-major.
All arrays are float64 internally and frozen (read-only) after construction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError, ValidationError


class Activation(enum.Enum):
    SIGMOID = "sigmoid"
    RELU = "relu"


def _frozen_array(a, dtype=np.float64) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FeatureStack:
    """T feature maps of shape M x N from the last convolutional layer."""

    maps: np.ndarray  # (T, M, N)

    def __post_init__(self):
        maps = _frozen_array(self.maps)
        if maps.ndim != 3:
            raise ShapeError(f"feature maps must be a (T, M, N) array, got ndim={maps.ndim}")
        if min(maps.shape) < 1:
            raise ShapeError(f"feature map dimensions must all be >= 1, got {maps.shape}")
        object.__setattr__(self, "maps", maps)

    @property
    def t_count(self) -> int:
        return self.maps.shape[0]

    @property
    def m_rows(self) -> int:
        return self.maps.shape[1]

    @property
    def n_cols(self) -> int:
        return self.maps.shape[2]

    @property
    def map_size(self) -> int:
        return self.m_rows * self.n_cols


@dataclass(frozen=True)
class DenseLayer:
    weight: np.ndarray  # (D_l, D_{l-1})
    bias: np.ndarray  # (D_l,)

    def __post_init__(self):
        weight = _frozen_array(self.weight)
        bias = _frozen_array(self.bias)
        if weight.ndim != 2 or bias.ndim != 1:
            raise ShapeError("dense layer expects a 2-D weight and a 1-D bias")
        if weight.shape[0] != bias.shape[0]:
            raise ShapeError(
                f"weight rows ({weight.shape[0]}) must match bias length ({bias.shape[0]})"
            )
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "bias", bias)


@dataclass(frozen=True)
class DenseHead:
    """Ordered dense layers sharing one activation function."""

    layers: tuple[DenseLayer, ...]
    activation: Activation

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValidationError("dense head needs at least one layer")
        for prev, nxt in zip(layers, layers[1:]):
            if nxt.weight.shape[1] != prev.weight.shape[0]:
                raise ShapeError(
                    f"layer dimensions do not chain: {nxt.weight.shape[1]} != {prev.weight.shape[0]}"
                )
        object.__setattr__(self, "layers", layers)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].weight.shape[1]

    @property
    def dims(self) -> tuple[int, ...]:
        """(D_0, D_1, ..., D_L)."""
        return (self.input_dim,) + tuple(layer.weight.shape[0] for layer in self.layers)


@dataclass(frozen=True)
class ForwardTrace:
    """Pre- and post-activation vectors for layers 1..depth."""

    pre: tuple[np.ndarray, ...]
    post: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "pre", tuple(_frozen_array(v) for v in self.pre))
        object.__setattr__(self, "post", tuple(_frozen_array(v) for v in self.post))
        if len(self.pre) != len(self.post):
            raise ShapeError("trace pre/post layer counts differ")

    @property
    def depth(self) -> int:
        return len(self.pre)

    def pre_activation(self, layer: int) -> np.ndarray:
        """Pre-activation of 1-based `layer`."""
        self._check(layer)
        return self.pre[layer - 1]

    def post_activation(self, layer: int) -> np.ndarray:
        """Post-activation of 1-based `layer`."""
        self._check(layer)
        return self.post[layer - 1]

    def _check(self, layer: int) -> None:
        if not 1 <= layer <= self.depth:
            from .errors import TraceDepthError

            raise TraceDepthError(f"trace holds layers 1..{self.depth}, requested {layer}")


@dataclass(frozen=True)
class JacobianMatrix:
    """H x Z matrix of partials d(output_h)/d(input_z) with named spaces."""

    entries: np.ndarray
    row_space: str = ""
    col_space: str = ""

    def __post_init__(self):
        entries = _frozen_array(self.entries)
        if entries.ndim != 2:
            raise ShapeError("Jacobian entries must be 2-D")
        object.__setattr__(self, "entries", entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def flatten_map(map2d) -> np.ndarray:
    """Row-major flattening: output[(m-1)*N + n] = map[m][n] (1-based)."""
    arr = np.asarray(map2d, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-D map, got ndim={arr.ndim}")
    return arr.reshape(-1)


def concat_features(stack: FeatureStack) -> np.ndarray:
    """Vertical concatenation of the flattened maps, length M*N*T."""
    return stack.maps.reshape(-1)


def unflatten(vec, m: int, n: int) -> np.ndarray:
    """Inverse of flatten_map; raises ShapeError on a length mismatch."""
    arr = np.asarray(vec, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got ndim={arr.ndim}")
    if arr.size != m * n:
        raise ShapeError(f"vector of length {arr.size} cannot be reshaped to {m}x{n}")
    return arr.reshape(m, n)
