"""Heatmap construction: conventional, PCA (signed split) and SVM Grad-CAM."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, StateError
from .jacobian import JacobianBundle
from .types import FeatureStack, _frozen_array

SIGN_UNSIGNED = "unsigned"
SIGN_PLUS = "plus"
SIGN_MINUS = "minus"


@dataclass(frozen=True)
class CamMap:
    """An M x N heatmap with sign tag and shared color-bar maximum."""

    values: np.ndarray
    sign_tag: str = SIGN_UNSIGNED
    component_index: int | None = None
    color_max: float = 0.0

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.ndim != 2:
            raise ShapeError("CAM values must be a 2-D matrix")
        if self.sign_tag not in (SIGN_UNSIGNED, SIGN_PLUS, SIGN_MINUS):
            raise ShapeError(f"unknown sign tag {self.sign_tag!r}")
        if self.sign_tag != SIGN_UNSIGNED and np.any(values < 0):
            raise ShapeError("signed CAM halves must be elementwise nonnegative")
        if self.color_max < 0:
            raise ShapeError("color_max must be >= 0")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "color_max", float(self.color_max))


def map_weights(jacobian_rows, row: int) -> np.ndarray:
    """weight[t] = sum over columns of 1-based `row` of each per-map matrix."""
    mats = [np.asarray(m) for m in jacobian_rows]
    for m in mats:
        if not 1 <= row <= m.shape[0]:
            raise IndexError(f"row must be in 1..{m.shape[0]}, got {row}")
    return np.array([m[row - 1].sum() for m in mats])


def weighted_combination(weights, stack: FeatureStack) -> np.ndarray:
    """Sum_t weight[t] * F^t."""
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 1 or weights.size != stack.t_count:
        raise ShapeError(f"{weights.size} weights do not match {stack.t_count} feature maps")
    return np.tensordot(weights, stack.maps, axes=1)


def conventional_grad_cam(bundle: JacobianBundle, stack: FeatureStack, class_index: int) -> CamMap:
    """Relu(sum_t a_c^t F^t) for 1-based class c."""
    if bundle.per_map_class is None:
        raise StateError("bundle holds no class Jacobians")
    weights = map_weights(bundle.per_map_class, class_index)
    values = np.maximum(weighted_combination(weights, stack), 0.0)
    return CamMap(values=values, sign_tag=SIGN_UNSIGNED, color_max=float(values.max()))


def pca_grad_cam(bundle: JacobianBundle, stack: FeatureStack, component: int) -> tuple[CamMap, CamMap]:
    """Signed map P_b split into (plus, minus) halves sharing the color-bar max nu_b."""
    if bundle.per_map_pca is None:
        raise StateError("bundle holds no PCA Jacobians")
    weights = map_weights(bundle.per_map_pca, component)
    signed = weighted_combination(weights, stack)
    plus = np.maximum(signed, 0.0)
    minus = np.maximum(-signed, 0.0)
    nu = float(max(plus.max(), minus.max()))
    return (
        CamMap(values=plus, sign_tag=SIGN_PLUS, component_index=component, color_max=nu),
        CamMap(values=minus, sign_tag=SIGN_MINUS, component_index=component, color_max=nu),
    )


def pca_grad_cam_signed(bundle: JacobianBundle, stack: FeatureStack, component: int) -> np.ndarray:
    """The un-rectified P_b = sum_t e_b^t F^t."""
    if bundle.per_map_pca is None:
        raise StateError("bundle holds no PCA Jacobians")
    return weighted_combination(map_weights(bundle.per_map_pca, component), stack)


def svm_grad_cam(bundle: JacobianBundle, stack: FeatureStack) -> CamMap:
    """S = Relu(sum_t s^t F^t) with s^t the summed SVM gradient row."""
    if bundle.per_map_svm is None:
        raise StateError("bundle holds no SVM Jacobians")
    weights = np.array([np.asarray(r).sum() for r in bundle.per_map_svm])
    values = np.maximum(weighted_combination(weights, stack), 0.0)
    return CamMap(values=values, sign_tag=SIGN_UNSIGNED, color_max=float(values.max()))


def upsample(cam, rows: int, cols: int, mode: str = "bilinear") -> np.ndarray:
    """Enlarge an M x N map to rows x cols by nearest or bilinear interpolation."""
    values = np.asarray(cam, dtype=np.float64)
    if values.ndim != 2:
        raise ShapeError("expected a 2-D map")
    m, n = values.shape
    if rows < m or cols < n:
        raise ShapeError(f"cannot shrink {m}x{n} to {rows}x{cols}")
    if mode not in ("nearest", "bilinear"):
        raise ShapeError(f"unknown interpolation mode {mode!r}")

    src_r = np.zeros(rows) if m == 1 else np.arange(rows) * (m - 1) / (rows - 1)
    src_c = np.zeros(cols) if n == 1 else np.arange(cols) * (n - 1) / (cols - 1)
    if mode == "nearest":
        ri = np.rint(src_r).astype(int)
        ci = np.rint(src_c).astype(int)
        return values[np.ix_(ri, ci)]
    r0 = np.clip(np.floor(src_r).astype(int), 0, m - 1)
    c0 = np.clip(np.floor(src_c).astype(int), 0, n - 1)
    r1 = np.minimum(r0 + 1, m - 1)
    c1 = np.minimum(c0 + 1, n - 1)
    fr = (src_r - r0)[:, None]
    fc = (src_c - c0)[None, :]
    top = values[np.ix_(r0, c0)] * (1 - fc) + values[np.ix_(r0, c1)] * fc
    bot = values[np.ix_(r1, c0)] * (1 - fc) + values[np.ix_(r1, c1)] * fc
    return top * (1 - fr) + bot * fr
