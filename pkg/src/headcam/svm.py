"""Binary SVM: decision function, kernel gradients, support-vector effect and SMO."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceError,
    DegenerateLabelsError,
    ShapeError,
    UnsupportedKernelError,
    ValidationError,
)
from .types import _frozen_array

KERNEL_LINEAR = "linear"
KERNEL_RBF = "rbf"

_SV_THRESHOLD = 1e-10
_FREE_MARGIN = 1e-8


@dataclass(frozen=True)
class Kernel:
    kind: str
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in (KERNEL_LINEAR, KERNEL_RBF):
            raise ValidationError(f"unknown kernel kind {self.kind!r}")
        if self.kind == KERNEL_RBF:
            if self.gamma is None or self.gamma <= 0:
                raise ValidationError("RBF kernel requires gamma > 0")
        elif self.gamma is not None:
            raise ValidationError("linear kernel takes no gamma")


def linear_kernel() -> Kernel:
    return Kernel(KERNEL_LINEAR)


def rbf_kernel(gamma: float) -> Kernel:
    return Kernel(KERNEL_RBF, float(gamma))


@dataclass(frozen=True)
class SVMModel:
    """Support vectors, duals, labels, bias and kernel of a trained binary SVM."""

    support_vectors: np.ndarray  # (I, B)
    duals: np.ndarray  # (I,) alpha_i >= 0
    labels: np.ndarray  # (I,) in {-1, +1}
    bias: float
    kernel: Kernel
    objective_history: tuple[float, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        sv = _frozen_array(self.support_vectors)
        duals = _frozen_array(self.duals)
        labels = _frozen_array(self.labels)
        if sv.ndim != 2:
            raise ShapeError("support vectors must be a 2-D (I, B) array")
        if sv.shape[0] < 1:
            raise ValidationError("at least one support vector is required")
        if duals.shape != (sv.shape[0],) or labels.shape != (sv.shape[0],):
            raise ShapeError("duals and labels must match the support-vector count")
        if np.any(duals < 0):
            raise ValidationError("dual coefficients must be nonnegative")
        if not np.all(np.isin(labels, (-1.0, 1.0))):
            raise ValidationError("labels must be -1 or +1")
        object.__setattr__(self, "support_vectors", sv)
        object.__setattr__(self, "duals", duals)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]


def _check_dim(model: SVMModel, p: np.ndarray) -> None:
    if p.ndim != 1 or p.size != model.dim:
        raise ShapeError(f"vector of length {p.size} does not match SVM dim {model.dim}")


def kernel_eval(model: SVMModel, p_i, p) -> float:
    """K(p_i, p): dot product (linear) or exp(-gamma ||p_i - p||^2) (RBF)."""
    p_i = np.asarray(p_i, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if p_i.shape != p.shape:
        raise ShapeError(f"kernel operands differ in shape: {p_i.shape} vs {p.shape}")
    if model.kernel.kind == KERNEL_LINEAR:
        return float(p_i @ p)
    diff = p_i - p
    return float(np.exp(-model.kernel.gamma * (diff @ diff)))


def decision(model: SVMModel, p) -> float:
    """a(p) = sum_i alpha_i c_i K(p_i, p) + g; the predicted class is its sign."""
    p = np.asarray(p, dtype=np.float64)
    _check_dim(model, p)
    if model.kernel.kind == KERNEL_LINEAR:
        k = model.support_vectors @ p
    else:
        diff = model.support_vectors - p
        k = np.exp(-model.kernel.gamma * np.sum(diff * diff, axis=1))
    return float((model.duals * model.labels) @ k + model.bias)


def kernel_grad(model: SVMModel, p_i, p) -> np.ndarray:
    """Row gradient dK(p_i, p)/dp: p_i^T (linear) or 2*gamma*K*(p_i - p)^T (RBF)."""
    p_i = np.asarray(p_i, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if p_i.shape != p.shape:
        raise ShapeError(f"kernel operands differ in shape: {p_i.shape} vs {p.shape}")
    if model.kernel.kind == KERNEL_LINEAR:
        return p_i.copy()
    gamma = model.kernel.gamma
    diff = p_i - p
    return 2.0 * gamma * np.exp(-gamma * (diff @ diff)) * diff


def decision_grad(model: SVMModel, p) -> np.ndarray:
    """Row gradient da(p)/dp = sum_i alpha_i c_i dK(p_i, p)/dp."""
    p = np.asarray(p, dtype=np.float64)
    _check_dim(model, p)
    coeff = model.duals * model.labels
    if model.kernel.kind == KERNEL_LINEAR:
        return coeff @ model.support_vectors
    gamma = model.kernel.gamma
    diff = model.support_vectors - p
    k = np.exp(-gamma * np.sum(diff * diff, axis=1))
    return 2.0 * gamma * ((coeff * k) @ diff)


def effect(model: SVMModel, distance):
    """Support-vector effect E(d) = 2*gamma*exp(-gamma*d^2)*d; RBF only.

    E vanishes at d -> 0 and d -> inf and peaks at d = 1/sqrt(2*gamma) with
    value sqrt(2*gamma)*exp(-1/2).
    """
    if model.kernel.kind != KERNEL_RBF:
        raise UnsupportedKernelError("effect function is defined for the RBF kernel only")
    d = np.asarray(distance, dtype=np.float64)
    if np.any(d < 0):
        raise ValidationError("distance must be nonnegative")
    gamma = model.kernel.gamma
    out = 2.0 * gamma * np.exp(-gamma * d * d) * d
    return out if out.ndim else float(out)


def _kernel_matrix(kernel: Kernel, x: np.ndarray) -> np.ndarray:
    if kernel.kind == KERNEL_LINEAR:
        return x @ x.T
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-kernel.gamma * d2)


def train_smo(
    samples,
    labels,
    kernel: Kernel,
    cost: float = 1.0,
    tol: float = 1e-6,
    max_iter: int = 100_000,
) -> SVMModel:
    """Train a binary SVM with two-index SMO (maximal-violating-pair selection).

    Keeps 0 <= alpha_i <= cost and sum alpha_i c_i = 0 throughout; the dual
    objective is non-decreasing across updates (recorded in
    ``objective_history``). Support vectors are samples with alpha > 1e-10.
    """
    x = np.asarray(samples, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.size:
        raise ShapeError("samples must be (R, B) with one label per row")
    if x.shape[0] < 2:
        raise ValidationError("need at least two samples")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValidationError("labels must be -1 or +1")
    if len(np.unique(y)) < 2:
        raise DegenerateLabelsError("training data contains a single class")
    if cost <= 0:
        raise ValidationError("cost must be positive")

    n = x.shape[0]
    k = _kernel_matrix(kernel, x)
    alpha = np.zeros(n)
    u = np.zeros(n)  # sum_j alpha_j y_j K_ij (no bias)
    history: list[float] = []

    def objective() -> float:
        return float(np.sum(alpha) - 0.5 * (alpha * y) @ u)

    converged = False
    for _ in range(max_iter):
        neg_e = y - u  # -E_i
        up = ((y > 0) & (alpha < cost - _FREE_MARGIN)) | ((y < 0) & (alpha > _FREE_MARGIN))
        low = ((y < 0) & (alpha < cost - _FREE_MARGIN)) | ((y > 0) & (alpha > _FREE_MARGIN))
        if not up.any() or not low.any():
            converged = True
            break
        i = np.flatnonzero(up)[np.argmax(neg_e[up])]
        j = np.flatnonzero(low)[np.argmin(neg_e[low])]
        if neg_e[i] - neg_e[j] <= tol:
            converged = True
            break

        eta = k[i, i] + k[j, j] - 2.0 * k[i, j]
        if eta <= 1e-12:
            eta = 1e-12
        if y[i] != y[j]:
            lo = max(0.0, alpha[j] - alpha[i])
            hi = min(cost, cost + alpha[j] - alpha[i])
        else:
            lo = max(0.0, alpha[i] + alpha[j] - cost)
            hi = min(cost, alpha[i] + alpha[j])
        e_i, e_j = u[i] - y[i], u[j] - y[j]
        aj_new = np.clip(alpha[j] + y[j] * (e_i - e_j) / eta, lo, hi)
        ai_new = alpha[i] + y[i] * y[j] * (alpha[j] - aj_new)
        u += y[i] * (ai_new - alpha[i]) * k[i] + y[j] * (aj_new - alpha[j]) * k[j]
        alpha[i], alpha[j] = ai_new, aj_new
        history.append(objective())
    if not converged:
        raise ConvergenceError(f"SMO did not converge within {max_iter} iterations")

    free = (alpha > _FREE_MARGIN) & (alpha < cost - _FREE_MARGIN)
    neg_e = y - u
    if free.any():
        bias = float(np.mean(neg_e[free]))
    else:
        up = ((y > 0) & (alpha < cost - _FREE_MARGIN)) | ((y < 0) & (alpha > _FREE_MARGIN))
        low = ((y < 0) & (alpha < cost - _FREE_MARGIN)) | ((y > 0) & (alpha > _FREE_MARGIN))
        hi = np.max(neg_e[up]) if up.any() else np.min(neg_e[low])
        lo = np.min(neg_e[low]) if low.any() else np.max(neg_e[up])
        bias = float(0.5 * (hi + lo))

    sv = alpha > _SV_THRESHOLD
    if not sv.any():
        # fully non-separating solution; keep the max-alpha sample so the model is valid
        sv = alpha == alpha.max()
    return SVMModel(
        support_vectors=x[sv],
        duals=alpha[sv],
        labels=y[sv],
        bias=bias,
        kernel=kernel,
        objective_history=tuple(history),
    )
