"""Central finite-difference Jacobian oracle, independent of the closed forms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ShapeError
from .types import JacobianMatrix


@dataclass(frozen=True)
class FDConfig:
    step: float = 1e-5
    rel_tol: float = 1e-5

    def __post_init__(self):
        if self.step <= 0 or self.rel_tol <= 0:
            raise ShapeError("step and rel_tol must be positive")


@dataclass(frozen=True)
class ComparisonReport:
    max_rel_err: float
    worst_index: tuple[int, int]
    passed: bool


def fd_jacobian(func, x0, cfg: FDConfig = FDConfig()) -> JacobianMatrix:
    """Central differences: column z is (f(x0 + h e_z) - f(x0 - h e_z)) / (2h)."""
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.ndim != 1:
        raise ShapeError("x0 must be a 1-D vector")
    h = cfg.step
    f0 = np.atleast_1d(np.asarray(func(x0), dtype=np.float64))
    if not np.all(np.isfinite(f0)):
        raise NumericError(f"non-finite output at base point, index {int(np.argmax(~np.isfinite(f0)))}")
    jac = np.empty((f0.size, x0.size))
    for z in range(x0.size):
        xp = x0.copy()
        xp[z] += h
        xm = x0.copy()
        xm[z] -= h
        fp = np.atleast_1d(np.asarray(func(xp), dtype=np.float64))
        fm = np.atleast_1d(np.asarray(func(xm), dtype=np.float64))
        col = (fp - fm) / (2.0 * h)
        if not np.all(np.isfinite(col)):
            raise NumericError(f"non-finite derivative in column {z}")
        jac[:, z] = col
    return JacobianMatrix(entries=jac, row_space="f(x)", col_space="x")


def _entries(j) -> np.ndarray:
    return j.entries if isinstance(j, JacobianMatrix) else np.asarray(j, dtype=np.float64)


def compare(closed, fd, rel_tol: float = 1e-5) -> ComparisonReport:
    """Max relative error |c - f| / max(1e-12, |c|, |f|) with a pass verdict.

    The 1e-12 floor keeps exactly-zero entries (Relu masks, block structure)
    from producing 0/0.
    """
    c = _entries(closed)
    f = _entries(fd)
    if c.shape != f.shape:
        raise ShapeError(f"shape mismatch: {c.shape} vs {f.shape}")
    denom = np.maximum(1e-12, np.maximum(np.abs(c), np.abs(f)))
    rel = np.abs(c - f) / denom
    worst = np.unravel_index(np.argmax(rel), rel.shape)
    max_err = float(rel[worst])
    return ComparisonReport(
        max_rel_err=max_err,
        worst_index=(int(worst[0]), int(worst[1])),
        passed=max_err <= rel_tol,
    )
