"""PCA layer: covariance fit, cyclic-Jacobi eigendecomposition and projection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSpectrumError,
    InsufficientSamplesError,
    ShapeError,
    ValidationError,
)
from .types import _frozen_array

_SYMMETRY_TOL = 1e-12
_OFFDIAG_TOL = 1e-12
_MAX_SWEEPS = 100


@dataclass(frozen=True)
class PCAProjector:
    """Mean, top-B eigenvectors (columns) and eigenvalues of the activation covariance."""

    mean: np.ndarray  # (D,)
    eigenvectors: np.ndarray  # (D, B)
    eigenvalues: np.ndarray  # (B,) descending

    def __post_init__(self):
        mean = _frozen_array(self.mean)
        vecs = _frozen_array(self.eigenvectors)
        vals = _frozen_array(self.eigenvalues)
        if mean.ndim != 1 or vecs.ndim != 2 or vals.ndim != 1:
            raise ShapeError("projector expects 1-D mean, 2-D eigenvectors, 1-D eigenvalues")
        if vecs.shape[0] != mean.size:
            raise ShapeError("eigenvector rows must match mean length")
        if vecs.shape[1] != vals.size:
            raise ShapeError("eigenvector columns must match eigenvalue count")
        if vecs.shape[1] > vecs.shape[0]:
            raise ValidationError(
                f"component count {vecs.shape[1]} exceeds dimension {vecs.shape[0]}"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "eigenvectors", vecs)
        object.__setattr__(self, "eigenvalues", vals)

    @property
    def input_dim(self) -> int:
        return self.mean.size

    @property
    def components(self) -> int:
        return self.eigenvalues.size


def covariance(observations) -> tuple[np.ndarray, np.ndarray]:
    """Unbiased covariance and mean of R row-observations; requires R >= 2."""
    obs = np.asarray(observations, dtype=np.float64)
    if obs.ndim != 2:
        raise ShapeError("observations must be a 2-D (R, D) array")
    r = obs.shape[0]
    if r < 2:
        raise InsufficientSamplesError(f"need at least 2 observations, got {r}")
    mean = obs.mean(axis=0)
    centered = obs - mean
    sigma = centered.T @ centered / (r - 1)
    return sigma, mean


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def sym_eig(sigma, b: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-b eigenpairs of a symmetric matrix via cyclic Jacobi rotations.

    Eigenvalues come back descending (ties kept in original index order) and
    each eigenvector is sign-normalized so its largest-magnitude entry is
    positive.
    """
    a = np.array(sigma, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError("expected a square matrix")
    n = a.shape[0]
    if np.max(np.abs(a - a.T)) > _SYMMETRY_TOL * max(1.0, np.max(np.abs(a))):
        raise ValidationError("matrix is not symmetric within tolerance")
    if not 1 <= b <= n:
        raise ValidationError(f"component count must be in 1..{n}, got {b}")

    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = max(1.0, float(np.sqrt(np.sum(a * a))))
    for _ in range(_MAX_SWEEPS):
        if _offdiag_norm(a) <= _OFFDIAG_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # rotate columns p, q of A and V, then rows p, q of A
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq

    vals = np.diag(a).copy()
    order = np.argsort(-vals, kind="stable")[:b]
    vals = vals[order]
    vecs = v[:, order].copy()
    for k in range(b):
        lead = np.argmax(np.abs(vecs[:, k]))
        if vecs[lead, k] < 0:
            vecs[:, k] = -vecs[:, k]
    return vals, vecs


def fit(observations, components: int) -> PCAProjector:
    """Fit mean, eigenvectors and eigenvalues from row-observations."""
    sigma, mean = covariance(observations)
    vals, vecs = sym_eig(sigma, components)
    return PCAProjector(mean=mean, eigenvectors=vecs, eigenvalues=vals)


def project(proj: PCAProjector, q) -> np.ndarray:
    """p = V^T (q - u)."""
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 1 or q.size != proj.input_dim:
        raise ShapeError(f"vector of length {q.size} does not match projector dim {proj.input_dim}")
    return proj.eigenvectors.T @ (q - proj.mean)


def contribution_ratios(proj: PCAProjector) -> np.ndarray:
    """Eigenvalues normalized to percentages of total variance."""
    vals = proj.eigenvalues
    total = float(np.sum(vals))
    if np.max(np.abs(vals)) == 0.0 or total == 0.0:
        raise DegenerateSpectrumError("all eigenvalues are zero")
    return 100.0 * vals / total
