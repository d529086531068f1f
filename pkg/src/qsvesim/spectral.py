"""Exact dense linear algebra: the correctness oracle for everything else."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularMatrixError, ValidationError
from .state import QuantumState

SYMMETRY_TOL = 1e-12
ZERO_EIGENVALUE_CUTOFF = 1e-14  # relative to max |eigenvalue|


@dataclass
class SpectralDecomposition:
    """Eigenpairs of a real symmetric matrix, sorted by |eigenvalue| descending.

    ``vectors[:, k]`` is the orthonormal eigenvector for ``eigenvalues[k]``;
    singular values are the eigenvalue magnitudes.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    singular_values: np.ndarray = field(init=False)
    kappa: float = field(init=False)

    def __post_init__(self):
        self.singular_values = np.abs(self.eigenvalues)
        smax = float(self.singular_values.max(initial=0.0))
        floor = ZERO_EIGENVALUE_CUTOFF * smax
        nonzero = self.singular_values[self.singular_values > floor]
        if smax == 0.0 or nonzero.size < self.singular_values.size:
            self.kappa = float("inf")
        else:
            self.kappa = float(smax / nonzero.min())

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.eigenvalues) @ self.vectors.T

    def coefficients(self, b: np.ndarray) -> np.ndarray:
        """Expansion coefficients of b in the eigenbasis."""
        return self.vectors.T @ np.asarray(b, dtype=float).reshape(-1)


def _require_symmetric(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"matrix must be square, got shape {a.shape}")
    asym = np.max(np.abs(a - a.T), initial=0.0)
    if asym > SYMMETRY_TOL * max(1.0, np.max(np.abs(a), initial=0.0)):
        raise ValidationError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    return a


def decompose(a: np.ndarray) -> SpectralDecomposition:
    """Eigendecompose a symmetric matrix with a deterministic sign convention."""
    a = _require_symmetric(a)
    vals, vecs = np.linalg.eigh((a + a.T) / 2.0)
    order = np.argsort(-np.abs(vals), kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    for k in range(vals.size):
        lead = int(np.argmax(np.abs(vecs[:, k])))
        if vecs[lead, k] < 0:
            vecs[:, k] = -vecs[:, k]
    return SpectralDecomposition(vals, vecs)


def hermitian_dilation(a: np.ndarray) -> np.ndarray:
    """Embed a rectangular matrix as [[0, A], [A^T, 0]]; spectrum is +-sigma(A)."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValidationError("dilation expects a 2-D array")
    m, n = a.shape
    return np.block([[np.zeros((m, m)), a], [a.T, np.zeros((n, n))]])


def true_solution(a: np.ndarray, b: np.ndarray) -> QuantumState:
    """Exact normalized solution state of A x = b via direct dense solve."""
    a = _require_symmetric(a)
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.shape[0] != a.shape[0]:
        raise ValidationError(f"b has length {b.shape[0]}, expected {a.shape[0]}")
    if np.linalg.norm(b) == 0.0:
        raise ValidationError("b must be nonzero")
    svals = np.linalg.svd(a, compute_uv=False)
    if svals.min() <= ZERO_EIGENVALUE_CUTOFF * svals.max():
        raise SingularMatrixError("matrix is singular to working precision")
    x = np.linalg.solve(a, b)
    return QuantumState(x, normalize=True)


def spectral_norm(a: np.ndarray) -> float:
    return float(np.linalg.svd(np.asarray(a, dtype=float), compute_uv=False).max(initial=0.0))
