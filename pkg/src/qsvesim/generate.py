"""Seeded test-matrix generators with pinned condition numbers."""
from __future__ import annotations

import numpy as np

from .errors import ValidationError

FAMILIES = ("diagonal", "random-symmetric", "random-psd", "rank-one")


def _seeded_orthogonal(n: int, seed: int) -> np.ndarray:
    """Deterministic random orthogonal matrix (QR with a fixed sign convention)."""
    rng = np.random.default_rng([seed, 0x0B7A])
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _eigenvalue_ladder(n: int, kappa_target: float, signs: np.ndarray) -> np.ndarray:
    """Magnitudes placed linearly from 1 down to 1/kappa, exact at both ends."""
    return np.linspace(1.0, 1.0 / kappa_target, n) * signs


def generate_matrix(family: str, n: int, kappa_target: float = 1.0, seed: int = 0) -> np.ndarray:
    """Symmetric matrix with max |eigenvalue| = 1 and min = 1/kappa_target.

    Eigenvalues are placed deterministically; eigenvectors come from a seeded
    random orthogonal basis (identity for the diagonal family). The rank-one
    family ignores kappa_target: it is singular by construction and exists
    for walk fixtures, not for solving.
    """
    if family not in FAMILIES:
        raise ValidationError(f"unknown matrix family {family!r}; choose from {FAMILIES}")
    if n < 1:
        raise ValidationError("n must be positive")
    if kappa_target < 1:
        raise ValidationError("kappa_target must be >= 1")
    if family == "rank-one":
        rng = np.random.default_rng([seed, 0x0001])
        v = rng.standard_normal(n)
        v = v / np.linalg.norm(v)
        return np.outer(v, v)
    if n == 1:
        if kappa_target != 1.0:
            raise ValidationError("a 1x1 matrix cannot have kappa > 1")
        return np.array([[1.0]])
    if family == "random-psd":
        signs = np.ones(n)
    elif family == "diagonal":
        signs = np.ones(n)
    else:  # random-symmetric: alternate signs so both branches get exercised
        signs = np.array([1.0 if k % 2 == 0 else -1.0 for k in range(n)])
    lams = _eigenvalue_ladder(n, kappa_target, signs)
    if family == "diagonal":
        return np.diag(lams)
    q = _seeded_orthogonal(n, seed)
    a = (q * lams) @ q.T
    return (a + a.T) / 2.0


def uniform_b(n: int) -> np.ndarray:
    return np.ones(n) / np.sqrt(n)


def top_eigenvector_b(a: np.ndarray) -> np.ndarray:
    """Eigenvector of the largest-magnitude eigenvalue (the worst case for
    post-selection cost, since its inversion amplitude is smallest)."""
    vals, vecs = np.linalg.eigh(np.asarray(a, dtype=float))
    return vecs[:, int(np.argmax(np.abs(vals)))]
