"""Row/norm isometries and the two-reflection walk unitary.

From a stored m x n matrix A the store's two queries define dense isometries

    R: R^m -> R^(mn), column i carries the row state of row i in block i,
    C: R^n -> R^(mn), column j carries amplitude ||A_i|| / ||A||_F at (i, j),

whose defining identities are R^T R = I_m, C^T C = I_n and
R^T C = A / ||A||_F. The walk unitary is the product of the reflections
about their column spaces,

    W = (2 R R^T - I) (2 C C^T - I).

For each singular triplet (u, sigma, v) of A the plane span{R u, C v} is
W-invariant and W rotates it by the angle theta with
cos(theta / 2) = sigma / ||A||_F, so the eigenphases of W restricted to the
union of these planes are the pairs +-theta. Everything here is built as
dense matrices; sizes stay at desk scale.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRowError, StructuralMismatchError, ValidationError
from .matrix_store import MatrixStore
from .spectral import SpectralDecomposition

ORTHONORMALITY_TOL = 1e-12
ROTATION_TOL = 1e-10
PHASE_MATCH_TOL = 1e-9
PHASE_COLLISION_GUARD = 1e-6
# below this in-plane residual, Ru and Cv are treated as parallel and the
# plane as a fixed line. The threshold balances two error sources: the
# orthogonalized second direction inherits O(eps_mach / residual) noise,
# while the fixed-line restriction is off by O(residual^2); both stay well
# under the 1e-9 phase tolerance at 1e-5.
DEGENERATE_PLANE_TOL = 1e-5
ZERO_SIGMA_CUTOFF = 1e-14  # relative to the largest singular value


@dataclass
class IsometryPair:
    """Dense row and norm isometries of a stored matrix."""

    row_isometry: np.ndarray   # (m*n, m)
    norm_isometry: np.ndarray  # (m*n, n)
    frob: float

    @property
    def m(self) -> int:
        return self.row_isometry.shape[1]

    @property
    def n(self) -> int:
        return self.norm_isometry.shape[1]

    def factorization_residual(self, a: np.ndarray) -> float:
        """max-entry error of R^T C against A / ||A||_F."""
        target = np.asarray(a, dtype=float) / self.frob
        return float(np.max(np.abs(self.row_isometry.T @ self.norm_isometry - target)))

    def orthonormality_residuals(self) -> tuple[float, float]:
        rm = np.max(np.abs(self.row_isometry.T @ self.row_isometry - np.eye(self.m)))
        rn = np.max(np.abs(self.norm_isometry.T @ self.norm_isometry - np.eye(self.n)))
        return float(rm), float(rn)


@dataclass
class WalkUnitary:
    """The walk matrix plus an application tally for query accounting."""

    matrix: np.ndarray
    isometries: IsometryPair
    application_count: int = 0

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, vec: np.ndarray) -> np.ndarray:
        self.application_count += 1
        return self.matrix @ vec

    def orthogonality_residual(self) -> float:
        w = self.matrix
        return float(np.max(np.abs(w.T @ w - np.eye(w.shape[0]))))


@dataclass
class WalkAngleReport:
    """Singular values paired with matched walk eigenphases."""

    pairs: list[tuple[float, float]]            # (sigma_i, theta_i), zero sigmas skipped
    skipped_zero: list[int]                     # indices of skipped zero singular values
    max_rotation_residual: float                # worst |W Cv - (2 sigma/F) Ru + Cv|
    max_cos_residual: float                     # worst |<Cv|W|Cv> - (2 sigma^2/F^2 - 1)|
    max_phase_mismatch: float = field(default=0.0)


def build_isometries(store: MatrixStore) -> IsometryPair:
    """Materialize both isometries from the store's state queries.

    Rejects matrices with zero rows, whose row states are undefined.
    """
    zero = store.zero_rows()
    if zero:
        raise DegenerateRowError(zero[0])
    m, n = store.m, store.n
    norm_amps = store.norm_vector_state().amplitudes.real
    riso = np.zeros((m * n, m))
    niso = np.zeros((m * n, n))
    for i in range(m):
        block = slice(i * n, (i + 1) * n)
        riso[block, i] = store.row_state(i).amplitudes.real
        niso[block, :] = np.eye(n) * norm_amps[i]
    return IsometryPair(riso, niso, store.frobenius_norm())


def build_walk(iso: IsometryPair) -> WalkUnitary:
    """Product of the two column-space reflections, norm reflection first."""
    dim = iso.row_isometry.shape[0]
    refl_row = 2.0 * iso.row_isometry @ iso.row_isometry.T - np.eye(dim)
    refl_norm = 2.0 * iso.norm_isometry @ iso.norm_isometry.T - np.eye(dim)
    return WalkUnitary(refl_row @ refl_norm, iso)


def _singular_triplets(spec: SpectralDecomposition):
    """(u_i, sigma_i, v_i) for a symmetric matrix: v = s, u = sign(lambda) s."""
    for k in range(spec.dim):
        lam = spec.eigenvalues[k]
        v = spec.vectors[:, k]
        u = v if lam >= 0 else -v
        yield k, float(abs(lam)), u, v


def _invariant_subspace_phases(walk: WalkUnitary, basis_cols: list[np.ndarray]) -> np.ndarray:
    """Eigenphases of W restricted to the span of the given orthonormal columns."""
    q = np.column_stack(basis_cols)
    w_sub = q.T @ walk.matrix @ q
    return np.angle(np.linalg.eigvals(w_sub))


def _circular_gap(a: float, b: float) -> float:
    return abs(float(np.angle(np.exp(1j * (a - b)))))


def _match_phases(expected: list[float], computed: np.ndarray) -> float:
    """Greedy nearest-neighbor matching on the circle; returns the worst gap."""
    remaining = list(computed)
    if len(expected) != len(remaining):
        raise StructuralMismatchError(
            f"{len(expected)} expected eigenphases but subspace has {len(remaining)}"
        )
    worst = 0.0
    for target in sorted(expected, key=abs, reverse=True):
        gaps = [_circular_gap(c, target) for c in remaining]
        best = int(np.argmin(gaps))
        ranked = sorted(gaps)
        if len(ranked) > 1 and ranked[1] - ranked[0] < PHASE_COLLISION_GUARD:
            # degenerate candidates within the guard: either is valid, take nearest
            pass
        if gaps[best] > PHASE_MATCH_TOL:
            raise StructuralMismatchError(
                f"expected eigenphase {target:.12g} unmatched (nearest gap {gaps[best]:.3e})"
            )
        worst = max(worst, gaps[best])
        remaining.pop(best)
    return worst


def walk_angles(walk: WalkUnitary, spec: SpectralDecomposition) -> WalkAngleReport:
    """Verify the rotation structure and pair singular values with eigenphases.

    Checks, for every nonzero singular value:
      * W (Cv) = (2 sigma / F) Ru - Cv,
      * <Cv| W |Cv> = 2 sigma^2 / F^2 - 1,
      * theta = 2 arccos(sigma / F) occurs as an eigenphase pair +-theta of W
        restricted to the union of the invariant planes.
    """
    iso = walk.isometries
    frob = iso.frob
    if frob <= 0.0:
        raise ValidationError("walk angles need a nonzero matrix")
    pairs: list[tuple[float, float]] = []
    skipped: list[int] = []
    basis_cols: list[np.ndarray] = []
    expected_phases: list[float] = []
    max_rot = 0.0
    max_cos = 0.0
    sigma_floor = ZERO_SIGMA_CUTOFF * float(spec.singular_values.max())
    for k, sigma, u, v in _singular_triplets(spec):
        if sigma <= sigma_floor:
            skipped.append(k)
            continue
        cv = iso.norm_isometry @ v
        ru = iso.row_isometry @ u
        rotated = walk.matrix @ cv
        max_rot = max(max_rot, float(np.linalg.norm(rotated - (2 * sigma / frob) * ru + cv)))
        cos_theta = float(cv @ rotated)
        max_cos = max(max_cos, abs(cos_theta - (2 * sigma**2 / frob**2 - 1)))
        theta = 2.0 * float(np.arccos(np.clip(sigma / frob, -1.0, 1.0)))
        pairs.append((sigma, theta))
        residual = ru - (cv @ ru) * cv
        rnorm = float(np.linalg.norm(residual))
        basis_cols.append(cv)
        if rnorm <= DEGENERATE_PLANE_TOL:
            expected_phases.append(0.0)  # Ru = Cv, the plane collapses to a fixed line
        else:
            basis_cols.append(residual / rnorm)
            expected_phases.extend([theta, -theta])
    if max_rot > ROTATION_TOL or max_cos > ROTATION_TOL:
        raise StructuralMismatchError(
            f"rotation identity violated (residuals {max_rot:.3e}, {max_cos:.3e})"
        )
    mismatch = 0.0
    if basis_cols:
        phases = _invariant_subspace_phases(walk, basis_cols)
        mismatch = _match_phases(expected_phases, phases)
    return WalkAngleReport(pairs, skipped, max_rot, max_cos, mismatch)


def plane_branch_weights(walk: WalkUnitary, spec: SpectralDecomposition, k: int) -> tuple[complex, complex]:
    """Overlap amplitudes of Cv_k with the two rotation eigenvectors of its plane.

    Returns (w_plus, w_minus); their squared magnitudes sum to 1. For a
    degenerate plane (theta = 0) the second amplitude is exactly zero.
    """
    iso = walk.isometries
    lam = spec.eigenvalues[k]
    v = spec.vectors[:, k]
    u = v if lam >= 0 else -v
    cv = iso.norm_isometry @ v
    ru = iso.row_isometry @ u
    residual = ru - (cv @ ru) * cv
    rnorm = np.linalg.norm(residual)
    if rnorm < DEGENERATE_PLANE_TOL:
        return (1.0 + 0.0j, 0.0 + 0.0j)
    q = residual / rnorm
    basis = np.column_stack([cv, q])
    w_plane = basis.T @ walk.matrix @ basis
    vals, vecs = np.linalg.eig(w_plane)
    plus = int(np.argmax(np.angle(vals)))
    minus = 1 - plus
    return (
        complex(np.conj(vecs[0, plus])),
        complex(np.conj(vecs[0, minus])),
    )
