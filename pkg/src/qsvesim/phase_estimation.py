"""Phase estimation, simulated two independent ways.

The statevector route runs the textbook circuit on t ancilla bits: a
Hadamard layer, controlled powers U^(2^l) obtained by repeated squaring,
and an inverse Fourier transform on the ancilla register. The spectral
route skips the statevector entirely: for an eigenphase theta the exact
t-bit outcome distribution is the squared Dirichlet kernel

    p(k) = | (1/N) sum_x exp(i x (theta - 2 pi k / N)) |^2,   N = 2^t,

evaluated here in the numerically safe form (sinc(f) / sinc(f/N))^2 with
f the outcome offset measured in grid units. Outcomes k >= N/2 represent
negative phases (two's complement), matching phases in [-pi, pi).

Both routes must produce identical ancilla statistics; the test suite
holds them to total-variation distance 1e-9.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ResourceLimitError, ValidationError
from .state import QuantumState
from .walk import WalkUnitary

UNITARITY_TOL = 1e-12
MAX_ANCILLA_BITS = 14
WEIGHT_SUM_TOL = 1e-9


def phase_grid(t: int) -> np.ndarray:
    """Signed phase value of each outcome k: 2 pi k / N wrapped to [-pi, pi)."""
    n = 1 << t
    k = np.arange(n)
    theta = 2.0 * np.pi * k / n
    theta[k >= n // 2] -= 2.0 * np.pi
    return theta


def outcome_distribution(theta: float, t: int) -> np.ndarray:
    """Exact single-eigenphase outcome distribution over the N = 2^t bins."""
    n = 1 << t
    offsets = theta * n / (2.0 * np.pi) - np.arange(n)
    offsets = (offsets + n / 2.0) % n - n / 2.0  # kernel is N-periodic in grid units
    return (np.sinc(offsets) / np.sinc(offsets / n)) ** 2


def _check_ancilla_bits(t: int):
    if not isinstance(t, (int, np.integer)) or not (1 <= t <= MAX_ANCILLA_BITS):
        raise ResourceLimitError(f"ancilla bits t={t} outside [1, {MAX_ANCILLA_BITS}]")


def _as_matrix(u) -> np.ndarray:
    mat = u.matrix if isinstance(u, WalkUnitary) else np.asarray(u)
    mat = mat.astype(complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"unitary must be square, got shape {mat.shape}")
    err = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))
    if err > UNITARITY_TOL:
        raise ValidationError(f"matrix is not unitary (residual {err:.3e})")
    return mat


def _controlled_powers(joint: np.ndarray, mat: np.ndarray, t: int, inverse: bool = False) -> np.ndarray:
    """Apply ctrl-U^(2^l) for l = 0..t-1 to a (2^t, d) joint state in place."""
    n = joint.shape[0]
    power = mat.conj().T if inverse else mat
    rows = np.arange(n)
    for level in range(t):
        mask = (rows >> level) & 1 == 1
        joint[mask] = joint[mask] @ power.T
        power = power @ power
    return joint


def qpe_statevector(u, input_state: QuantumState, t: int) -> QuantumState:
    """Full statevector QPE; returns the joint (ancilla tensor system) state.

    When ``u`` is a WalkUnitary its application counter is advanced by
    2^t - 1, the number of walk applications the circuit performs.
    """
    _check_ancilla_bits(t)
    mat = _as_matrix(u)
    vec = input_state.amplitudes
    if vec.size != mat.shape[0]:
        raise ValidationError(
            f"input dimension {vec.size} does not match unitary dimension {mat.shape[0]}"
        )
    n = 1 << t
    joint = np.repeat(vec[None, :], n, axis=0) / np.sqrt(n)  # Hadamard layer on |0..0>
    joint = _controlled_powers(joint, mat, t)
    joint = np.fft.fft(joint, axis=0) / np.sqrt(n)  # inverse QFT on the ancilla
    if isinstance(u, WalkUnitary):
        u.application_count += n - 1
    return QuantumState(joint.reshape(-1), dims=(n, vec.size))


def _hadamard_layer(t: int) -> np.ndarray:
    h1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    h = np.array([[1.0]])
    for _ in range(t):
        h = np.kron(h, h1)
    return h


def qpe_statevector_inverse(joint: QuantumState, u, t: int) -> np.ndarray:
    """Inverse of the QPE circuit applied to an arbitrary joint state.

    Returns the raw (2^t, d) array; row 0 is the ancilla-restored branch.
    Used by the uncomputation checks, so no counter accounting here.
    """
    _check_ancilla_bits(t)
    mat = _as_matrix(u)
    n = 1 << t
    arr = joint.amplitudes.reshape(n, -1).copy() if isinstance(joint, QuantumState) else np.array(joint, dtype=complex)
    arr = np.fft.ifft(arr, axis=0) * np.sqrt(n)
    arr = _controlled_powers(arr, mat, t, inverse=True)
    return _hadamard_layer(t) @ arr


@dataclass
class PhaseEstimateDistribution:
    """Exact per-eigencomponent QPE outcome distributions on the t-bit grid."""

    t: int
    eigenphases: np.ndarray
    weights: np.ndarray
    probs: np.ndarray  # shape (n_components, 2^t)

    @property
    def n_outcomes(self) -> int:
        return 1 << self.t

    def theta_values(self) -> np.ndarray:
        return phase_grid(self.t)

    def marginal(self) -> np.ndarray:
        return self.weights @ self.probs

    def component(self, j: int) -> np.ndarray:
        return self.probs[j]

    def sample(self, j: int, rng: np.random.Generator, size: int = 1) -> np.ndarray:
        return rng.choice(self.n_outcomes, size=size, p=self.probs[j])


def qpe_exact_spectral(eigenphases, weights, t: int) -> PhaseEstimateDistribution:
    """Outcome statistics from known eigenphases, no statevector involved."""
    _check_ancilla_bits(t)
    phases = np.asarray(eigenphases, dtype=float).reshape(-1)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if phases.size != w.size:
        raise ValidationError("eigenphases and weights must have equal length")
    if np.any(w < -WEIGHT_SUM_TOL):
        raise ValidationError("weights must be nonnegative")
    if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise ValidationError(f"weights sum to {w.sum()!r}, expected 1")
    probs = np.stack([outcome_distribution(th, t) for th in phases])
    return PhaseEstimateDistribution(t, phases, w, probs)


@dataclass
class PhaseErrorBound:
    """Worst-case accuracy guarantee of t-bit estimation with median boosting."""

    t: int
    c_slack: float
    repetitions: int
    grid: float             # ancilla phase spacing 2 pi / 2^t
    delta: float            # guaranteed accuracy c_slack * grid
    single_success: float   # worst-case P(|error| <= delta) in one run
    median_success: float   # same after median-of-r amplification

    @property
    def single_failure(self) -> float:
        return 1.0 - self.single_success

    @property
    def median_failure(self) -> float:
        return 1.0 - self.median_success


def phase_error_bound(t: int, repetitions: int = 1, c_slack: float = 1.0,
                      offset_samples: int = 201) -> PhaseErrorBound:
    """Accuracy delta = c_slack * 2pi/2^t and its worst-case confidence.

    The single-run success probability is minimized over the phase offset
    within one grid cell (by symmetry offsets in [0, 1/2] suffice). An odd
    number of repetitions sharpens it: the median misses only when at least
    half the runs miss, a binomial tail.
    """
    _check_ancilla_bits(t)
    if repetitions < 1 or repetitions % 2 == 0:
        raise ValidationError(f"repetitions must be odd and positive, got {repetitions}")
    if c_slack <= 0:
        raise ValidationError("c_slack must be positive")
    n = 1 << t
    grid = 2.0 * np.pi / n
    delta = c_slack * grid
    worst = 1.0
    for frac in np.linspace(0.0, 0.5, offset_samples):
        theta = frac * grid
        probs = outcome_distribution(theta, t)
        diff = np.angle(np.exp(1j * (phase_grid(t) - theta)))
        worst = min(worst, float(probs[np.abs(diff) <= delta * (1 + 1e-12)].sum()))
    if repetitions == 1:
        median_success = worst
    else:
        half = (repetitions - 1) // 2
        median_success = float(1.0 - stats.binom.cdf(half, repetitions, worst))
    return PhaseErrorBound(t, c_slack, repetitions, grid, delta, worst, median_success)


def ancilla_bits_for(delta: float, c_slack: float = 1.0) -> int:
    """Smallest t whose grid meets the target precision: t = ceil(log2(2 pi c / delta))."""
    if delta <= 0:
        raise ValidationError("delta must be positive")
    return max(1, int(np.ceil(np.log2(2.0 * np.pi * c_slack / delta))))


def nominal_delta(t: int, c_slack: float = 1.0) -> float:
    """Precision implied by a given register width, the inverse of ancilla_bits_for."""
    return 2.0 * np.pi * c_slack / (1 << t)
