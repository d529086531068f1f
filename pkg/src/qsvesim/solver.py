"""Linear system solver built on dual singular value estimation.

Estimating singular values of a symmetric matrix recovers |lambda| but not
its sign. The solver therefore runs two estimation passes, one on A and one
on the shifted matrix A + mu*I (same eigenvectors, eigenvalues shifted by
mu), and declares an eigenvalue negative exactly when the shifted estimate
is smaller than the unshifted one. With spectrum in [-1, -1/k] u [1/k, 1]:

    lambda >= 1/k:   |lambda + mu| - |lambda| = mu,
    lambda <= -mu:   |lambda| - |lambda + mu| = mu,
    -mu < lambda < -1/k: the gap shrinks to 2|lambda| - mu,

so the decision margin is min(mu, 2/k - mu). Two modes are provided:

* "corrected" (default): mu = 1/k with per-estimate error budget 1/(4k).
  The margin is 1/k, strictly larger than twice the budget, so signs are
  recovered whenever both estimates meet their budget.
* "paper-faithful": mu = 4/k with estimate precision 1/k. Eigenvalues in
  (-2/k, -1/k] then satisfy |lambda + mu| > |lambda| even for perfect
  estimates and are misclassified; this mode exists to demonstrate and
  log that behaviour, not to hide it.

Signed estimates feed a conditional rotation whose amplitude profile is a
filtered inverse. In "invert-only" form the well-conditioned branch gets
amplitude gamma / |est| with the recovered sign applied as a phase to the
whole component. The "full-fgh" form adds an ill-conditioned flag branch:
below 1/(2k) no inversion is attempted (flag amplitude 1/2), above 1/k the
pure inverse is used, and on [1/(2k), 1/k] the three-amplitude vector moves
along the constant-speed great-circle arc between the two regimes. That
ramp keeps the map lambda -> h(lambda) Lipschitz with constant below
(pi/2)*k for gamma*k <= 1/2, which the verification suite enforces.

Post-selecting the inversion branch yields the solution state; its exact
probability p = sum_i |beta_i * f_i|^2 is reported together with 1/p and
sqrt(1/p) repetition costs (plain retry vs amplitude amplification
accounting). All estimate randomness derives from the configured seed, so
a solve is reproducible bit for bit.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigurationError,
    IllConditionedError,
    SingularMatrixError,
    SpectralRangeError,
    ValidationError,
)
from .matrix_store import MatrixStore
from .phase_estimation import ancilla_bits_for, nominal_delta
from .qsve import QsveOutput, qsve_run, sample_sigma_estimates
from .spectral import (
    SpectralDecomposition,
    decompose,
    spectral_norm,
    true_solution,
)
from .state import QuantumState

SPECTRUM_SLACK = 1e-9
MIN_POST_SELECTION = 1e-15
ILL_CONDITIONED_FLAG_AMPLITUDE = 0.5
MODES = ("corrected", "paper-faithful")
FILTERS = ("invert-only", "full-fgh")


# -- filter functions --------------------------------------------------------


@dataclass
class FilterFunctions:
    """Truncated-inverse amplitude profile with a smooth interpolating ramp.

    All profiles are even: they are evaluated at |lambda| and the recovered
    sign is applied as a phase outside. ``ramp`` optionally reparametrizes
    the arc position u in [0, 1]; the default (identity) moves at constant
    speed along the arc, which is what keeps the Lipschitz constant low.
    """

    kappa: float
    gamma: float
    kind: str = "full-fgh"
    ramp: object = None  # callable u -> s on [0, 1], identity when None

    def __post_init__(self):
        if self.kappa < 1:
            raise ValidationError(f"kappa must be >= 1, got {self.kappa}")
        if not 0 < self.gamma:
            raise ValidationError(f"gamma must be positive, got {self.gamma}")
        if self.kind not in FILTERS:
            raise ValidationError(f"filter must be one of {FILTERS}, got {self.kind!r}")
        gk = self.gamma * self.kappa
        if self.kind == "full-fgh" and gk > 1.0:
            raise ConfigurationError(f"gamma*kappa = {gk:.4g} > 1 makes the inverse branch exceed 1")
        g_ic = ILL_CONDITIONED_FLAG_AMPLITUDE
        self._h_low = np.array([math.sqrt(1.0 - g_ic**2), 0.0, g_ic])
        self._h_high = np.array([math.sqrt(max(0.0, 1.0 - gk**2)), gk, 0.0])
        self._arc = math.acos(float(np.clip(self._h_low @ self._h_high, -1.0, 1.0)))

    @property
    def breakpoints(self) -> tuple[float, float]:
        return (1.0 / (2.0 * self.kappa), 1.0 / self.kappa)

    def h_vector(self, lam: float) -> np.ndarray:
        """Amplitudes (no-inversion, well-conditioned, ill-conditioned) at lambda."""
        a = abs(float(lam))
        if self.kind == "invert-only":
            if a < self.gamma:
                raise ConfigurationError(
                    f"rotation amplitude gamma/|est| exceeds 1: gamma={self.gamma:.4g} "
                    f"is too large for estimate {lam:.4g}"
                )
            f = self.gamma / a
            return np.array([math.sqrt(max(0.0, 1.0 - f * f)), f, 0.0])
        lo, hi = self.breakpoints
        if a <= lo:
            return self._h_low.copy()
        if a >= hi:
            f = self.gamma / a
            return np.array([math.sqrt(max(0.0, 1.0 - f * f)), f, 0.0])
        u = (a - lo) / (hi - lo)
        if self.ramp is not None:
            u = float(self.ramp(u))
        if self._arc < 1e-15:
            return self._h_low.copy()
        s = math.sin(self._arc)
        return (math.sin((1.0 - u) * self._arc) * self._h_low
                + math.sin(u * self._arc) * self._h_high) / s

    def f(self, lam: float) -> float:
        return float(self.h_vector(lam)[1])

    def g(self, lam: float) -> float:
        return float(self.h_vector(lam)[2])

    def grid_check(self, points: int = 10_000) -> float:
        """Max of f^2 + g^2 over a dense grid of the filter domain."""
        lams = np.linspace(-1.0, 1.0, points)
        if self.kind == "invert-only":
            lams = lams[np.abs(lams) >= self.gamma]
        worst = 0.0
        for lam in lams:
            h = self.h_vector(lam)
            worst = max(worst, float(h[1] ** 2 + h[2] ** 2))
        return worst


# -- configuration -----------------------------------------------------------


@dataclass
class SolverConfig:
    """Knobs of one solve; unset fields are derived from the matrix.

    ``kappa`` defaults to the oracle condition number, ``mu`` to the mode's
    shift, ``gamma`` to 1/(2 kappa), ``delta`` to the mode's estimation
    budget, and ``t`` to the register width meeting ``delta``.
    """

    epsilon: float = 0.05
    kappa: float | None = None
    mu: float | None = None
    gamma: float | None = None
    delta: float | None = None
    t: int | None = None
    mode: str = "corrected"
    filter: str = "invert-only"
    seed: int = 0
    c_slack: float = 1.0
    median_repetitions: int = 15
    path: str = "spectral"
    ramp: object = None

    def __post_init__(self):
        if self.mode == "paper":
            self.mode = "paper-faithful"
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.filter not in FILTERS:
            raise ValidationError(f"filter must be one of {FILTERS}, got {self.filter!r}")
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")
        if self.median_repetitions < 1 or self.median_repetitions % 2 == 0:
            raise ValidationError("median_repetitions must be odd and positive")
        if self.kappa is not None and self.kappa < 1:
            raise ValidationError("kappa must be >= 1")
        if self.mu is not None and self.mu <= 0:
            raise ValidationError("mu must be positive")


@dataclass
class ResolvedConfig:
    """Fully derived parameter set echoed into every report."""

    epsilon: float
    kappa: float
    mu: float
    gamma: float
    delta: float
    t: int
    mode: str
    filter: str
    seed: int
    c_slack: float
    median_repetitions: int
    path: str
    frobenius_norm: float
    shifted_frobenius_norm: float

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "kappa": self.kappa,
            "mu": self.mu,
            "gamma": self.gamma,
            "delta": self.delta,
            "t": self.t,
            "mode": self.mode,
            "filter": self.filter,
            "seed": self.seed,
            "c_slack": self.c_slack,
            "median_repetitions": self.median_repetitions,
            "path": self.path,
            "frobenius_norm": self.frobenius_norm,
            "shifted_frobenius_norm": self.shifted_frobenius_norm,
        }


def resolve_config(config: SolverConfig, spec: SpectralDecomposition,
                   frob: float) -> ResolvedConfig:
    """Fill in every derived parameter for a concrete matrix."""
    kappa = config.kappa if config.kappa is not None else spec.kappa
    if not math.isfinite(kappa):
        raise SingularMatrixError("matrix is singular; condition number is infinite")
    sigma_max = float(spec.singular_values.max())
    sigma_min = float(spec.singular_values.min())
    if sigma_max > 1.0 + SPECTRUM_SLACK:
        raise SpectralRangeError(float(spec.eigenvalues[0]), kappa)
    if sigma_min < (1.0 / kappa) * (1.0 - SPECTRUM_SLACK):
        bad = spec.eigenvalues[int(np.argmin(spec.singular_values))]
        raise SpectralRangeError(float(bad), kappa)
    mode = config.mode
    mu = config.mu if config.mu is not None else (1.0 / kappa if mode == "corrected" else 4.0 / kappa)
    gamma = config.gamma if config.gamma is not None else 1.0 / (2.0 * kappa)
    # the shifted pass measures against its own Frobenius norm, so the sign
    # budget must hold for the larger of the two
    dim = spec.dim
    frob_shifted = math.sqrt(frob**2 + 2.0 * mu * float(spec.eigenvalues.sum()) + dim * mu**2)
    frob_worst = max(frob, frob_shifted)
    if config.delta is not None:
        delta = config.delta
    elif mode == "corrected":
        delta = min(config.epsilon / (2.0 * kappa * frob),
                    1.0 / (4.0 * kappa * frob_worst))
    else:
        # verbatim estimation precision 1/kappa in absolute eigenvalue units
        delta = 1.0 / (kappa * frob_worst)
    t = config.t if config.t is not None else ancilla_bits_for(delta, config.c_slack)
    if config.t is not None and config.delta is None:
        delta = nominal_delta(t, config.c_slack)
    return ResolvedConfig(
        epsilon=config.epsilon, kappa=float(kappa), mu=float(mu), gamma=float(gamma),
        delta=float(delta), t=int(t), mode=mode, filter=config.filter,
        seed=config.seed, c_slack=config.c_slack,
        median_repetitions=config.median_repetitions, path=config.path,
        frobenius_norm=float(frob), shifted_frobenius_norm=float(frob_shifted),
    )


# -- sign recovery -----------------------------------------------------------


def sign_flag(value_b: float, value_c: float) -> int:
    """Negative-eigenvalue flag: 1 when the unshifted magnitude is larger."""
    return 1 if value_b > value_c else 0


@dataclass
class SignRecovery:
    """Signed eigenvalue estimates produced by comparing the two passes."""

    flags: np.ndarray          # 1 marks a recovered negative sign
    lambda_hat: np.ndarray     # (-1)^flag * |estimate| from the unshifted pass
    value_b: np.ndarray        # unshifted magnitudes
    value_c: np.ndarray        # shifted magnitudes


def recover_signs(est_a: QsveOutput, est_shifted: QsveOutput, mu: float,
                  *, seed: int = 0, repetitions: int = 15) -> SignRecovery:
    """Draw one estimate per component from both passes and compare them.

    Both passes draw with identical per-component seeds, the sampling
    analogue of comparing two registers inside one superposition branch.
    """
    if len(est_a.components) != len(est_shifted.components):
        raise ValidationError("estimation outputs cover different component counts")
    for ca, cs in zip(est_a.components, est_shifted.components):
        if abs(abs(np.vdot(ca.vector, cs.vector)) - 1.0) > 1e-8:
            raise ValidationError(
                f"component {ca.index} of the two passes has mismatched eigenvectors"
            )
    value_b = sample_sigma_estimates(est_a, seed, repetitions)
    value_c = sample_sigma_estimates(est_shifted, seed, repetitions)
    flags = np.array([sign_flag(b, c) for b, c in zip(value_b, value_c)], dtype=int)
    lam_hat = np.where(flags == 1, -value_b, value_b)
    return SignRecovery(flags, lam_hat, value_b, value_c)


# -- rotation and post-selection ----------------------------------------------


@dataclass
class RotatedState:
    """Pre-measurement joint state over (system component) x (flag branch)."""

    betas: np.ndarray          # input amplitudes in the eigenbasis
    lambda_hat: np.ndarray
    phases: np.ndarray         # (-1)^flag per component
    branch_amps: np.ndarray    # (n_components, 3): NO / WC / IC amplitudes
    vectors: np.ndarray        # eigenbasis columns, for assembling raw outputs

    def branch_probabilities(self) -> np.ndarray:
        """Total probability of the NO / WC / IC outcomes."""
        w = np.abs(self.betas) ** 2
        return w @ (self.branch_amps**2)


def conditional_rotation(betas, lambda_hat, filt: FilterFunctions,
                         vectors=None) -> RotatedState:
    """Attach the filtered-inversion branch amplitudes to each component.

    The recovered sign rides along as a (-1)^flag phase on the whole
    component; the amplitude profile itself sees only |lambda_hat|.
    """
    betas = np.asarray(betas, dtype=complex).reshape(-1)
    lam_hat = np.asarray(lambda_hat, dtype=float).reshape(-1)
    if betas.size != lam_hat.size:
        raise ValidationError("betas and lambda_hat must have equal length")
    amps = np.stack([filt.h_vector(lam) for lam in lam_hat])
    phases = np.where(lam_hat < 0, -1.0, 1.0)
    if vectors is None:
        vectors = np.eye(betas.size)
    return RotatedState(betas, lam_hat, phases, amps, np.asarray(vectors, dtype=float))


def post_select(rotated: RotatedState) -> tuple[QuantumState, float]:
    """Project on the inversion branch; returns the state and exact probability."""
    weights = np.abs(rotated.betas) ** 2
    wc = rotated.branch_amps[:, 1]
    probability = float(weights @ wc**2)
    if probability < MIN_POST_SELECTION:
        raise IllConditionedError(
            f"post-selection probability {probability:.3e} is numerically zero; "
            f"the input has no mass on the well-conditioned branch"
        )
    coeffs = rotated.phases * rotated.betas * wc
    raw = rotated.vectors @ coeffs
    return QuantumState(raw, normalize=True), probability


def sample_branch_frequencies(rotated: RotatedState, shots: int, seed: int = 0) -> np.ndarray:
    """Monte Carlo counts of the (NO, WC, IC) measurement, for cross-checks."""
    probs = rotated.branch_probabilities()
    probs = probs / probs.sum()
    rng = np.random.default_rng([seed, 0xB7])
    draws = rng.choice(3, size=shots, p=probs)
    return np.bincount(draws, minlength=3)


# -- normalization ------------------------------------------------------------


def spectrum_normalize(a: np.ndarray) -> tuple[np.ndarray, float]:
    """Rescale so the spectral norm is 1; returns (scaled matrix, factor)."""
    a = np.asarray(a, dtype=float)
    factor = spectral_norm(a)
    if factor == 0.0:
        raise ValidationError("cannot normalize the zero matrix")
    return a / factor, float(factor)


# -- the solver ---------------------------------------------------------------


@dataclass
class SolveReport:
    """Everything observable about one solve, JSON-serializable."""

    output_state: QuantumState
    true_state: QuantumState
    fidelity: float
    overlap_real: float
    distance: float
    h_distance: float
    post_selection_probability: float
    repetitions_raw: float
    repetitions_amplified: float
    walk_applications: int
    signs: list[dict]
    config: ResolvedConfig
    branch_probabilities: np.ndarray | None = field(repr=False, default=None)

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.as_dict(),
            "fidelity": self.fidelity,
            "distance": self.distance,
            "post_selection_probability": self.post_selection_probability,
            "repetitions_raw": self.repetitions_raw,
            "repetitions_amplified": self.repetitions_amplified,
            "walk_applications": self.walk_applications,
            "signs": self.signs,
            "output_state": [[float(z.real), float(z.imag)] for z in self.output_state.amplitudes],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent, sort_keys=True)


def solve(store: MatrixStore, b, config: SolverConfig | None = None) -> SolveReport:
    """Run the full pipeline: dual estimation, sign recovery, rotation, selection.

    ``store`` must hold a symmetric, invertible matrix whose eigenvalues lie
    in [-1, -1/kappa] u [1/kappa, 1]; ``b`` is any nonzero vector (it is
    normalized, and scaling it leaves the output unchanged).
    """
    config = config or SolverConfig()
    a = store.to_dense()
    spec = decompose(a)
    frob = store.frobenius_norm()
    if not math.isfinite(spec.kappa):
        raise SingularMatrixError("matrix is singular; cannot solve")
    resolved = resolve_config(config, spec, frob)
    b_state = b if isinstance(b, QuantumState) else QuantumState(np.asarray(b, dtype=complex), normalize=True)
    if b_state.dim != store.n:
        raise ValidationError(f"b has dimension {b_state.dim}, expected {store.n}")
    if not np.allclose(b_state.amplitudes.imag, 0.0, atol=1e-12):
        raise ValidationError("solver requires a real input vector")
    betas = spec.vectors.T @ b_state.amplitudes

    est_a = qsve_run(store, b_state, resolved.t, oracle=spec, path=resolved.path)
    shifted = a + resolved.mu * np.eye(store.n)
    spec_shifted = SpectralDecomposition(spec.eigenvalues + resolved.mu, spec.vectors)
    store_shifted = MatrixStore.from_dense(shifted)
    # the shifted matrix may acquire zero rows (eigenvalue at exactly -mu), so
    # this pass always runs on the spectral backend
    est_shifted = qsve_run(store_shifted, b_state, resolved.t, oracle=spec_shifted,
                           path="spectral")

    recovery = recover_signs(est_a, est_shifted, resolved.mu,
                             seed=resolved.seed, repetitions=resolved.median_repetitions)
    filt = FilterFunctions(resolved.kappa, resolved.gamma, kind=resolved.filter,
                           ramp=config.ramp)
    rotated = conditional_rotation(betas, recovery.lambda_hat, filt, vectors=spec.vectors)
    output, probability = post_select(rotated)

    truth = true_solution(a, b_state.amplitudes.real)
    overlap = complex(np.vdot(output.amplitudes, truth.amplitudes))
    distance = output.distance(truth)

    h_sq = 0.0
    for beta, lam_true, lam_hat in zip(betas, spec.eigenvalues, recovery.lambda_hat):
        h_true = np.sign(lam_true) * filt.h_vector(lam_true)
        h_est = np.sign(lam_hat) * filt.h_vector(lam_hat)
        h_sq += abs(beta) ** 2 * float(np.sum((h_est - h_true) ** 2))
    signs = [
        {
            "lambda_true": float(lam),
            "lambda_hat": float(lh),
            "flag": int(fl),
            "correct": bool((lam < 0) == (fl == 1)),
        }
        for lam, lh, fl in zip(spec.eigenvalues, recovery.lambda_hat, recovery.flags)
    ]
    return SolveReport(
        output_state=output,
        true_state=truth,
        fidelity=float(abs(overlap) ** 2),
        overlap_real=float(overlap.real),
        distance=float(distance),
        h_distance=float(math.sqrt(h_sq)),
        post_selection_probability=float(probability),
        repetitions_raw=float(1.0 / probability),
        repetitions_amplified=float(math.sqrt(1.0 / probability)),
        walk_applications=est_a.walk_applications + est_shifted.walk_applications,
        signs=signs,
        config=resolved,
        branch_probabilities=rotated.branch_probabilities(),
    )
