"""Desk-scale simulator for a singular-value-estimation based linear solver.

The package follows the algorithm's own structure: a streaming amplitude
store over matrix entries, an exact spectral oracle, the two-reflection
walk operator, phase estimation (statevector circuit and closed-form
kernel), singular value estimation, and the sign-recovering filtered
inversion solver, plus a CLI harness for sweeps and verification.
"""

from .errors import (
    ConfigurationError,
    DegenerateInputError,
    DegenerateMatrixError,
    DegenerateRowError,
    IllConditionedError,
    ParseError,
    ResourceLimitError,
    SimulatorError,
    SingularMatrixError,
    SpectralRangeError,
    StructuralMismatchError,
    ValidationError,
)
from .generate import generate_matrix, top_eigenvector_b, uniform_b
from .matrix_store import (
    MatrixStore,
    ingest_stream,
    load_coordinate_file,
    load_dense_csv,
    load_matrix_file,
    parse_coordinate_stream,
)
from .phase_estimation import (
    PhaseErrorBound,
    PhaseEstimateDistribution,
    ancilla_bits_for,
    nominal_delta,
    outcome_distribution,
    phase_error_bound,
    phase_grid,
    qpe_exact_spectral,
    qpe_statevector,
)
from .qsve import (
    ComponentEstimate,
    QsveAudit,
    QsveOutput,
    qsve_error_audit,
    qsve_run,
    sample_sigma_estimates,
    uncompute_check,
)
from .solver import (
    FilterFunctions,
    ResolvedConfig,
    RotatedState,
    SignRecovery,
    SolveReport,
    SolverConfig,
    conditional_rotation,
    post_select,
    recover_signs,
    sample_branch_frequencies,
    sign_flag,
    solve,
    spectrum_normalize,
)
from .spectral import (
    SpectralDecomposition,
    decompose,
    hermitian_dilation,
    spectral_norm,
    true_solution,
)
from .state import QuantumState
from .sweep import ExperimentSpec, run_sweep
from .walk import (
    IsometryPair,
    WalkAngleReport,
    WalkUnitary,
    build_isometries,
    build_walk,
    plane_branch_weights,
    walk_angles,
)

__version__ = "0.1.0"

__all__ = [
    "ComponentEstimate",
    "ConfigurationError",
    "DegenerateInputError",
    "DegenerateMatrixError",
    "DegenerateRowError",
    "ExperimentSpec",
    "FilterFunctions",
    "IllConditionedError",
    "IsometryPair",
    "MatrixStore",
    "ParseError",
    "PhaseErrorBound",
    "PhaseEstimateDistribution",
    "QsveAudit",
    "QsveOutput",
    "QuantumState",
    "ResolvedConfig",
    "ResourceLimitError",
    "RotatedState",
    "SignRecovery",
    "SimulatorError",
    "SingularMatrixError",
    "SolveReport",
    "SolverConfig",
    "SpectralDecomposition",
    "SpectralRangeError",
    "StructuralMismatchError",
    "ValidationError",
    "WalkAngleReport",
    "WalkUnitary",
    "ancilla_bits_for",
    "build_isometries",
    "build_walk",
    "conditional_rotation",
    "decompose",
    "generate_matrix",
    "hermitian_dilation",
    "ingest_stream",
    "load_coordinate_file",
    "load_dense_csv",
    "load_matrix_file",
    "nominal_delta",
    "outcome_distribution",
    "parse_coordinate_stream",
    "phase_error_bound",
    "phase_grid",
    "plane_branch_weights",
    "post_select",
    "qpe_exact_spectral",
    "qpe_statevector",
    "qsve_error_audit",
    "qsve_run",
    "recover_signs",
    "run_sweep",
    "sample_branch_frequencies",
    "sample_sigma_estimates",
    "sign_flag",
    "solve",
    "spectral_norm",
    "spectrum_normalize",
    "top_eigenvector_b",
    "true_solution",
    "uncompute_check",
    "uniform_b",
    "walk_angles",
]
