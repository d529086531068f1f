"""Exception hierarchy shared across the simulator.

The CLI maps these onto exit codes: ValidationError and its subclasses to 2,
DegenerateInputError and its subclasses to 3, ResourceLimitError to 4.
"""


class SimulatorError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SimulatorError, ValueError):
    """Input violates a documented precondition."""


class ParseError(ValidationError):
    """Malformed record in a matrix file; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class SpectralRangeError(ValidationError):
    """An eigenvalue falls outside the admissible band [-1, -1/kappa] u [1/kappa, 1]."""

    def __init__(self, eigenvalue: float, kappa: float):
        self.eigenvalue = eigenvalue
        self.kappa = kappa
        super().__init__(
            f"eigenvalue {eigenvalue:.12g} outside [-1, -1/{kappa:g}] u [1/{kappa:g}, 1]"
        )


class ConfigurationError(ValidationError):
    """Solver configuration is internally inconsistent (e.g. rotation scale too large)."""


class DegenerateInputError(SimulatorError):
    """Input is structurally degenerate rather than malformed."""


class DegenerateRowError(DegenerateInputError):
    """A requested row state is undefined because the row is all zeros."""

    def __init__(self, row: int):
        self.row = row
        super().__init__(f"row {row} has zero norm; its row state is undefined")


class DegenerateMatrixError(DegenerateInputError):
    """The whole matrix is zero, so norm-vector states are undefined."""


class SingularMatrixError(DegenerateInputError):
    """The system matrix is singular; no solution state exists."""


class IllConditionedError(DegenerateInputError):
    """All post-selection mass sits in the ill-conditioned branch (p ~ 0)."""


class ResourceLimitError(SimulatorError):
    """Requested simulation exceeds the configured memory/size guard."""


class StructuralMismatchError(SimulatorError):
    """An internal consistency check failed; indicates an implementation bug."""
