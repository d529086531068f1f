"""Normalized amplitude vectors over labeled registers."""
from __future__ import annotations

import numpy as np

from .errors import ValidationError

NORM_TOL = 1e-10


class QuantumState:
    """A unit-norm complex amplitude vector.

    ``dims`` records the tensor factorization of the flat amplitude array,
    e.g. ``(2**t, d)`` for an ancilla register of width t joined to a
    d-dimensional system register. A plain vector has ``dims = (d,)``.
    """

    __slots__ = ("amplitudes", "dims")

    def __init__(self, amplitudes, dims=None, *, normalize: bool = False):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if amps.size == 0:
            raise ValidationError("state must have at least one amplitude")
        if not (np.all(np.isfinite(amps.real)) and np.all(np.isfinite(amps.imag))):
            raise ValidationError("state amplitudes must be finite")
        nrm = np.linalg.norm(amps)
        if normalize:
            if nrm == 0.0:
                raise ValidationError("cannot normalize the zero vector")
            amps = amps / nrm
        elif abs(nrm - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm {nrm!r} deviates from 1 beyond {NORM_TOL}")
        self.amplitudes = amps
        self.dims = tuple(dims) if dims is not None else (amps.size,)
        if int(np.prod(self.dims)) != amps.size:
            raise ValidationError(f"dims {self.dims} do not match size {amps.size}")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def register_probabilities(self, axis: int) -> np.ndarray:
        """Marginal outcome distribution of one register."""
        probs = self.probabilities().reshape(self.dims)
        other = tuple(i for i in range(len(self.dims)) if i != axis)
        return probs.sum(axis=other) if other else probs

    def overlap(self, other: "QuantumState | np.ndarray") -> complex:
        amps = other.amplitudes if isinstance(other, QuantumState) else np.asarray(other, complex)
        if amps.size != self.dim:
            raise ValidationError("dimension mismatch in overlap")
        return complex(np.vdot(self.amplitudes, amps))

    def distance(self, other: "QuantumState | np.ndarray") -> float:
        amps = other.amplitudes if isinstance(other, QuantumState) else np.asarray(other, complex)
        return float(np.linalg.norm(self.amplitudes - amps.reshape(-1)))

    def __repr__(self) -> str:
        return f"QuantumState(dim={self.dim}, dims={self.dims})"
