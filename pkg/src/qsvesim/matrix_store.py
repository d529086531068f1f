"""Streaming amplitude store for matrix entries.

Entries of a real m x n matrix arrive in arbitrary order. Each row owns a
complete binary tree (padded to a power of two) whose leaf j holds A_ij**2
together with sign(A_ij); every internal node holds the sum of its subtree,
so the root of row tree i is the squared row norm. A second tree over the m
squared row norms makes the squared Frobenius norm the root of the forest.

This layout supports two queries in one tree traversal each:

* ``row_state(i)``: amplitudes A_ij / ||A_i|| over the column basis,
* ``norm_vector_state()``: amplitudes ||A_i|| / ||A||_F over the row basis,

and keeps per-update cost bounded by the two leaf-to-root path lengths,
which the ``touched_nodes`` counter tracks.

Trees are stored as 1-indexed heaps: node k has children 2k and 2k+1,
leaves live at [capacity, 2*capacity). Updates recompute each ancestor from
its children, so internal consistency is exact up to float rounding.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateMatrixError,
    DegenerateRowError,
    ParseError,
    ValidationError,
)
from .state import QuantumState


def _next_pow2(x: int) -> int:
    return 1 << max(0, (x - 1).bit_length())


class MatrixStore:
    """Binary-tree amplitude store over the entries of a real m x n matrix."""

    def __init__(self, m: int, n: int):
        if m < 1 or n < 1:
            raise ValidationError(f"dimensions must be positive, got {m}x{n}")
        self.m = m
        self.n = n
        self._row_cap = _next_pow2(n)
        self._norm_cap = _next_pow2(m)
        # row_trees[i] is the heap of row i; norm_tree the heap over row norms
        self.row_trees = np.zeros((m, 2 * self._row_cap))
        self.norm_tree = np.zeros(2 * self._norm_cap)
        self.signs = np.zeros((m, n), dtype=np.int8)
        self.update_count = 0
        self.touched_nodes = 0

    @classmethod
    def from_entries(cls, m: int, n: int, entries: Iterable[tuple[int, int, float]]) -> "MatrixStore":
        store = cls(m, n)
        for rec in entries:
            if len(rec) != 3:
                raise ValidationError(f"entry record must be (i, j, value), got {rec!r}")
            store.store_entry(int(rec[0]), int(rec[1]), float(rec[2]))
        return store

    @classmethod
    def from_dense(cls, matrix: np.ndarray) -> "MatrixStore":
        if np.iscomplexobj(matrix):
            raise ValidationError("only real entries are supported")
        a = np.asarray(matrix, dtype=float)
        if a.ndim != 2:
            raise ValidationError("dense input must be a 2-D array")
        store = cls(a.shape[0], a.shape[1])
        for i in range(a.shape[0]):
            for j in range(a.shape[1]):
                if a[i, j] != 0.0:
                    store.store_entry(i, j, a[i, j])
        return store

    # -- updates ---------------------------------------------------------

    def store_entry(self, i: int, j: int, value: float) -> "MatrixStore":
        """Insert or overwrite entry (i, j). Last write wins."""
        if not (0 <= i < self.m and 0 <= j < self.n):
            raise IndexError(f"entry ({i}, {j}) out of range for {self.m}x{self.n} store")
        if isinstance(value, complex) or np.iscomplexobj(value):
            raise ValidationError("only real entries are supported")
        value = float(value)
        if not math.isfinite(value):
            raise ValidationError(f"entry ({i}, {j}) must be finite, got {value!r}")
        self.signs[i, j] = np.sign(value)
        self.touched_nodes += self._set_leaf(self.row_trees[i], self._row_cap, j, value * value)
        self.touched_nodes += self._set_leaf(
            self.norm_tree, self._norm_cap, i, self.row_trees[i][1]
        )
        self.update_count += 1
        return self

    @staticmethod
    def _set_leaf(heap: np.ndarray, cap: int, idx: int, value: float) -> int:
        node = cap + idx
        heap[node] = value
        touched = 1
        node >>= 1
        while node >= 1:
            heap[node] = heap[2 * node] + heap[2 * node + 1]
            touched += 1
            node >>= 1
        return touched

    @property
    def path_bound(self) -> int:
        """Per-update touched-node bound: ceil(log2 n) + ceil(log2 m) + 2."""
        return int(math.log2(self._row_cap)) + int(math.log2(self._norm_cap)) + 2

    # -- queries ---------------------------------------------------------

    @property
    def frob_sq(self) -> float:
        return float(self.norm_tree[1])

    def frobenius_norm(self) -> float:
        return math.sqrt(self.frob_sq)

    def row_norm_sq(self, i: int) -> float:
        if not 0 <= i < self.m:
            raise IndexError(f"row {i} out of range")
        return float(self.row_trees[i][1])

    def row_state(self, i: int) -> QuantumState:
        """Unit state over columns with amplitude A_ij / ||A_i||."""
        norm_sq = self.row_norm_sq(i)
        if norm_sq == 0.0:
            raise DegenerateRowError(i)
        leaves = self.row_trees[i][self._row_cap : self._row_cap + self.n]
        amps = self.signs[i] * np.sqrt(leaves) / math.sqrt(norm_sq)
        return QuantumState(amps, dims=(self.n,), normalize=True)

    def norm_vector_state(self) -> QuantumState:
        """Unit state over rows with amplitude ||A_i|| / ||A||_F."""
        if self.frob_sq == 0.0:
            raise DegenerateMatrixError("all-zero matrix has no norm-vector state")
        leaves = self.norm_tree[self._norm_cap : self._norm_cap + self.m]
        amps = np.sqrt(leaves / self.frob_sq)
        return QuantumState(amps, dims=(self.m,), normalize=True)

    def to_dense(self) -> np.ndarray:
        """Reconstruct the stored matrix as sign * sqrt(leaf)."""
        leaves = self.row_trees[:, self._row_cap : self._row_cap + self.n]
        return self.signs * np.sqrt(leaves)

    def zero_rows(self) -> list[int]:
        return [i for i in range(self.m) if self.row_trees[i][1] == 0.0]

    # -- verification ----------------------------------------------------

    def check_consistency(self, rel_tol: float = 1e-12) -> float:
        """Return the worst relative parent-vs-children mismatch over both trees."""
        worst = 0.0
        for heap, cap in [(self.norm_tree, self._norm_cap)] + [
            (self.row_trees[i], self._row_cap) for i in range(self.m)
        ]:
            for node in range(1, cap):
                expect = heap[2 * node] + heap[2 * node + 1]
                err = abs(heap[node] - expect) / max(1.0, abs(heap[node]))
                worst = max(worst, err)
        if worst > rel_tol:
            raise ValidationError(f"tree consistency violated: relative error {worst:.3e}")
        return worst

    def __repr__(self) -> str:
        return (
            f"MatrixStore(m={self.m}, n={self.n}, frob_sq={self.frob_sq:.6g}, "
            f"updates={self.update_count})"
        )


# -- file ingestion -------------------------------------------------------


def parse_coordinate_stream(lines: Iterable[str]) -> list[tuple[int, int, float]]:
    """Parse `i j value` triples, one per line; `#` starts a comment."""
    records = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        if len(parts) != 3:
            raise ParseError(lineno, f"expected `i j value`, got {len(parts)} fields")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(lineno, f"indices must be integers, got {parts[0]!r} {parts[1]!r}")
        try:
            value = float(parts[2])
        except ValueError:
            raise ParseError(lineno, f"value must be a real number, got {parts[2]!r}")
        if i < 0 or j < 0:
            raise ParseError(lineno, f"indices must be nonnegative, got ({i}, {j})")
        if not math.isfinite(value):
            raise ParseError(lineno, f"value must be finite, got {value!r}")
        records.append((i, j, value))
    return records


def ingest_stream(
    records: Sequence[tuple[int, int, float]],
    m: int | None = None,
    n: int | None = None,
) -> MatrixStore:
    """Build a store from (i, j, value) records; dimensions inferred if omitted."""
    records = list(records)
    if m is None or n is None:
        if not records:
            raise ValidationError("cannot infer dimensions from an empty stream")
        m = m if m is not None else max(r[0] for r in records) + 1
        n = n if n is not None else max(r[1] for r in records) + 1
    for lineno, (i, j, _) in enumerate(records, start=1):
        if not (0 <= i < m and 0 <= j < n):
            raise ParseError(lineno, f"entry ({i}, {j}) out of range for {m}x{n}")
    return MatrixStore.from_entries(m, n, records)


def load_coordinate_file(path, m: int | None = None, n: int | None = None) -> MatrixStore:
    with open(path, "r", encoding="utf-8") as fh:
        records = parse_coordinate_stream(fh)
    return ingest_stream(records, m=m, n=n)


def load_dense_csv(path) -> MatrixStore:
    """Load a dense comma-separated matrix (one row per line)."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                row = [float(tok) for tok in text.split(",")]
            except ValueError:
                raise ParseError(lineno, f"could not parse CSV row {text!r}")
            rows.append((lineno, row))
    if not rows:
        raise ValidationError("CSV file contains no rows")
    width = len(rows[0][1])
    for lineno, row in rows:
        if len(row) != width:
            raise ParseError(lineno, f"expected {width} columns, got {len(row)}")
    return MatrixStore.from_dense(np.array([r for _, r in rows]))


def load_matrix_file(path, fmt: str | None = None) -> MatrixStore:
    """Dispatch on format: `coo` for index triples, `csv` for dense rows."""
    name = str(path)
    if fmt is None:
        fmt = "csv" if name.endswith(".csv") else "coo"
    if fmt == "csv":
        return load_dense_csv(path)
    if fmt == "coo":
        return load_coordinate_file(path)
    raise ValidationError(f"unknown matrix format {fmt!r} (expected `coo` or `csv`)")
