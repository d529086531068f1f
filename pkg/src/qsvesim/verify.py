"""Self-contained invariant suite behind the `verify` subcommand.

Each check re-derives its expectation from scratch (dense oracles, explicit
kernel sums, dict-based replay of entry streams) so a pass means two
independent routes agreed, not that one implementation agreed with itself.
"""
from __future__ import annotations

import numpy as np

from .generate import generate_matrix, uniform_b
from .matrix_store import MatrixStore, ingest_stream
from .phase_estimation import (
    ancilla_bits_for,
    outcome_distribution,
    phase_grid,
    qpe_statevector,
)
from .qsve import qsve_run
from .solver import FilterFunctions, SolverConfig, sign_flag, solve
from .spectral import decompose, hermitian_dilation
from .state import QuantumState
from .walk import build_isometries, build_walk, walk_angles


def _check_store_stream(rng) -> tuple[bool, str]:
    m, n = 5, 7
    entries = [(int(rng.integers(m)), int(rng.integers(n)), float(rng.standard_normal()))
               for _ in range(60)]
    store = ingest_stream(entries, m, n)
    # dict replay is the independent oracle for last-write-wins semantics
    replay: dict[tuple[int, int], float] = {}
    for i, j, v in entries:
        replay[(i, j)] = v
    dense = np.zeros((m, n))
    for (i, j), v in replay.items():
        dense[i, j] = v
    same_order = np.max(np.abs(store.to_dense() - dense))
    store.check_consistency()
    ok = same_order < 1e-15 and abs(store.frob_sq - np.sum(dense**2)) < 1e-12 * max(1, np.sum(dense**2))
    return ok, f"reconstruction error {same_order:.2e}"


def _check_store_path_bound(rng) -> tuple[bool, str]:
    store = MatrixStore(6, 9)
    before = store.touched_nodes
    store.store_entry(3, 5, 1.25)
    touched = store.touched_nodes - before
    return touched <= store.path_bound, f"touched {touched} <= bound {store.path_bound}"


def _check_isometries(rng) -> tuple[bool, str]:
    worst = 0.0
    for trial in range(5):
        n = int(rng.integers(2, 7))
        a = rng.standard_normal((n, n))
        a = (a + a.T) / 2
        store = MatrixStore.from_dense(a)
        iso = build_isometries(store)
        rm, rn = iso.orthonormality_residuals()
        worst = max(worst, rm, rn, iso.factorization_residual(a))
    return worst < 1e-12, f"max residual {worst:.2e}"


def _check_walk_angles(rng) -> tuple[bool, str]:
    worst = 0.0
    for trial in range(5):
        n = int(rng.integers(2, 6))
        a = rng.standard_normal((n, n))
        a = (a + a.T) / 2
        store = MatrixStore.from_dense(a)
        walk = build_walk(build_isometries(store))
        report = walk_angles(walk, decompose(a))
        worst = max(worst, report.max_rotation_residual, report.max_cos_residual,
                    report.max_phase_mismatch)
    return worst < 1e-9, f"max residual {worst:.2e}"


def _check_dilation(rng) -> tuple[bool, str]:
    a = rng.standard_normal((3, 2))
    dil = hermitian_dilation(a)
    svals = np.linalg.svd(a, compute_uv=False)
    # a rectangular dilation also carries |m - n| zero eigenvalues
    expected = np.sort(np.concatenate([svals, -svals, np.zeros(abs(a.shape[0] - a.shape[1]))]))
    got = np.sort(np.linalg.eigvalsh(dil))
    err = np.max(np.abs(expected - got))
    return err < 1e-10, f"spectrum error {err:.2e}"


def _check_qpe_dual_path(rng) -> tuple[bool, str]:
    worst = 0.0
    for trial in range(4):
        d, t = 4, 5
        q, _ = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
        phases = rng.uniform(-np.pi, np.pi, d)
        u = (q * np.exp(1j * phases)) @ q.conj().T
        vec = QuantumState(rng.standard_normal(d) + 1j * rng.standard_normal(d), normalize=True)
        joint = qpe_statevector(u, vec, t)
        marginal = joint.register_probabilities(0)
        weights = np.abs(q.conj().T @ vec.amplitudes) ** 2
        expected = weights @ np.stack([outcome_distribution(th, t) for th in phases])
        worst = max(worst, 0.5 * float(np.sum(np.abs(marginal - expected))))
    return worst < 1e-9, f"max TV distance {worst:.2e}"


def _check_phase_confidence(rng) -> tuple[bool, str]:
    t = 6
    n = 1 << t
    grid = 2 * np.pi / n
    worst = 1.0
    for frac in np.linspace(0, 0.5, 51):
        probs = outcome_distribution(frac * grid, t)
        diff = np.angle(np.exp(1j * (phase_grid(t) - frac * grid)))
        worst = min(worst, probs[np.abs(diff) <= grid * (1 + 1e-12)].sum())
    return worst >= 8 / np.pi**2 - 1e-12, f"min two-bin mass {worst:.6f} >= {8/np.pi**2:.6f}"


def _check_filter_profile(rng) -> tuple[bool, str]:
    worst = 0.0
    for kappa in (2.0, 4.0, 8.0):
        filt = FilterFunctions(kappa, 1 / (2 * kappa), kind="full-fgh")
        worst = max(worst, filt.grid_check(2000))
    return worst <= 1.0 + 1e-12, f"max f^2+g^2 = {worst:.6f}"


def _check_lipschitz(rng) -> tuple[bool, str]:
    worst_ratio = 0.0
    for kappa in (2.0, 4.0, 8.0):
        filt = FilterFunctions(kappa, 1 / (2 * kappa), kind="full-fgh")
        lo = 1 / (2 * kappa)
        for _ in range(2000):
            l1, l2 = (float(rng.choice([-1, 1]) * rng.uniform(lo, 1.0)) for _ in range(2))
            if l1 == l2:
                continue
            dist = np.linalg.norm(filt.h_vector(l1) - filt.h_vector(l2))
            worst_ratio = max(worst_ratio, dist / (kappa * abs(l1 - l2)))
    return worst_ratio <= np.pi / 2, f"max Lipschitz ratio/kappa {worst_ratio:.4f} <= {np.pi/2:.4f}"


def _check_sign_rule(rng) -> tuple[bool, str]:
    failures = 0
    for kappa in (2.0, 4.0, 8.0):
        mu = 1 / kappa
        lams = np.concatenate([np.linspace(1 / kappa, 1, 25), -np.linspace(1 / kappa, 1, 25)])
        errs = np.linspace(-mu / 2 * 0.999, mu / 2 * 0.999, 7)
        for lam in lams:
            for eb in errs:
                for ec in errs:
                    flag = sign_flag(abs(lam) + eb, abs(lam + mu) + ec)
                    if (lam < 0) != (flag == 1):
                        failures += 1
    return failures == 0, f"{failures} sign failures with error < mu/2"


def _check_solve_fixture(rng) -> tuple[bool, str]:
    store = MatrixStore.from_dense(np.diag([0.5, -0.5]))
    report = solve(store, np.array([1.0, 1.0]) / np.sqrt(2),
                   SolverConfig(kappa=2.0, epsilon=0.05, seed=11))
    target = np.array([1.0, -1.0]) / np.sqrt(2)
    dist = min(np.linalg.norm(report.output_state.amplitudes - target),
               np.linalg.norm(report.output_state.amplitudes + target))
    return dist <= 0.05, f"distance to (1,-1)/sqrt(2): {dist:.2e}"


def _check_query_accounting(rng) -> tuple[bool, str]:
    a = generate_matrix("random-symmetric", 3, 3.0, seed=5)
    store = MatrixStore.from_dense(a)
    report = solve(store, uniform_b(3), SolverConfig(kappa=3.0, t=7, seed=3))
    expected = 2 * ((1 << 7) - 1)
    return report.walk_applications == expected, (
        f"walk applications {report.walk_applications} == {expected}"
    )


def _check_qsve_guarantee(rng) -> tuple[bool, str]:
    a = generate_matrix("random-symmetric", 4, 4.0, seed=9)
    store = MatrixStore.from_dense(a)
    delta = 0.02
    out = qsve_run(store, uniform_b(4), ancilla_bits_for(delta), oracle=decompose(a))
    sig = out.sigma_values()
    masses = [c.mass_within(sig, delta * out.frobenius_norm) for c in out.components]
    ok = min(masses) >= 8 / np.pi**2 - 1e-9
    return ok, f"min in-budget mass {min(masses):.4f}"


CHECKS = [
    ("store stream ingestion", _check_store_stream),
    ("store update path bound", _check_store_path_bound),
    ("isometry factorization", _check_isometries),
    ("walk rotation angles", _check_walk_angles),
    ("hermitian dilation spectrum", _check_dilation),
    ("phase estimation dual path", _check_qpe_dual_path),
    ("phase confidence floor", _check_phase_confidence),
    ("filter amplitude profile", _check_filter_profile),
    ("filter Lipschitz bound", _check_lipschitz),
    ("sign recovery rule", _check_sign_rule),
    ("estimation accuracy budget", _check_qsve_guarantee),
    ("solver sign fixture", _check_solve_fixture),
    ("query accounting", _check_query_accounting),
]


def run_verification(seed: int = 0, stream=None) -> bool:
    """Run all checks, print one line per check, return overall success."""
    import sys

    stream = stream or sys.stdout
    all_ok = True
    for index, (name, fn) in enumerate(CHECKS):
        rng = np.random.default_rng([seed, index])
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        all_ok &= ok
        stream.write(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}\n")
    return all_ok
