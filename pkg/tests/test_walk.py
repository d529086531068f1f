"""Isometries, walk unitary, and the rotation-angle law."""
import numpy as np
import pytest

from qsvesim import (
    DegenerateRowError,
    MatrixStore,
    build_isometries,
    build_walk,
    decompose,
    generate_matrix,
    plane_branch_weights,
    walk_angles,
)


def _store(a):
    return MatrixStore.from_dense(np.asarray(a, dtype=float))


def test_factorization_identity_on_identity_matrix():
    iso = build_isometries(_store(np.eye(2)))
    product = iso.row_isometry.T @ iso.norm_isometry
    np.testing.assert_allclose(product, np.eye(2) / np.sqrt(2.0), atol=1e-14)


def test_factorization_entry_three_four_matrix():
    a = np.array([[3.0, 4.0], [0.0, 1.0]])
    iso = build_isometries(_store(a))
    product = iso.row_isometry.T @ iso.norm_isometry
    assert product[0, 0] == pytest.approx(3.0 / np.sqrt(26.0), abs=1e-14)


@pytest.mark.parametrize("seed", range(6))
def test_factorization_identity_random(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    a = rng.standard_normal((n, n))
    store = _store(a)
    iso = build_isometries(store)
    assert iso.factorization_residual(a) < 1e-12
    rm, rn = iso.orthonormality_residuals()
    assert rm < 1e-12 and rn < 1e-12


def test_zero_row_rejected():
    with pytest.raises(DegenerateRowError):
        build_isometries(_store([[1.0, 0.0], [0.0, 0.0]]))


def test_walk_one_by_one_is_identity():
    walk = build_walk(build_isometries(_store([[1.0]])))
    np.testing.assert_allclose(walk.matrix, [[1.0]], atol=1e-15)


def test_walk_identity_matrix_eigenphases():
    walk = build_walk(build_isometries(_store(np.eye(2))))
    phases = np.sort(np.angle(np.linalg.eigvals(walk.matrix)))
    # cos(theta/2) = 1/sqrt(2) forces theta = pi/2 for both singular values
    np.testing.assert_allclose(phases, [-np.pi / 2, -np.pi / 2, np.pi / 2, np.pi / 2], atol=1e-9)


def test_walk_orthogonality_random():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((3, 3))
    walk = build_walk(build_isometries(_store(a)))
    assert walk.orthogonality_residual() < 1e-12


def test_walk_angles_identity_matrix():
    a = np.eye(2)
    walk = build_walk(build_isometries(_store(a)))
    report = walk_angles(walk, decompose(a))
    for _, theta in report.pairs:
        assert theta == pytest.approx(np.pi / 2, abs=1e-12)


def test_walk_angles_diagonal_cross_checked_against_eig():
    a = np.diag([1.0, 0.5])
    store = _store(a)
    walk = build_walk(build_isometries(store))
    report = walk_angles(walk, decompose(a))
    frob = np.sqrt(1.25)
    expected = sorted([2 * np.arccos(1.0 / frob), 2 * np.arccos(0.5 / frob)])
    got = sorted(theta for _, theta in report.pairs)
    np.testing.assert_allclose(got, expected, atol=1e-9)
    # independent eigenphase cross-check on the full walk matrix
    eig_phases = np.angle(np.linalg.eigvals(walk.matrix))
    for theta in expected:
        assert np.min(np.abs(eig_phases - theta)) < 1e-9


def test_rank_one_angle_is_zero_and_fixed():
    a = generate_matrix("rank-one", 3, seed=4)
    store = _store(a)
    walk = build_walk(build_isometries(store))
    spec = decompose(a)
    report = walk_angles(walk, spec)
    assert len(report.pairs) == 1
    sigma, theta = report.pairs[0]
    assert sigma == pytest.approx(store.frobenius_norm(), rel=1e-12)
    assert theta == pytest.approx(0.0, abs=1e-7)
    cv = walk.isometries.norm_isometry @ spec.vectors[:, 0]
    np.testing.assert_allclose(walk.matrix @ cv, cv, atol=1e-10)
    assert report.skipped_zero == [1, 2]


@pytest.mark.parametrize("n", [2, 4, 8])
def test_cosine_identity_random(n):
    rng = np.random.default_rng(n + 10)
    a = rng.standard_normal((n, n))
    a = (a + a.T) / 2
    store = _store(a)
    iso = build_isometries(store)
    walk = build_walk(iso)
    spec = decompose(a)
    for k in range(n):
        sigma = spec.singular_values[k]
        v = spec.vectors[:, k]
        cv = iso.norm_isometry @ v
        lhs = cv @ (walk.matrix @ cv)
        assert abs(lhs - (2 * sigma**2 / iso.frob**2 - 1)) < 1e-10


@pytest.mark.parametrize("seed", range(4))
def test_eigenphase_multiset_matches(seed):
    rng = np.random.default_rng(seed + 50)
    n = int(rng.integers(2, 6))
    a = rng.standard_normal((n, n))
    a = (a + a.T) / 2
    walk = build_walk(build_isometries(_store(a)))
    report = walk_angles(walk, decompose(a))
    assert report.max_phase_mismatch < 1e-9


def test_branch_weights_sum_to_one():
    rng = np.random.default_rng(8)
    a = rng.standard_normal((4, 4))
    a = (a + a.T) / 2
    walk = build_walk(build_isometries(_store(a)))
    spec = decompose(a)
    for k in range(4):
        wp, wm = plane_branch_weights(walk, spec, k)
        assert abs(abs(wp) ** 2 + abs(wm) ** 2 - 1.0) < 1e-12


def test_mixed_sign_equal_sigma_subspace_is_invariant():
    # both eigenvalues have magnitude 0.5: per-plane vectors stay well defined
    # and the combined invariant subspace carries the doubled phase pair
    a = np.diag([0.5, -0.5])
    walk = build_walk(build_isometries(_store(a)))
    report = walk_angles(walk, decompose(a))
    thetas = sorted(theta for _, theta in report.pairs)
    assert thetas == pytest.approx([np.pi / 2, np.pi / 2], abs=1e-12)
    assert report.max_phase_mismatch < 1e-9


def test_application_counter_is_per_instance():
    walk_a = build_walk(build_isometries(_store(np.eye(2))))
    walk_b = build_walk(build_isometries(_store(np.eye(2))))
    walk_a.apply(np.zeros(4))
    assert walk_a.application_count == 1
    assert walk_b.application_count == 0


@pytest.mark.parametrize("seed", range(3))
def test_invariant_planes_stay_invariant(seed):
    rng = np.random.default_rng(seed + 70)
    n = int(rng.integers(2, 6))
    a = rng.standard_normal((n, n))
    a = (a + a.T) / 2
    iso = build_isometries(_store(a))
    walk = build_walk(iso)
    spec = decompose(a)
    for k in range(n):
        lam = spec.eigenvalues[k]
        if abs(lam) < 1e-12:
            continue
        v = spec.vectors[:, k]
        u = v if lam >= 0 else -v
        plane = np.column_stack([iso.norm_isometry @ v, iso.row_isometry @ u])
        basis, _ = np.linalg.qr(plane)
        rotated = walk.matrix @ basis
        # projection back onto the plane must lose nothing
        residual = rotated - basis @ (basis.T @ rotated)
        assert np.max(np.abs(residual)) < 1e-10


@pytest.mark.parametrize("eps", [0.0, 1e-13, 1e-10, 1e-7, 1e-4])
def test_near_rank_one_spectra_stay_matchable(eps):
    # the plane of a dominant singular value collapses as the matrix
    # approaches rank one; matching must survive the whole approach
    v = np.array([3.0, 4.0, 12.0])
    v = v / np.linalg.norm(v)
    a = np.outer(v, v) + eps * np.diag([1.0, -1.0, 0.5])
    a = (a + a.T) / 2
    walk = build_walk(build_isometries(_store(a)))
    report = walk_angles(walk, decompose(a))
    assert report.max_phase_mismatch < 1e-9
