"""Exact linear-algebra oracle: decomposition, dilation, direct solve."""
import numpy as np
import pytest

from qsvesim import (
    SingularMatrixError,
    ValidationError,
    decompose,
    hermitian_dilation,
    spectral_norm,
    true_solution,
)


def test_decompose_identity():
    spec = decompose(np.eye(2))
    np.testing.assert_allclose(spec.eigenvalues, [1.0, 1.0])
    assert spec.kappa == pytest.approx(1.0)


def test_decompose_signed_diagonal():
    spec = decompose(np.diag([1.0, -0.5]))
    np.testing.assert_allclose(spec.eigenvalues, [1.0, -0.5])
    np.testing.assert_allclose(spec.singular_values, [1.0, 0.5])
    assert spec.kappa == pytest.approx(2.0)


def test_decompose_orders_by_magnitude():
    spec = decompose(np.diag([0.3, -0.9, 0.5]))
    np.testing.assert_allclose(spec.eigenvalues, [-0.9, 0.5, 0.3])


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_decompose_reconstruction_and_orthonormality(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((6, 6))
    a = (a + a.T) / 2
    spec = decompose(a)
    assert np.max(np.abs(spec.reconstruct() - a)) < 1e-10
    gram = spec.vectors.T @ spec.vectors
    assert np.max(np.abs(gram - np.eye(6))) < 1e-10


@pytest.mark.parametrize("n", [2, 8, 16, 32])
def test_reconstruction_identity_up_to_32(n):
    rng = np.random.default_rng(n)
    a = rng.standard_normal((n, n))
    a = (a + a.T) / 2
    spec = decompose(a)
    assert np.max(np.abs(spec.reconstruct() - a)) < 1e-10


def test_decompose_sign_convention_is_deterministic():
    a = np.diag([2.0, 1.0])
    spec = decompose(a)
    for k in range(2):
        lead = np.argmax(np.abs(spec.vectors[:, k]))
        assert spec.vectors[lead, k] > 0


def test_decompose_rejects_asymmetric():
    with pytest.raises(ValidationError):
        decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_dilation_scalar():
    np.testing.assert_allclose(
        np.sort(np.linalg.eigvalsh(hermitian_dilation(np.array([[2.0]])))), [-2.0, 2.0]
    )


def test_dilation_identity():
    eig = np.sort(np.linalg.eigvalsh(hermitian_dilation(np.eye(2))))
    np.testing.assert_allclose(eig, [-1.0, -1.0, 1.0, 1.0], atol=1e-12)


def test_dilation_matches_svd_oracle():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((3, 2))
    svals = np.linalg.svd(a, compute_uv=False)
    expected = np.sort(np.concatenate([svals, -svals, [0.0]]))  # odd dimension adds a zero
    got = np.sort(np.linalg.eigvalsh(hermitian_dilation(a)))
    np.testing.assert_allclose(got, expected, atol=1e-10)


def test_true_solution_identity():
    state = true_solution(np.eye(2), np.array([1.0, 0.0]))
    np.testing.assert_allclose(state.amplitudes, [1.0, 0.0], atol=1e-12)


def test_true_solution_diagonal():
    b = np.array([1.0, 1.0]) / np.sqrt(2.0)
    state = true_solution(np.diag([1.0, 0.5]), b)
    expected = np.array([1.0, 2.0]) / np.sqrt(5.0)  # (1, 1/0.5) normalized by hand
    np.testing.assert_allclose(state.amplitudes, expected, atol=1e-12)


def test_true_solution_signed_diagonal():
    b = np.array([1.0, 1.0]) / np.sqrt(2.0)
    state = true_solution(np.diag([0.5, -0.5]), b)
    expected = np.array([1.0, -1.0]) / np.sqrt(2.0)
    np.testing.assert_allclose(state.amplitudes, expected, atol=1e-12)


def test_true_solution_singular_raises():
    with pytest.raises(SingularMatrixError):
        true_solution(np.diag([1.0, 0.0]), np.array([1.0, 1.0]))


def test_true_solution_zero_b_raises():
    with pytest.raises(ValidationError):
        true_solution(np.eye(2), np.zeros(2))


def test_spectral_norm_matches_svd():
    rng = np.random.default_rng(9)
    a = rng.standard_normal((4, 4))
    assert spectral_norm(a) == pytest.approx(np.linalg.svd(a, compute_uv=False)[0])
