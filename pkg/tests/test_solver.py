"""Filters, sign recovery, rotation, post-selection, and the full solve."""
import json

import numpy as np
import pytest

from qsvesim import (
    ConfigurationError,
    FilterFunctions,
    IllConditionedError,
    MatrixStore,
    SingularMatrixError,
    SolverConfig,
    SpectralRangeError,
    ValidationError,
    conditional_rotation,
    decompose,
    generate_matrix,
    post_select,
    qsve_run,
    recover_signs,
    sample_branch_frequencies,
    sign_flag,
    solve,
    spectrum_normalize,
    uniform_b,
)


def _store(a):
    return MatrixStore.from_dense(np.asarray(a, dtype=float))


# -- filter functions ---------------------------------------------------------


def test_filter_breakpoints_and_plateaus():
    kappa = 4.0
    filt = FilterFunctions(kappa, 1 / (2 * kappa), kind="full-fgh")
    lo, hi = filt.breakpoints
    assert (lo, hi) == (1 / 8, 1 / 4)
    for lam in np.linspace(0.01, lo, 20):
        assert filt.f(lam) == 0.0
        assert filt.g(lam) == pytest.approx(0.5)
    for lam in np.linspace(hi, 1.0, 20):
        assert filt.g(lam) == 0.0
        assert filt.f(lam) == pytest.approx(1 / (2 * kappa) / lam)


def test_filter_is_even():
    filt = FilterFunctions(4.0, 1 / 8, kind="full-fgh")
    for lam in (0.1, 0.2, 0.7):
        np.testing.assert_allclose(filt.h_vector(lam), filt.h_vector(-lam))


def test_filter_continuity_at_breakpoints():
    kappa = 4.0
    filt = FilterFunctions(kappa, 1 / (2 * kappa), kind="full-fgh")
    for point in filt.breakpoints:
        below = filt.h_vector(point - 1e-12)
        above = filt.h_vector(point + 1e-12)
        np.testing.assert_allclose(below, above, atol=1e-9)


def test_filter_half_breakpoint_amplitudes():
    kappa = 4.0
    filt = FilterFunctions(kappa, 1 / (2 * kappa), kind="full-fgh")
    h = filt.h_vector(1 / (2 * kappa))
    assert h[1] == pytest.approx(0.0, abs=1e-15)          # no inversion yet
    assert h[2] == pytest.approx(0.5, abs=1e-15)          # ill-conditioned flag
    assert h[0] == pytest.approx(np.sqrt(3) / 2, abs=1e-15)


def test_filter_monotone_on_ramp():
    kappa = 4.0
    filt = FilterFunctions(kappa, 1 / (2 * kappa), kind="full-fgh")
    lo, hi = filt.breakpoints
    grid = np.linspace(lo, hi, 500)
    fs = [filt.f(x) for x in grid]
    gs = [filt.g(x) for x in grid]
    assert np.all(np.diff(fs) >= -1e-15)
    assert np.all(np.diff(gs) <= 1e-15)


@pytest.mark.parametrize("kappa", [2.0, 4.0, 8.0])
def test_filter_amplitude_budget_dense_grid(kappa):
    filt = FilterFunctions(kappa, 1 / (2 * kappa), kind="full-fgh")
    assert filt.grid_check(10_000) <= 1.0 + 1e-12


@pytest.mark.parametrize("kappa", [2.0, 4.0, 8.0])
def test_filter_lipschitz_bound(kappa):
    filt = FilterFunctions(kappa, 1 / (2 * kappa), kind="full-fgh")
    rng = np.random.default_rng(int(kappa))
    lo = 1 / (2 * kappa)
    signs = rng.choice([-1.0, 1.0], size=(10_000, 2))
    mags = rng.uniform(lo, 1.0, size=(10_000, 2))
    lams = signs * mags
    for l1, l2 in lams:
        if l1 == l2:
            continue
        dist = np.linalg.norm(filt.h_vector(l1) - filt.h_vector(l2))
        assert dist <= (np.pi / 2) * kappa * abs(l1 - l2)


def test_invert_only_amplitudes():
    gamma = 0.125
    filt = FilterFunctions(4.0, gamma, kind="invert-only")
    h_at_gamma = filt.h_vector(gamma)
    assert h_at_gamma[1] == pytest.approx(1.0)
    assert h_at_gamma[0] == pytest.approx(0.0, abs=1e-12)
    assert filt.h_vector(2 * gamma)[1] == pytest.approx(0.5)


def test_invert_only_rejects_estimate_below_gamma():
    filt = FilterFunctions(4.0, 0.125, kind="invert-only")
    with pytest.raises(ConfigurationError):
        filt.h_vector(0.1)


def test_filter_rejects_oversized_gamma():
    with pytest.raises(ConfigurationError):
        FilterFunctions(4.0, 0.3, kind="full-fgh")  # gamma * kappa = 1.2


# -- sign recovery ------------------------------------------------------------


def test_sign_flag_trivial_cases():
    # lambda = 0.5, mu = 0.5: |0.5| < |1.0| so positive
    assert sign_flag(0.5, 1.0) == 0
    # lambda = -0.5, mu = 0.5: |-0.5| > |0| so negative
    assert sign_flag(0.5, 0.0) == 1


@pytest.mark.parametrize("kappa", [2.0, 4.0, 8.0])
def test_sign_rule_sound_when_errors_below_half_mu(kappa):
    mu = 1.0 / kappa
    lams = np.concatenate(
        [np.linspace(1 / kappa, 1.0, 40), -np.linspace(1 / kappa, 1.0, 40)]
    )
    errors = np.linspace(-mu / 2 * 0.999, mu / 2 * 0.999, 9)
    for lam in lams:
        for eb in errors:
            for ec in errors:
                value_b = abs(lam) + eb
                value_c = abs(lam + mu) + ec
                flag = sign_flag(value_b, value_c)
                assert (flag == 1) == (lam < 0), (lam, eb, ec)


def test_paper_shift_misclassifies_inner_negative_band():
    # mu = 4/kappa declares lambda in (-2/kappa, -1/kappa] positive even with
    # perfect estimates; outside that band it still works
    kappa = 4.0
    mu = 4.0 / kappa
    wrong, right = [], []
    for lam in np.linspace(-1.0, -1 / kappa, 200):
        flag = sign_flag(abs(lam), abs(lam + mu))
        (right if (flag == 1) == (lam < 0) else wrong).append(lam)
    assert wrong, "expected a nonempty misclassification band"
    assert max(wrong) == pytest.approx(-1 / kappa, abs=1e-2)
    assert all(lam > -2 / kappa for lam in wrong)
    assert all(lam <= -2 / kappa for lam in right)


def test_recover_signs_on_mixed_sign_fixture_every_seed():
    a = np.diag([0.5, -0.5])
    kappa, mu = 2.0, 0.5
    store = _store(a)
    spec = decompose(a)
    from qsvesim import SpectralDecomposition

    shifted_spec = SpectralDecomposition(spec.eigenvalues + mu, spec.vectors)
    b = uniform_b(2)
    t = 9
    est_a = qsve_run(store, b, t, oracle=spec)
    est_shift = qsve_run(_store(a + mu * np.eye(2)), b, t, oracle=shifted_spec)
    for seed in range(50):
        rec = recover_signs(est_a, est_shift, mu, seed=seed, repetitions=15)
        truth = np.array([lam < 0 for lam in spec.eigenvalues])
        np.testing.assert_array_equal(rec.flags.astype(bool), truth)


def test_recover_signs_rejects_mismatched_components():
    a = np.diag([0.5, -0.5])
    b = uniform_b(2)
    est_a = qsve_run(_store(a), b, 5)
    est_other = qsve_run(_store(np.diag([1.0, 0.25])), b, 5)
    with pytest.raises(ValidationError):
        recover_signs(est_a, est_other, 0.5)


# -- rotation and post-selection ----------------------------------------------


def test_post_selection_identity_matrix_quarter():
    # f(1) = 1/2 uniformly, so p = 1/4 for any b
    filt = FilterFunctions(1.0, 0.5, kind="invert-only")
    betas = np.array([0.8, 0.6])
    rotated = conditional_rotation(betas, np.array([1.0, 1.0]), filt)
    _, p = post_select(rotated)
    assert p == pytest.approx(0.25, abs=1e-12)


def test_post_selection_hand_computed_mixture():
    # f(1) = 1/4 and f(0.5) = 1/2: p = (1/2)(1/16) + (1/2)(1/4) = 5/32
    filt = FilterFunctions(2.0, 0.25, kind="invert-only")
    betas = np.ones(2) / np.sqrt(2.0)
    rotated = conditional_rotation(betas, np.array([1.0, 0.5]), filt)
    state, p = post_select(rotated)
    assert p == pytest.approx(5.0 / 32.0, abs=1e-12)
    expected = np.array([0.25, 0.5])
    expected = expected / np.linalg.norm(expected)
    np.testing.assert_allclose(np.abs(state.amplitudes), expected, atol=1e-12)


def test_post_selection_all_ill_conditioned_raises():
    filt = FilterFunctions(4.0, 1 / 8, kind="full-fgh")
    betas = np.array([1.0])
    rotated = conditional_rotation(betas, np.array([0.05]), filt)  # below 1/(2 kappa)
    with pytest.raises(IllConditionedError):
        post_select(rotated)


def test_rotation_folds_sign_into_phase():
    filt = FilterFunctions(2.0, 0.25, kind="invert-only")
    rotated = conditional_rotation(np.array([1.0]), np.array([-0.5]), filt)
    state, _ = post_select(rotated)
    assert state.amplitudes[0].real == pytest.approx(-1.0)


def test_sampled_branch_frequencies_match_analytic():
    filt = FilterFunctions(2.0, 0.25, kind="invert-only")
    betas = np.ones(2) / np.sqrt(2.0)
    rotated = conditional_rotation(betas, np.array([1.0, 0.5]), filt)
    shots = 10_000
    counts = sample_branch_frequencies(rotated, shots, seed=3)
    p = rotated.branch_probabilities()[1]
    sd = np.sqrt(p * (1 - p) / shots)
    assert abs(counts[1] / shots - p) <= 3 * sd


# -- spectrum normalization ----------------------------------------------------


def test_spectrum_normalize_diagonal():
    scaled, factor = spectrum_normalize(np.diag([2.0, 1.0]))
    assert factor == pytest.approx(2.0)
    np.testing.assert_allclose(scaled, np.diag([1.0, 0.5]), atol=1e-14)


def test_spectrum_normalize_already_normal():
    a = np.diag([1.0, 0.5])
    scaled, factor = spectrum_normalize(a)
    assert factor == pytest.approx(1.0)
    np.testing.assert_allclose(scaled, a)


def test_spectrum_normalize_random():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((4, 4))
    a = (a + a.T) / 2
    scaled, _ = spectrum_normalize(a)
    assert np.max(np.abs(np.linalg.eigvalsh(scaled))) == pytest.approx(1.0, abs=1e-12)


def test_spectrum_normalize_zero_matrix():
    with pytest.raises(ValidationError):
        spectrum_normalize(np.zeros((2, 2)))


# -- full solve -----------------------------------------------------------------


def test_solve_identity():
    report = solve(_store(np.eye(2)), np.array([1.0, 0.0]), SolverConfig(seed=0))
    np.testing.assert_allclose(report.output_state.amplitudes.real, [1.0, 0.0], atol=1e-10)
    assert report.distance == pytest.approx(0.0, abs=1e-10)


def test_solve_mixed_sign_fixture():
    report = solve(
        _store(np.diag([0.5, -0.5])),
        np.array([1.0, 1.0]) / np.sqrt(2.0),
        SolverConfig(kappa=2.0, epsilon=0.05, seed=1),
    )
    expected = np.array([1.0, -1.0]) / np.sqrt(2.0)
    np.testing.assert_allclose(report.output_state.amplitudes.real, expected, atol=0.05)
    assert report.distance <= 0.05
    assert all(s["correct"] for s in report.signs)


@pytest.mark.parametrize("seed", range(10))
def test_solve_random_instances_meet_epsilon(seed):
    rng = np.random.default_rng(seed + 900)
    kappa = float(rng.choice([2.0, 4.0, 8.0]))
    n = int(rng.choice([2, 3, 4]))
    a = generate_matrix("random-symmetric", n, kappa, seed=seed)
    report = solve(_store(a), uniform_b(n), SolverConfig(kappa=kappa, epsilon=0.05, seed=seed))
    assert report.distance <= 0.05


def test_solve_distance_identity():
    a = generate_matrix("random-symmetric", 4, 4.0, seed=21)
    report = solve(_store(a), uniform_b(4), SolverConfig(seed=2))
    lhs = report.distance**2
    rhs = 2.0 * (1.0 - report.overlap_real)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_solve_is_ray_invariant():
    a = generate_matrix("random-symmetric", 3, 3.0, seed=33)
    store = _store(a)
    b = np.array([0.3, -1.1, 0.4])
    r1 = solve(store, b, SolverConfig(seed=5))
    r2 = solve(store, 17.0 * b, SolverConfig(seed=5))
    np.testing.assert_allclose(r1.output_state.amplitudes, r2.output_state.amplitudes, atol=1e-12)
    assert r1.post_selection_probability == pytest.approx(r2.post_selection_probability)


def test_solve_reproducible_by_seed():
    a = generate_matrix("random-symmetric", 4, 8.0, seed=3)
    store = _store(a)
    r1 = solve(store, uniform_b(4), SolverConfig(seed=7))
    r2 = solve(store, uniform_b(4), SolverConfig(seed=7))
    assert r1.to_json() == r2.to_json()


def test_solve_walk_application_accounting():
    a = generate_matrix("random-symmetric", 3, 3.0, seed=5)
    report = solve(_store(a), uniform_b(3), SolverConfig(t=8, seed=0))
    assert report.walk_applications == 2 * (2**8 - 1)


def test_solve_report_json_schema():
    a = generate_matrix("random-symmetric", 3, 3.0, seed=5)
    report = solve(_store(a), uniform_b(3), SolverConfig(seed=0))
    payload = json.loads(report.to_json())
    assert sorted(payload.keys()) == [
        "config",
        "distance",
        "fidelity",
        "output_state",
        "post_selection_probability",
        "repetitions_amplified",
        "repetitions_raw",
        "signs",
        "walk_applications",
    ]
    assert {"lambda_true", "lambda_hat", "flag", "correct"} == set(payload["signs"][0])
    assert len(payload["output_state"][0]) == 2
    assert payload["repetitions_raw"] == pytest.approx(1 / payload["post_selection_probability"])
    assert payload["repetitions_amplified"] == pytest.approx(
        np.sqrt(1 / payload["post_selection_probability"])
    )


def test_solve_rejects_out_of_band_spectrum():
    with pytest.raises(SpectralRangeError) as err:
        solve(_store(np.diag([1.0, 0.1])), uniform_b(2), SolverConfig(kappa=2.0))
    assert "0.1" in str(err.value)


def test_solve_rejects_singular_matrix():
    with pytest.raises(SingularMatrixError):
        solve(_store(np.diag([1.0, 0.0])), uniform_b(2))


def test_solve_rejects_asymmetric():
    with pytest.raises(ValidationError):
        solve(_store(np.array([[1.0, 0.5], [0.0, 1.0]])), uniform_b(2))


def test_solve_rejects_zero_b():
    with pytest.raises(ValidationError):
        solve(_store(np.eye(2)), np.zeros(2))


def test_paper_mode_reports_sign_failures_for_inner_band():
    # an eigenvalue at -1.5/kappa sits in the band the verbatim shift gets wrong
    kappa = 4.0
    a = np.diag([1.0, -1.5 / kappa])
    report = solve(
        _store(a),
        uniform_b(2),
        SolverConfig(kappa=kappa, mode="paper-faithful", seed=0),
    )
    flags = {round(s["lambda_true"], 6): s["correct"] for s in report.signs}
    assert flags[1.0] is True
    assert flags[round(-1.5 / kappa, 6)] is False  # demonstrated, not hidden


def test_corrected_mode_handles_same_instance():
    kappa = 4.0
    a = np.diag([1.0, -1.5 / kappa])
    report = solve(_store(a), uniform_b(2), SolverConfig(kappa=kappa, seed=0))
    assert all(s["correct"] for s in report.signs)
    assert report.distance <= report.config.epsilon


def test_solve_statevector_backend_matches_spectral():
    a = generate_matrix("random-symmetric", 3, 3.0, seed=12)
    store = _store(a)
    sv = solve(store, uniform_b(3), SolverConfig(kappa=3.0, t=8, seed=4, path="statevector"))
    sp = solve(store, uniform_b(3), SolverConfig(kappa=3.0, t=8, seed=4, path="spectral"))
    np.testing.assert_allclose(sv.output_state.amplitudes, sp.output_state.amplitudes, atol=1e-9)
    assert sv.walk_applications == sp.walk_applications
    assert sv.distance <= sv.config.epsilon
