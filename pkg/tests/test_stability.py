import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from cascade_opo.model import (
    SteadyState,
    SystemParams,
    classify_regime,
    mean_field_drift,
    standard_params,
    steady_state,
)
from cascade_opo.stability import (
    StabilityClass,
    build_matrices,
    characteristic_poly_check,
    characteristic_polynomial,
    characteristic_roots,
    classify_point,
    doubled_drift,
    eigen_analysis,
    equal_loss_eigenvalues,
    match_multisets,
    stability_map,
)


def doubled_state(state):
    a = state.amplitudes
    # (a1, a2, a3, b) -> (a1, a1+, a2, a2+, a3, a3+, b, b+)
    return np.array([x for z in a for x in (z, np.conj(z))])


def fd_jacobian(params, v, h=1e-3):
    J = np.empty((8, 8), dtype=complex)
    for k in range(8):
        dv = np.zeros(8, dtype=complex)
        dv[k] = h
        J[:, k] = (doubled_drift(params, v + dv) - doubled_drift(params, v - dv)) / (2 * h)
    return J


class TestBuildMatrices:
    @pytest.mark.parametrize("ratio", [0.0, 0.5, 0.9, 1.5, 3.0])
    def test_drift_is_negative_jacobian(self, std, eps_c, ratio):
        p = std.with_(epsilon=ratio * eps_c)
        s = steady_state(p)
        mats = build_matrices(p, s)
        J = fd_jacobian(p, doubled_state(s))
        assert np.max(np.abs(mats.A + J)) <= 1e-8

    def test_empty_cavity(self, std):
        mats = build_matrices(std, steady_state(std))
        np.testing.assert_array_equal(mats.A, np.diag([1, 1, 3, 3, 1, 1, 1, 1]))
        assert np.all(mats.D == 0)

    def test_below_threshold_structure(self, std, eps_c):
        p = std.with_(epsilon=0.5 * eps_c)
        mats = build_matrices(p, steady_state(p))
        A, D = mats.A, mats.D
        # pump rows and columns are pure decay
        assert np.all(A[6:, :6] == 0) and np.all(A[:6, 6:] == 0)
        nz = {(i, j) for i, j in zip(*np.nonzero(D))}
        assert nz == {(0, 4), (4, 0), (1, 5), (5, 1)}
        assert D[0, 4] == pytest.approx(0.01 * 0.5 * eps_c)

    def test_above_threshold_entries(self, std, eps_c):
        p = std.with_(epsilon=1.5 * eps_c)
        mats = build_matrices(p, steady_state(p))
        # entries proportional to the signal amplitudes switch on
        for i, j in [(0, 6), (2, 6), (4, 6), (6, 0), (6, 2), (6, 4)]:
            assert mats.A[i, j] != 0
        assert mats.D[4, 6] != 0

    def test_conjugation_symmetry(self, std, eps_c):
        # swapping alpha <-> alpha+ maps A to its conjugate
        p = std.with_(epsilon=1.5 * eps_c)
        mats = build_matrices(p, steady_state(p, theta=0.7))
        P = np.kron(np.eye(4), [[0, 1], [1, 0]])
        np.testing.assert_allclose(P @ mats.A @ P, mats.A.conj(), atol=1e-12)
        np.testing.assert_allclose(P @ mats.D @ P, mats.D.conj(), atol=1e-12)

    def test_rejects_non_steady_state(self, std):
        with pytest.raises(ValueError):
            build_matrices(std.with_(epsilon=10.0), SteadyState(0j, 0j, 0j, 0j))


class TestEigenAnalysis:
    def test_equal_loss_example(self):
        p = standard_params(epsilon=50.0).with_(gamma2=1.0)
        lam = eigen_analysis(build_matrices(p, steady_state(p))).eigenvalues
        expected = [1, 1, 1, 1, 1.458258, 1.458258, 0.541742, 0.541742]
        assert match_multisets(lam, expected) < 1e-6
        assert match_multisets(lam, equal_loss_eigenvalues(p)) < 1e-10

    def test_marginal_at_threshold(self, std, eps_c):
        p = std.with_(epsilon=eps_c)
        report = eigen_analysis(build_matrices(p, steady_state(p)))
        assert report.marginal and not report.stable

    def test_zero_mode_above_threshold(self, std, eps_c):
        p = std.with_(epsilon=1.5 * eps_c)
        report = eigen_analysis(build_matrices(p, steady_state(p)))
        assert np.min(np.abs(report.eigenvalues)) < 1e-8

    def test_rejects_non_finite(self, std):
        mats = build_matrices(std, steady_state(std))
        mats.A[0, 0] = np.nan
        with pytest.raises(ValueError):
            eigen_analysis(mats)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.0, 0.999), st.floats(0.0, 0.999))
    def test_stable_below_threshold(self, frac_eps, frac_chi):
        p = standard_params()
        chi2 = frac_chi * classify_regime(p).chi2_crit
        p = p.with_(chi2=chi2)
        p = p.with_(epsilon=frac_eps * classify_regime(p).eps_c)
        assert eigen_analysis(build_matrices(p, steady_state(p))).stable


    def test_instability_below_threshold_for_small_gamma2(self):
        # an oscillatory instability precedes the threshold for these losses
        p = SystemParams(1.0, 1.0, 0.1, 1.0, 0.01, 0.009 * np.sqrt(0.1), 0.0)
        p = p.with_(epsilon=0.8 * classify_regime(p).eps_c)
        cls, min_re = classify_point(p)
        assert cls is StabilityClass.MARGINAL and min_re < -0.5
        z0 = steady_state(p).amplitudes + 1e-6 * np.array([1, 1j, 1, 0])

        def rhs(t, y):
            f = mean_field_drift(p, y[:4] + 1j * y[4:])
            return np.concatenate([f.real, f.imag])

        sol = solve_ivp(rhs, (0, 40), np.concatenate([z0.real, z0.imag]), rtol=1e-10, atol=1e-12)
        assert np.abs(sol.y[0, -1] + 1j * sol.y[4, -1]) > 10


class TestCharacteristicPolynomial:
    def test_standard_point(self, std, eps_c):
        p = std.with_(epsilon=0.9 * eps_c)
        assert characteristic_poly_check(p) <= 1e-8

    def test_empty_cavity_roots(self, std):
        # the cubic collapses to (g1 - l)(g2 - l)(g3 - l) exactly
        expected = -np.poly([1.0, 3.0, 1.0])
        np.testing.assert_array_equal(characteristic_polynomial(std, 0.0), expected)
        # a double root only resolves to about sqrt(machine epsilon)
        assert match_multisets(characteristic_roots(std), [1, 1, 1, 1, 3, 3, 1, 1]) < 1e-7

    def test_equal_loss_roots(self):
        p = standard_params(epsilon=50.0).with_(gamma2=1.0)
        assert match_multisets(characteristic_roots(p), equal_loss_eigenvalues(p)) <= 1e-10

    def test_roots_match_eigenvalues(self, std, eps_c):
        p = std.with_(epsilon=0.7 * eps_c)
        lam = eigen_analysis(build_matrices(p, steady_state(p))).eigenvalues
        assert match_multisets(lam, characteristic_roots(p)) < 1e-8

    def test_refuses_above_threshold(self, std, eps_c):
        with pytest.raises(ValueError):
            characteristic_poly_check(std.with_(epsilon=1.5 * eps_c))

    def test_equal_loss_requires_equal_losses(self, std):
        with pytest.raises(ValueError):
            equal_loss_eigenvalues(std)


class TestStabilityMap:
    @pytest.mark.parametrize("chi2,eps,expected", [
        (0.004, 50.0, StabilityClass.BELOW_THRESHOLD_STABLE),
        (0.004, 150.0, StabilityClass.ABOVE_THRESHOLD_UNSTABLE),
        (0.025, 10.0, StabilityClass.NO_THRESHOLD_STABLE),
        (0.025, 500.0, StabilityClass.NO_THRESHOLD_STABLE),
    ])
    def test_examples(self, chi2, eps, expected):
        assert classify_point(standard_params(epsilon=eps, chi2=chi2))[0] is expected

    def test_boundary_follows_threshold_curve(self, std):
        crit = classify_regime(std).chi2_crit
        chi2 = np.linspace(0.0, 3.0, 31) * crit + 1e-5
        eps = np.linspace(5.0, 300.0, 30)
        classes, min_re = stability_map(std, chi2, eps)
        for i, c in enumerate(chi2):
            r = classify_regime(std.with_(chi2=c))
            for j, e in enumerate(eps):
                if not r.has_threshold:
                    want = StabilityClass.NO_THRESHOLD_STABLE
                elif e < r.eps_c:
                    want = StabilityClass.BELOW_THRESHOLD_STABLE
                else:
                    want = StabilityClass.ABOVE_THRESHOLD_UNSTABLE
                assert classes[i, j] is want, (c, e)
        below = np.array([[c is not StabilityClass.ABOVE_THRESHOLD_UNSTABLE for c in r]
                          for r in classes])
        assert np.all(min_re[below] > 0)

    def test_rejects_bad_grid(self, std):
        with pytest.raises(ValueError):
            stability_map(std, [np.nan], [1.0])
        with pytest.raises(ValueError):
            stability_map(std, [0.004], [-1.0])
