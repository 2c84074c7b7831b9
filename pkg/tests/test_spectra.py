import numpy as np
import pytest
from scipy.integrate import quad

from cascade_opo.model import mean_field_drift, standard_params, steady_state
from cascade_opo.spectra import (
    QUADRATURE_MAP,
    AboveThresholdError,
    combination_variance,
    compute_spectra,
    intracavity_spectrum,
    output_spectrum,
    quadrature_transform,
    stationary_covariance,
)
from cascade_opo.stability import build_matrices


@pytest.fixture
def below(std, eps_c):
    return std.with_(epsilon=0.5 * eps_c)


@pytest.fixture
def mats(below):
    return build_matrices(below, steady_state(below))


def real_drift_jacobian(params, h=1e-4):
    """Jacobian of the mean-field flow in (X, Y) = (2 Re a, 2 Im a) per mode."""
    z0 = steady_state(params).amplitudes

    def f(q):
        z = z0 + (q[0::2] + 1j * q[1::2]) / 2
        dz = mean_field_drift(params, z)
        out = np.empty(8)
        out[0::2], out[1::2] = 2 * dz.real, 2 * dz.imag
        return out

    J = np.empty((8, 8))
    for k in range(8):
        e = np.zeros(8)
        e[k] = h
        J[:, k] = (f(e) - f(-e)) / (2 * h)
    return J


class TestIntracavity:
    def test_empty_cavity_is_zero(self, std):
        m = build_matrices(std, steady_state(std))
        for w in (0.0, 1.0, 7.5):
            assert np.all(intracavity_spectrum(m, w) == 0)

    def test_zero_frequency_formula(self, mats):
        A, D = mats.A, mats.D
        Ainv = np.linalg.inv(A)
        np.testing.assert_allclose(intracavity_spectrum(mats, 0.0), Ainv @ D @ Ainv.T, atol=1e-12)

    def test_inverse_square_decay(self, mats):
        norms = [np.linalg.norm(intracavity_spectrum(mats, w)) * w**2 for w in (1e2, 1e3, 1e4)]
        np.testing.assert_allclose(norms[1:], norms[0], rtol=1e-3)
        assert norms[-1] == pytest.approx(np.linalg.norm(mats.D), rel=1e-6)

    def test_integral_equals_lyapunov_covariance(self, mats):
        C = stationary_covariance(mats)
        np.testing.assert_allclose(mats.A @ C + C @ mats.A.T, mats.D, atol=1e-12)
        for i, j in [(0, 4), (1, 5), (0, 0), (2, 4)]:
            def g(w, part):
                v = intracavity_spectrum(mats, w)[i, j]
                return v.real if part == 0 else v.imag
            # S(-w) = S(w)^T here, and the (i, j) entries we pick are symmetric
            re = 2 * quad(g, 0, np.inf, args=(0,), limit=200)[0] / (2 * np.pi)
            assert re == pytest.approx(C[i, j].real, abs=1e-8)


class TestQuadratureTransform:
    def test_zero(self):
        assert np.all(quadrature_transform(np.zeros((8, 8))) == 0)

    def test_single_mode_example(self):
        S = np.zeros((8, 8), dtype=complex)
        S[0, 1] = S[1, 0] = 0.7
        Q = quadrature_transform(S)
        assert Q[0, 0] == pytest.approx(1.4)
        assert Q[1, 1] == pytest.approx(1.4)
        assert Q[0, 1] == 0

    def test_rejects_non_hermitian(self):
        S = np.zeros((8, 8), dtype=complex)
        S[0, 4] = 1.0
        with pytest.raises(ValueError):
            quadrature_transform(S)

    def test_pump_decouples_below_threshold(self, mats):
        for w in (0.0, 0.8, 3.0):
            Q = quadrature_transform(intracavity_spectrum(mats, w))
            assert np.all(Q[6:, :] == 0) and np.all(Q[:, 6:] == 0)

    def test_x_y_blocks_decouple(self, mats):
        # below threshold the X quadratures never mix with the Y quadratures
        Q = quadrature_transform(intracavity_spectrum(mats, 0.0))
        X, Y = [0, 2, 4], [1, 3, 5]
        assert np.max(np.abs(Q[np.ix_(X, Y)])) < 1e-12

    def test_matches_quadrature_space_oracle(self, below, mats):
        # same spectrum built directly from the real mean-field Jacobian
        Aq = -real_drift_jacobian(below)
        T = QUADRATURE_MAP
        Dq = (T @ mats.D @ T.T).real
        for w in (0.0, 0.6, 2.5):
            L = np.linalg.inv(Aq + 1j * w * np.eye(8))
            R = np.linalg.inv(Aq.T - 1j * w * np.eye(8))
            expected = (L @ Dq @ R).real
            got = quadrature_transform(intracavity_spectrum(mats, w))
            np.testing.assert_allclose(got, expected, atol=1e-7)


class TestOutputSpectrum:
    def test_zero_gives_shot_noise(self, std):
        np.testing.assert_array_equal(output_spectrum(np.zeros((8, 8)), std), np.eye(8))

    def test_squeezing_example(self, std):
        Q = np.zeros((8, 8))
        Q[0, 0] = -0.25
        assert output_spectrum(Q, std)[0, 0] == pytest.approx(0.5)

    def test_cross_term_example(self, std):
        Q = np.zeros((8, 8))
        Q[0, 4] = Q[4, 0] = 0.3
        assert output_spectrum(Q, std)[0, 4] == pytest.approx(0.6)

    def test_rate_weighting(self, std):
        Q = np.zeros((8, 8))
        Q[2, 4] = 0.5
        assert output_spectrum(Q, std)[2, 4] == pytest.approx(2 * np.sqrt(3.0) * 0.5)

    @pytest.mark.parametrize("ratio", [0.1, 0.5, 0.9, 0.99])
    def test_positive_semidefinite(self, std, eps_c, ratio):
        res = compute_spectra(std.with_(epsilon=ratio * eps_c), np.linspace(0, 10, 41))
        for V in res.quad_out:
            np.testing.assert_allclose(V, V.T, atol=1e-12)
            assert np.linalg.eigvalsh(V).min() >= -1e-8

    def test_no_threshold_regime_psd(self):
        res = compute_spectra(standard_params(epsilon=150.0, chi2=0.025), np.linspace(0, 10, 21))
        for V in res.quad_out:
            assert np.linalg.eigvalsh(V).min() >= -1e-8


class TestCombinationVariance:
    def test_vacuum_examples(self, std):
        V = compute_spectra(std, [0.0]).quad_out[0]
        assert combination_variance(V, [1, 0, -1, 0, 0, 0]) == pytest.approx(2.0)
        assert combination_variance(V, [0, 1, 0, 1, 0, 1]) == pytest.approx(3.0)

    def test_zero_coefficients(self, below):
        V = compute_spectra(below, [0.3]).quad_out[0]
        assert combination_variance(V, np.zeros(6)) == 0.0

    def test_rejects_wrong_length(self, std):
        with pytest.raises(ValueError):
            combination_variance(np.eye(8), [1, 0, 0])


class TestComputeSpectra:
    def test_refuses_above_threshold(self, std, eps_c):
        with pytest.raises(AboveThresholdError):
            compute_spectra(std.with_(epsilon=1.5 * eps_c))

    def test_default_grid(self, below):
        res = compute_spectra(below)
        assert res.omega_grid[0] == 0 and res.omega_grid[-1] == 10
        assert res.signal_block().shape == (res.omega_grid.size, 6, 6)


def _takagi_noise(D):
    # D has [[0, d], [d, 0]] blocks on (a1, a3) and (a1+, a3+) below threshold
    B = np.zeros((8, 4), dtype=complex)
    for col, (i, j) in zip((0, 2), ((0, 4), (1, 5))):
        r = np.sqrt(D[i, j] / 2)
        B[[i, j], col] = r
        B[[i, j], col + 1] = [1j * r, -1j * r]
    return B


@pytest.mark.slow
def test_zero_frequency_against_ou_simulation(below, mats):
    """Time-domain simulation of the linearised process estimates S(0)."""
    B = _takagi_noise(mats.D)
    assert np.allclose(B @ B.T, mats.D)
    rng = np.random.default_rng(3)
    n, dt, burn, T = 10000, 0.01, 10.0, 40.0
    M = np.eye(8) - mats.A * dt
    x = np.zeros((8, n), dtype=complex)
    integral = np.zeros_like(x)
    half = None
    n_burn, n_run = int(round(burn / dt)), int(round(T / dt))
    for k in range(n_burn + n_run):
        x = M @ x + B @ (rng.standard_normal((4, n)) * np.sqrt(dt))
        if k >= n_burn:
            integral += x * dt
        if k == n_burn + n_run // 2 - 1:
            half = integral.copy()
    Q, Qh = QUADRATURE_MAP @ integral, QUADRATURE_MAP @ half
    # Richardson step removes the 1/T window bias of Var(integral)/T
    samples = (2 * Q[:, None, :] * Q[None, :, :] / T
               - Qh[:, None, :] * Qh[None, :, :] / (T / 2)).real
    S = samples.mean(-1)
    se = samples.std(-1) / np.sqrt(n)
    est = output_spectrum(S, below)[:6, :6]
    est_se = (2 * se)[:6, :6]
    ref = compute_spectra(below, [0.0]).quad_out[0, :6, :6]
    err = np.abs(est - ref)
    assert np.all(err <= np.maximum(0.05 * np.abs(ref), 4 * est_se) + 1e-3)
