import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import minimize_scalar

from cascade_opo.criteria import (
    BOUND,
    CRITERIA,
    PAIRWISE,
    GainSet,
    ZeroVarianceError,
    criteria_spectrum,
    fully_inseparable,
    optimal_gains,
    pairwise_coefficients,
    pairwise_criteria,
    scan_minimum,
    symmetric_criteria,
)
from cascade_opo.model import classify_regime, standard_params
from cascade_opo.spectra import combination_variance, compute_spectra


def random_spec(seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((8, 8))
    return np.eye(8) + 0.3 * M @ M.T


class TestGains:
    def test_zero_covariances(self):
        assert optimal_gains(np.eye(8)).as_array().tolist() == [0, 0, 0]

    def test_example(self):
        V = np.eye(8)
        V[1, 1] = 1.2
        V[1, 3] = V[3, 1] = -0.3
        V[1, 5] = V[5, 1] = -0.3
        assert optimal_gains(V).g1 == pytest.approx(0.5)

    def test_zero_variance(self):
        V = np.eye(8)
        V[3, 3] = 0.0
        with pytest.raises(ZeroVarianceError):
            optimal_gains(V)

    @pytest.mark.parametrize("w", [0.0, 0.5, 2.0])
    def test_golden_section_oracle(self, std, eps_c, w):
        V = compute_spectra(std.with_(epsilon=0.5 * eps_c), [w]).quad_out[0]
        g = optimal_gains(V)
        for k, name in zip(range(3), ("s23", "s13", "s12")):
            def f(x):
                gains = GainSet(*[x if i == k else 0.0 for i in range(3)])
                return combination_variance(V, pairwise_coefficients(gains)[name][1])
            res = minimize_scalar(f, bracket=(-5, 5), method="golden", tol=1e-10)
            assert res.x == pytest.approx(g.as_array()[k], abs=1e-6)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_perturbation_never_helps(self, seed):
        V = random_spec(seed)
        g = optimal_gains(V).as_array()
        base = pairwise_criteria(V)
        # g1 enters s23, g2 enters s13, g3 enters s12
        for k, idx in ((0, 2), (1, 1), (2, 0)):
            for d in (-1e-3, 1e-3):
                h = g.copy()
                h[k] += d
                assert pairwise_criteria(V, GainSet(*h))[idx] >= base[idx] - 1e-12


class TestCriteriaValues:
    def test_vacuum(self):
        assert pairwise_criteria(np.eye(8)) == pytest.approx((4, 4, 4), abs=1e-10)
        assert symmetric_criteria(np.eye(8)) == pytest.approx((4, 4, 4), abs=1e-10)

    def test_empty_cavity_spectrum(self, std):
        cs = criteria_spectrum(std, np.linspace(0, 10, 11))
        for k in CRITERIA:
            np.testing.assert_allclose(getattr(cs, k), 4.0, atol=1e-10)

    def test_half_threshold_examples(self, std, eps_c):
        cs = criteria_spectrum(std.with_(epsilon=0.5 * eps_c), np.linspace(0, 10, 501))
        assert cs.s123.min() < 4 and cs.s312.min() < 4
        assert np.any((cs.s12 < 4) & (cs.s13 < 4))
        assert cs.s123.min() == pytest.approx(1.53, abs=0.01)

    def test_near_threshold_not_at_zero_frequency(self, std, eps_c):
        cs = criteria_spectrum(std.with_(epsilon=0.9 * eps_c), np.linspace(0, 10, 1001))
        verdict = cs.inseparable()
        assert not verdict[0]
        assert cs.s123[0] > 4 and cs.s312[0] > 4
        assert np.any(verdict[cs.omega_grid > 0.2])
        assert cs.s123.min() < 4

    def test_no_threshold_regime(self):
        p = standard_params(chi2=0.025)
        p = p.with_(epsilon=1.5 * classify_regime(p).eps_c_opo)
        cs = criteria_spectrum(p, np.linspace(0, 10, 501))
        minima = [getattr(cs, k).min() for k in ("s123", "s312", "s231")]
        assert all(m <= 4 for m in minima)
        assert 3.0 < cs.s312.min() < 4

    def test_index_asymmetry(self, std, eps_c):
        V = compute_spectra(std.with_(epsilon=0.5 * eps_c), [0.5]).quad_out[0]
        s123, s312, s231 = symmetric_criteria(V)
        assert len({round(s123, 6), round(s312, 6), round(s231, 6)}) == 3


class TestVerdict:
    def test_rules(self):
        assert fully_inseparable({"s12": 3, "s13": 3, "s23": 5})
        assert not fully_inseparable({"s12": 3, "s13": 5, "s23": 5})
        assert fully_inseparable({"s12": 5, "s13": 5, "s23": 5, "s231": 3.9})
        assert not fully_inseparable({k: BOUND for k in CRITERIA})

    @given(arrays(float, 6, elements=st.floats(0, 8)), st.integers(0, 5), st.floats(0, 8))
    def test_monotone(self, values, k, drop):
        before = dict(zip(CRITERIA, values))
        after = dict(before)
        after[CRITERIA[k]] = min(before[CRITERIA[k]], drop)
        assert fully_inseparable(after) >= fully_inseparable(before)


class TestScan:
    def test_pump_sweep(self, std, eps_c):
        res = scan_minimum(std, "pump", np.linspace(0.1, 0.9, 9) * eps_c, (0, 1), 201)
        assert np.all(res.minima["s231"] >= 4 - 1e-12)
        assert np.all(np.diff(res.minima["s123"]) < 0)
        assert not res.skipped.any()

    def test_skips_above_threshold(self, std, eps_c):
        res = scan_minimum(std, "pump", [0.5 * eps_c, eps_c, 1.5 * eps_c], n_omega=11)
        assert res.skipped.tolist() == [False, True, True]
        assert np.isnan(res.minima["s123"][1:]).all()

    def test_no_threshold_non_monotonic(self):
        p = standard_params(chi2=0.02)
        res = scan_minimum(p, "pump", np.linspace(10, 400, 14), (0, 10), 201)
        m = res.minima["s123"]
        k = int(np.argmin(m))
        assert 0 < k < m.size - 1
        assert m[k] < 0.5

    def test_chi2_sweep_records_gains(self, std):
        r = classify_regime(std)
        res = scan_minimum(std.with_(epsilon=0.5 * r.eps_c_opo), "chi2",
                           np.linspace(1, 2, 3) * r.chi2_crit, (0, 1), 51)
        for k in PAIRWISE:
            assert np.isfinite(res.gains_at_min[k]).all()

    def test_workers_match_serial(self, std, eps_c):
        vals = np.linspace(0.2, 0.8, 4) * eps_c
        a = scan_minimum(std, "pump", vals, n_omega=51)
        b = scan_minimum(std, "pump", vals, n_omega=51, workers=2)
        for k in CRITERIA:
            np.testing.assert_array_equal(a.minima[k], b.minima[k])

    def test_rejects_unknown_sweep(self, std):
        with pytest.raises(ValueError):
            scan_minimum(std, "gamma", [1.0])
