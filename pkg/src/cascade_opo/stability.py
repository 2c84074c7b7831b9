"""Linearised fluctuations: drift/diffusion matrices and eigen-analysis.

Fluctuations are ordered as ``(da1, da1+, da2, da2+, da3, da3+, db, db+)`` and
obey ``d/dt dv = -A dv + B dW`` with ``D = B B^T``.  Stability therefore
requires every eigenvalue of ``A`` to have a positive real part.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import (
    Regime,
    SteadyState,
    SystemParams,
    classify_regime,
    mean_field_residual,
    steady_state,
)

__all__ = [
    "VARIABLES",
    "FluctuationMatrices",
    "StabilityReport",
    "StabilityClass",
    "EigenSolverError",
    "build_matrices",
    "doubled_drift",
    "eigen_analysis",
    "characteristic_polynomial",
    "characteristic_roots",
    "characteristic_poly_check",
    "equal_loss_eigenvalues",
    "match_multisets",
    "stability_map",
    "classify_point",
]

VARIABLES = ("a1", "a1+", "a2", "a2+", "a3", "a3+", "b", "b+")

DEFAULT_TOLERANCE = 1e-9
RESIDUAL_LIMIT = 1e-6


class EigenSolverError(RuntimeError):
    """The eigenvalue solver failed to converge."""


@dataclass(frozen=True)
class FluctuationMatrices:
    A: np.ndarray
    D: np.ndarray
    params: SystemParams | None = None
    state: SteadyState | None = None


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: np.ndarray
    min_real_part: float
    stable: bool
    marginal: bool


def doubled_drift(params: SystemParams, v) -> np.ndarray:
    """Deterministic positive-P drift on the doubled variables.

    ``v`` follows the ``VARIABLES`` ordering; trailing axes broadcast.
    """
    p = params
    a1, a1p, a2, a2p, a3, a3p, b, bp = (np.asarray(x) for x in v)
    return np.stack([
        -p.gamma1 * a1 + p.chi1 * a3p * b,
        -p.gamma1 * a1p + p.chi1 * a3 * bp,
        -p.gamma2 * a2 + p.chi2 * a3 * b,
        -p.gamma2 * a2p + p.chi2 * a3p * bp,
        -p.gamma3 * a3 + p.chi1 * a1p * b - p.chi2 * a2 * bp,
        -p.gamma3 * a3p + p.chi1 * a1 * bp - p.chi2 * a2p * b,
        p.epsilon - p.gamma0 * b - p.chi1 * a1 * a3 - p.chi2 * a2 * a3p,
        p.epsilon - p.gamma0 * bp - p.chi1 * a1p * a3p - p.chi2 * a2p * a3,
    ])


def build_matrices(params: SystemParams, state: SteadyState) -> FluctuationMatrices:
    """Drift and diffusion matrices about a steady state.

    ``A`` is the negative Jacobian of :func:`doubled_drift` evaluated with
    ``alpha+ = conj(alpha)``.  ``D`` is read off the second-order terms of the
    positive-P Fokker-Planck equation; its only non-zero entries couple
    (a1, a3), (a1+, a3+), (a3, b) and (a3+, b+).

    Raises
    ------
    ValueError
        If ``state`` is not a steady state of ``params``.
    """
    residual = mean_field_residual(params, state)
    if residual > RESIDUAL_LIMIT:
        raise ValueError(f"state is not a steady state of params (residual {residual:.3g})")
    p = params
    g0, g1, g2, g3 = p.gamma0, p.gamma1, p.gamma2, p.gamma3
    c1, c2 = p.chi1, p.chi2
    b, a1, a2, a3 = state.beta, state.alpha1, state.alpha2, state.alpha3
    bc, a1c, a2c, a3c = np.conj(b), np.conj(a1), np.conj(a2), np.conj(a3)

    A = np.array([
        [g1, 0, 0, 0, 0, -c1 * b, -c1 * a3c, 0],
        [0, g1, 0, 0, -c1 * bc, 0, 0, -c1 * a3],
        [0, 0, g2, 0, -c2 * b, 0, -c2 * a3, 0],
        [0, 0, 0, g2, 0, -c2 * bc, 0, -c2 * a3c],
        [0, -c1 * b, c2 * bc, 0, g3, 0, -c1 * a1c, c2 * a2],
        [-c1 * bc, 0, 0, c2 * b, 0, g3, c2 * a2c, -c1 * a1],
        [c1 * a3, 0, c2 * a3c, 0, c1 * a1, c2 * a2, g0, 0],
        [0, c1 * a3c, 0, c2 * a3, c2 * a2c, c1 * a1c, 0, g0],
    ], dtype=complex)

    D = np.zeros((8, 8), dtype=complex)
    D[0, 4] = D[4, 0] = c1 * b
    D[1, 5] = D[5, 1] = c1 * bc
    D[4, 6] = D[6, 4] = -c2 * a2c
    D[5, 7] = D[7, 5] = -c2 * a2
    return FluctuationMatrices(A=A, D=D, params=params, state=state)


def eigen_analysis(mats: FluctuationMatrices, tolerance: float = DEFAULT_TOLERANCE) -> StabilityReport:
    """Eigenvalues of the drift matrix and the resulting stability verdict."""
    A = np.asarray(mats.A)
    if not np.all(np.isfinite(A)):
        raise ValueError("drift matrix contains non-finite entries")
    try:
        lam = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(str(exc)) from exc
    lam = lam[np.lexsort((lam.imag, lam.real))]
    min_re = float(lam.real.min())
    return StabilityReport(
        eigenvalues=lam,
        min_real_part=min_re,
        stable=min_re > tolerance,
        marginal=abs(min_re) <= tolerance,
    )


def characteristic_polynomial(params: SystemParams, beta: float):
    """Coefficients of the bracketed cubic of the below-threshold polynomial.

    The full characteristic polynomial is ``(g0 - l)**2 * cubic(l)**2`` with::

        cubic(l) = (g1 - l)(g2 - l)(g3 - l) + l b^2 (chi1^2 - chi2^2)
                   + b^2 (g1 chi2^2 - g2 chi1^2)

    Returns the cubic's coefficients, highest power first.
    """
    p = params
    g1, g2, g3 = p.gamma1, p.gamma2, p.gamma3
    b2 = beta * beta
    cubic = np.poly1d([-1.0, g1 + g2 + g3, -(g1 * g2 + g2 * g3 + g1 * g3), g1 * g2 * g3])
    cubic = cubic + np.poly1d([b2 * (p.chi1**2 - p.chi2**2), b2 * (g1 * p.chi2**2 - g2 * p.chi1**2)])
    return cubic.coeffs


def _full_characteristic(params: SystemParams, beta: float, lam):
    cubic = np.polyval(characteristic_polynomial(params, beta), lam)
    return (params.gamma0 - lam) ** 2 * cubic**2


def characteristic_roots(params: SystemParams, eps: float | None = None) -> np.ndarray:
    """The eight roots of the below-threshold characteristic polynomial."""
    eps = params.epsilon if eps is None else eps
    beta = eps / params.gamma0
    r = np.roots(characteristic_polynomial(params, beta)).astype(complex)
    return np.concatenate([[params.gamma0, params.gamma0], r, r])


def characteristic_poly_check(params: SystemParams, eps: float | None = None) -> float:
    """Max |p(lambda)| of the characteristic polynomial over the numerical eigenvalues.

    Only meaningful for the trivial (below-threshold) state.
    """
    eps = params.epsilon if eps is None else eps
    p = params.with_(epsilon=eps)
    state = steady_state(p)
    if state.above_threshold:
        raise ValueError("characteristic polynomial check requires a below-threshold state")
    lam = eigen_analysis(build_matrices(p, state)).eigenvalues
    return float(np.max(np.abs(_full_characteristic(p, state.beta.real, lam))))


def equal_loss_eigenvalues(params: SystemParams, eps: float | None = None) -> np.ndarray:
    """Closed-form eigenvalues when gamma1 = gamma2 = gamma3 (below threshold)."""
    eps = params.epsilon if eps is None else eps
    g = params.gamma1
    if params.gamma2 != g or params.gamma3 != g:
        raise ValueError("closed form requires gamma1 == gamma2 == gamma3")
    shift = (eps / params.gamma0) * np.sqrt(complex(params.chi1**2 - params.chi2**2))
    g0 = params.gamma0
    return np.array([g0, g0, g, g, g + shift, g + shift, g - shift, g - shift], dtype=complex)


def match_multisets(a, b) -> float:
    """Largest distance between two equal-size multisets of complex numbers
    under the optimal pairing."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError("multisets differ in size")
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


class StabilityClass(str, enum.Enum):
    BELOW_THRESHOLD_STABLE = "BelowThresholdStable"
    ABOVE_THRESHOLD_UNSTABLE = "AboveThresholdUnstable"
    NO_THRESHOLD_STABLE = "NoThresholdStable"
    MARGINAL = "Marginal"


def classify_point(params: SystemParams, tolerance: float = DEFAULT_TOLERANCE):
    """Stability class and minimum real eigenvalue part for one operating point.

    Above threshold the linearisation is invalid (a zero mode accompanies the
    free phase) and the point is reported as unstable whatever the numerical
    spectrum.  Any other point whose spectrum fails the tolerance test is
    reported as marginal.  That includes the trivial state below the
    threshold for loss ratios where a complex pair crosses the imaginary axis
    first (the Routh-Hurwitz condition
    ``s1 * c1 > c0`` on the cubic fails); for the standard losses this only
    happens far above the threshold.
    """
    report = classify_regime(params)
    state = steady_state(params)
    stab = eigen_analysis(build_matrices(params, state), tolerance)
    if state.above_threshold:
        return StabilityClass.ABOVE_THRESHOLD_UNSTABLE, stab.min_real_part
    if not stab.stable:
        return StabilityClass.MARGINAL, stab.min_real_part
    if report.regime is Regime.WITH_THRESHOLD:
        return StabilityClass.BELOW_THRESHOLD_STABLE, stab.min_real_part
    return StabilityClass.NO_THRESHOLD_STABLE, stab.min_real_part


def stability_map(params_base: SystemParams, chi2_grid, eps_grid,
                  tolerance: float = DEFAULT_TOLERANCE, workers: int | None = None):
    """Classify every (chi2, epsilon) cell.

    Returns
    -------
    classes : ndarray of StabilityClass, shape (len(chi2_grid), len(eps_grid))
    min_real : ndarray of float, same shape
    """
    chi2_grid = np.asarray(chi2_grid, dtype=float)
    eps_grid = np.asarray(eps_grid, dtype=float)
    if not (np.all(np.isfinite(chi2_grid)) and np.all(np.isfinite(eps_grid))):
        raise ValueError("grids must be finite")
    if np.any(chi2_grid < 0) or np.any(eps_grid < 0):
        raise ValueError("grids must be non-negative")

    def row(chi2):
        out = [classify_point(params_base.with_(chi2=float(chi2), epsilon=float(e)), tolerance)
               for e in eps_grid]
        return [c for c, _ in out], [m for _, m in out]

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(row, chi2_grid))
    else:
        rows = [row(c) for c in chi2_grid]
    classes = np.array([r[0] for r in rows], dtype=object)
    min_real = np.array([r[1] for r in rows], dtype=float)
    return classes, min_real
