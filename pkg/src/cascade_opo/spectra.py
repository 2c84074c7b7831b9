"""Ornstein-Uhlenbeck spectra of the linearised fluctuations.

The intracavity spectral matrix is ``S(w) = (A + iw)^-1 D (A^T - iw)^-1`` in the
doubled ``(alpha, alpha+)`` basis.  Because the positive-P variables yield
normally-ordered moments, the measurable output spectra follow from the
input-output relations::

    S_out[j, j] = 1 + 2 gamma_j S[j, j]
    S_out[j, k] = 2 sqrt(gamma_j gamma_k) S[j, k]

with quadratures ``X = a + a^dag`` and ``Y = -i (a - a^dag)``; the vacuum
(shot-noise) level of every output quadrature is 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .model import SystemParams, steady_state
from .stability import FluctuationMatrices, build_matrices

__all__ = [
    "QUADRATURES",
    "SIGNAL_QUADRATURES",
    "SpectralResult",
    "SingularSpectrumError",
    "AboveThresholdError",
    "QUADRATURE_MAP",
    "intracavity_spectrum",
    "quadrature_transform",
    "output_spectrum",
    "combination_variance",
    "stationary_covariance",
    "compute_spectra",
    "default_omega_grid",
]

QUADRATURES = ("X1", "Y1", "X2", "Y2", "X3", "Y3", "X0", "Y0")
SIGNAL_QUADRATURES = QUADRATURES[:6]

IMAG_TOLERANCE = 1e-10


class SingularSpectrumError(ArithmeticError):
    """``A + i w`` is singular, which happens at marginal operating points."""


class AboveThresholdError(ValueError):
    """Linearised spectra are not defined above the oscillation threshold."""


def _quadrature_map() -> np.ndarray:
    per_mode = np.array([[1.0, 1.0], [-1j, 1j]])
    return scipy.linalg.block_diag(*([per_mode] * 4))


#: Rows give (X, Y) of each mode in terms of the (alpha, alpha+) variables.
QUADRATURE_MAP = _quadrature_map()


def default_omega_grid(gamma0: float = 1.0, n: int = 1001, span: float = 10.0) -> np.ndarray:
    return np.linspace(0.0, span * gamma0, n)


def intracavity_spectrum(mats: FluctuationMatrices, omega: float) -> np.ndarray:
    """Intracavity spectral matrix at a single angular frequency."""
    A = np.asarray(mats.A)
    eye = np.eye(A.shape[0])
    M = A + 1j * omega * eye
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularSpectrumError(f"A + i*{omega:g} is singular (cond={cond:.3g})")
    left = np.linalg.solve(M, mats.D)
    # right factor (A^T - i w)^-1 applied from the right
    return np.linalg.solve((A - 1j * omega * eye), left.T).T


def quadrature_transform(S_intra: np.ndarray, tol: float = IMAG_TOLERANCE) -> np.ndarray:
    """Map an 8x8 spectral matrix to the (X1, Y1, ..., X0, Y0) basis.

    The transformed matrix is Hermitian; its imaginary part is antisymmetric
    and drops out of every real quadrature combination, so only the real
    symmetric part is returned.

    Raises
    ------
    ValueError
        If the transformed matrix is not Hermitian within ``tol`` (which
        signals an inconsistent drift/diffusion pair upstream).
    """
    T = QUADRATURE_MAP
    Q = T @ np.asarray(S_intra) @ T.T
    scale = max(1.0, float(np.max(np.abs(Q))))
    if np.max(np.abs(Q - Q.conj().T)) > tol * scale:
        raise ValueError("quadrature spectral matrix is not Hermitian")
    return Q.real.copy()


def output_spectrum(quad_intra: np.ndarray, params: SystemParams) -> np.ndarray:
    """Apply the cavity input-output relations to a quadrature spectral matrix."""
    rates = np.repeat([params.gamma1, params.gamma2, params.gamma3, params.gamma0], 2)
    root = np.sqrt(rates)
    return np.eye(8) + 2.0 * np.outer(root, root) * np.asarray(quad_intra)


def combination_variance(spec_out: np.ndarray, coeffs) -> float:
    """Variance of ``sum_q c_q Q_q`` over (X1, Y1, X2, Y2, X3, Y3)."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (6,):
        raise ValueError("coefficients must cover the six signal quadratures")
    V = np.asarray(spec_out)[:6, :6]
    return float(c @ V @ c)


def stationary_covariance(mats: FluctuationMatrices) -> np.ndarray:
    """Normally-ordered stationary covariance of the doubled variables.

    Solves ``A C + C A^T = D``; equivalent to integrating ``S(w) / 2 pi`` over
    the whole frequency axis.
    """
    A = np.asarray(mats.A)
    # solve_continuous_lyapunov solves A X + X A^H = Q; A^T is wanted, not A^H
    n = A.shape[0]
    K = np.kron(np.eye(n), A) + np.kron(A, np.eye(n))
    vecC = np.linalg.solve(K, np.asarray(mats.D).reshape(-1, order="F"))
    return vecC.reshape((n, n), order="F")


@dataclass
class SpectralResult:
    """Per-frequency spectra of one operating point.

    ``quad_out[k]`` is the 8x8 output (co)variance matrix at ``omega_grid[k]``
    in the ``QUADRATURES`` order; ``intracavity[k]`` the complex 8x8 matrix in
    the doubled basis.
    """

    omega_grid: np.ndarray
    quad_out: np.ndarray
    intracavity: np.ndarray
    params: SystemParams

    def signal_block(self) -> np.ndarray:
        return self.quad_out[:, :6, :6]


def compute_spectra(params: SystemParams, omega_grid=None) -> SpectralResult:
    """Output spectra of the trivial steady state over a frequency grid.

    Raises
    ------
    AboveThresholdError
        If ``params`` lies above the oscillation threshold.
    """
    state = steady_state(params)
    if state.above_threshold:
        raise AboveThresholdError(
            "the linearised fluctuation analysis is invalid above threshold; "
            "use the stochastic integrators instead")
    if omega_grid is None:
        omega_grid = default_omega_grid(params.gamma0)
    omega_grid = np.asarray(omega_grid, dtype=float)
    mats = build_matrices(params, state)
    intra = np.empty((omega_grid.size, 8, 8), dtype=complex)
    quad = np.empty((omega_grid.size, 8, 8))
    for k, w in enumerate(omega_grid):
        intra[k] = intracavity_spectrum(mats, w)
        quad[k] = output_spectrum(quadrature_transform(intra[k]), params)
    return SpectralResult(omega_grid, quad, intra, params)
