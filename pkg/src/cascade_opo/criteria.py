"""Tripartite inseparability witnesses built from output spectra.

Two families of van Loock-Furusawa inequalities are evaluated, both bounded
below by 4 for any fully separable state with the ``X = a + a^dag``
normalisation (the vacuum saturates every bound):

pairwise, with real gains ``g``::

    S12 = V(X1 - X2) + V(Y1 + Y2 + g3 Y3)
    S13 = V(X1 - X3) + V(Y1 + g2 Y2 + Y3)
    S23 = V(X2 - X3) + V(g1 Y1 + Y2 + Y3)

violation of any two proves full inseparability; and symmetric::

    S123 = V(X1 - (X2 + X3)/sqrt2) + V(Y1 + (Y2 + Y3)/sqrt2)

with cyclic relabellings S312, S231, any single violation being sufficient.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import Regime, SystemParams, classify_regime, steady_state
from .spectra import combination_variance, compute_spectra, default_omega_grid

__all__ = [
    "BOUND",
    "PAIRWISE",
    "SYMMETRIC",
    "CRITERIA",
    "GainSet",
    "CriteriaSpectrum",
    "ZeroVarianceError",
    "optimal_gains",
    "pairwise_criteria",
    "symmetric_criteria",
    "criteria_spectrum",
    "fully_inseparable",
    "ScanResult",
    "scan_minimum",
    "pairwise_coefficients",
    "symmetric_coefficients",
]

#: Separable-state bound for every criterion with unit vacuum quadrature variance.
BOUND = 4.0

PAIRWISE = ("s12", "s13", "s23")
SYMMETRIC = ("s123", "s312", "s231")
CRITERIA = PAIRWISE + SYMMETRIC

_X = (0, 2, 4)
_Y = (1, 3, 5)
_R2 = 1.0 / np.sqrt(2.0)


class ZeroVarianceError(ZeroDivisionError):
    """A Y-quadrature variance vanished, so the optimal gain is undefined."""


@dataclass(frozen=True)
class GainSet:
    g1: float = 0.0
    g2: float = 0.0
    g3: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.g1, self.g2, self.g3])


def _vec(x=(0, 0, 0), y=(0, 0, 0)) -> np.ndarray:
    c = np.zeros(6)
    c[list(_X)] = x
    c[list(_Y)] = y
    return c


def pairwise_coefficients(gains: GainSet):
    """Coefficient vectors (X part, Y part) of the three pairwise criteria."""
    g1, g2, g3 = gains.g1, gains.g2, gains.g3
    return {
        "s12": (_vec(x=(1, -1, 0)), _vec(y=(1, 1, g3))),
        "s13": (_vec(x=(1, 0, -1)), _vec(y=(1, g2, 1))),
        "s23": (_vec(x=(0, 1, -1)), _vec(y=(g1, 1, 1))),
    }


def symmetric_coefficients():
    """Coefficient vectors of the three symmetric criteria."""
    return {
        "s123": (_vec(x=(1, -_R2, -_R2)), _vec(y=(1, _R2, _R2))),
        "s312": (_vec(x=(-_R2, -_R2, 1)), _vec(y=(_R2, _R2, 1))),
        "s231": (_vec(x=(-_R2, 1, -_R2)), _vec(y=(_R2, 1, _R2))),
    }


def optimal_gains(spec_out: np.ndarray) -> GainSet:
    """Gains minimising the Y-part of each pairwise criterion.

    ``g1 = -(V(Y1,Y2) + V(Y1,Y3)) / V(Y1)`` and cyclically for g2, g3.
    """
    V = np.asarray(spec_out)
    y1, y2, y3 = _Y
    var = V[y1, y1], V[y2, y2], V[y3, y3]
    if min(var) <= 0:
        raise ZeroVarianceError("Y-quadrature variance must be positive")
    c12, c13, c23 = V[y1, y2], V[y1, y3], V[y2, y3]
    return GainSet(
        g1=float(-(c12 + c13) / var[0]),
        g2=float(-(c12 + c23) / var[1]),
        g3=float(-(c13 + c23) / var[2]),
    )


def pairwise_criteria(spec_out: np.ndarray, gains: GainSet | None = None):
    """(s12, s13, s23) at one frequency; optimal gains are used if none given."""
    if gains is None:
        gains = optimal_gains(spec_out)
    coeffs = pairwise_coefficients(gains)
    return tuple(combination_variance(spec_out, cx) + combination_variance(spec_out, cy)
                 for cx, cy in (coeffs[k] for k in PAIRWISE))


def symmetric_criteria(spec_out: np.ndarray):
    """(s123, s312, s231) at one frequency."""
    coeffs = symmetric_coefficients()
    return tuple(combination_variance(spec_out, cx) + combination_variance(spec_out, cy)
                 for cx, cy in (coeffs[k] for k in SYMMETRIC))


def fully_inseparable(values: dict, bound: float = BOUND) -> bool:
    """True if at least two pairwise or at least one symmetric criterion is violated."""
    pair = sum(1 for k in PAIRWISE if k in values and values[k] < bound)
    sym = sum(1 for k in SYMMETRIC if k in values and values[k] < bound)
    return pair >= 2 or sym >= 1


@dataclass
class CriteriaSpectrum:
    omega_grid: np.ndarray
    s12: np.ndarray
    s13: np.ndarray
    s23: np.ndarray
    s123: np.ndarray
    s312: np.ndarray
    s231: np.ndarray
    gains: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in CRITERIA}

    def inseparable(self) -> np.ndarray:
        """Per-frequency full-inseparability verdict."""
        return np.array([fully_inseparable({k: getattr(self, k)[i] for k in CRITERIA})
                         for i in range(self.omega_grid.size)])


def criteria_spectrum(params: SystemParams, omega_grid=None) -> CriteriaSpectrum:
    """All six criteria over a frequency grid, gains optimised per frequency."""
    spec = compute_spectra(params, omega_grid)
    n = spec.omega_grid.size
    out = {k: np.empty(n) for k in CRITERIA}
    gains = []
    for i in range(n):
        V = spec.quad_out[i]
        g = optimal_gains(V)
        gains.append(g)
        for k, v in zip(PAIRWISE, pairwise_criteria(V, g)):
            out[k][i] = v
        for k, v in zip(SYMMETRIC, symmetric_criteria(V)):
            out[k][i] = v
    return CriteriaSpectrum(spec.omega_grid, gains=gains, **out)


@dataclass
class ScanResult:
    """Minima over frequency of the six criteria along a sweep.

    ``skipped[i]`` marks sweep points at or above threshold, whose entries
    are NaN.
    """

    sweep: str
    values: np.ndarray
    minima: dict
    argmin_omega: dict
    gains_at_min: dict
    skipped: np.ndarray


def scan_minimum(params: SystemParams, sweep: str, values, omega_window=(0.0, 10.0),
                 n_omega: int = 1001, workers: int | None = None) -> ScanResult:
    """Sweep the pump or chi2 and record each criterion's minimum over frequency.

    Parameters
    ----------
    params : SystemParams
        Base operating point; the swept field is overwritten.
    sweep : {"pump", "chi2"}
    values : array_like
        Sweep values (absolute epsilon or chi2).
    omega_window : (float, float)
        Frequency window in units of gamma0.
    """
    if sweep not in ("pump", "chi2"):
        raise ValueError("sweep must be 'pump' or 'chi2'")
    values = np.asarray(values, dtype=float)
    lo, hi = omega_window
    omega = np.linspace(lo * params.gamma0, hi * params.gamma0, n_omega)

    def one(v):
        p = params.with_(epsilon=v) if sweep == "pump" else params.with_(chi2=v)
        report = classify_regime(p)
        if report.regime is Regime.WITH_THRESHOLD and p.epsilon >= report.eps_c:
            return None
        if steady_state(p).above_threshold:
            return None
        return criteria_spectrum(p, omega)

    if workers and workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, values))
    else:
        results = [one(v) for v in values]

    n = values.size
    minima = {k: np.full(n, np.nan) for k in CRITERIA}
    argmin = {k: np.full(n, np.nan) for k in CRITERIA}
    gains = {k: np.full((n, 3), np.nan) for k in CRITERIA}
    skipped = np.zeros(n, dtype=bool)
    for i, cs in enumerate(results):
        if cs is None:
            skipped[i] = True
            continue
        for k in CRITERIA:
            arr = getattr(cs, k)
            j = int(np.argmin(arr))
            minima[k][i] = arr[j]
            argmin[k][i] = cs.omega_grid[j]
            gains[k][i] = cs.gains[j].as_array()
    return ScanResult(sweep, values, minima, argmin, gains, skipped)
