"""Parameters, regime classification and classical steady states.

The cavity holds a pump mode ``beta`` at frequency w0 and three signal modes
``alpha_1..3``.  Downconversion (coupling ``chi1``) splits a pump photon into
modes 1 and 3; sum-frequency generation (coupling ``chi2``) combines the pump
with mode 3 into mode 2.  All rates are expressed in units of ``gamma1``.

The classical mean-field equations are::

    d a1/dt = -g1 a1 + chi1 conj(a3) b
    d a2/dt = -g2 a2 + chi2 a3 b
    d a3/dt = -g3 a3 + chi1 conj(a1) b - chi2 a2 conj(b)
    d b/dt  = eps - g0 b - chi1 a1 a3 - chi2 a2 conj(a3)
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SystemParams",
    "Regime",
    "RegimeReport",
    "SteadyState",
    "classify_regime",
    "steady_state",
    "mean_field_drift",
    "mean_field_residual",
    "standard_params",
]

# relative tolerance used to detect the measure-zero critical coupling
CRITICAL_RTOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """One operating point of the cavity.

    Parameters
    ----------
    gamma0, gamma1, gamma2, gamma3 : float
        Cavity loss rates of the pump and the three signal modes.
    chi1 : float
        Downconversion coupling (pump -> modes 1 and 3).
    chi2 : float
        Sum-frequency coupling (pump + mode 3 -> mode 2).
    epsilon : float
        Real pump amplitude entering the cavity.
    """

    gamma0: float = 1.0
    gamma1: float = 1.0
    gamma2: float = 3.0
    gamma3: float = 1.0
    chi1: float = 0.01
    chi2: float = 0.004
    epsilon: float = 0.0

    def __post_init__(self):
        for name in ("gamma0", "gamma1", "gamma2", "gamma3"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite rate, got {value!r}")
        if not (np.isfinite(self.chi1) and self.chi1 > 0):
            raise ValueError(f"chi1 must be positive, got {self.chi1!r}")
        if not (np.isfinite(self.chi2) and self.chi2 >= 0):
            raise ValueError(f"chi2 must be non-negative, got {self.chi2!r}")
        if not (np.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon!r}")

    @property
    def gammas(self) -> np.ndarray:
        """Loss rates ordered as (gamma1, gamma2, gamma3, gamma0)."""
        return np.array([self.gamma1, self.gamma2, self.gamma3, self.gamma0])

    def with_(self, **changes) -> "SystemParams":
        """Copy with some fields replaced."""
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return SystemParams(**fields)


def standard_params(epsilon: float = 0.0, chi2: float = 0.004) -> SystemParams:
    """The loss/coupling set used throughout: g0=g1=g3=1, g2=3, chi1=0.01."""
    return SystemParams(1.0, 1.0, 3.0, 1.0, 0.01, chi2, epsilon)


class Regime(str, enum.Enum):
    WITH_THRESHOLD = "WithThreshold"
    NO_THRESHOLD = "NoThreshold"
    CRITICAL = "Critical"


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    eps_c: float
    eps_c_opo: float
    chi2_crit: float

    @property
    def has_threshold(self) -> bool:
        return self.regime is Regime.WITH_THRESHOLD


def classify_regime(params: SystemParams) -> RegimeReport:
    """Decide whether the classical equations predict an oscillation threshold.

    A threshold exists iff ``chi1**2 * gamma2 > chi2**2 * gamma1``.  The
    threshold pump is then::

        eps_c = gamma0 sqrt(gamma3) / sqrt(chi1**2/gamma1 - chi2**2/gamma2)

    which is evaluated in the factored form
    ``gamma0 sqrt(g1 g2 g3) / sqrt((chi1 sqrt(g2) - chi2 sqrt(g1))(chi1 sqrt(g2) + chi2 sqrt(g1)))``
    to avoid cancellation close to the critical coupling.
    """
    p = params
    eps_c_opo = p.gamma0 * math.sqrt(p.gamma1 * p.gamma3) / p.chi1
    chi2_crit = p.chi1 * math.sqrt(p.gamma2 / p.gamma1)

    lhs = p.chi1**2 * p.gamma2
    rhs = p.chi2**2 * p.gamma1
    if abs(lhs - rhs) <= CRITICAL_RTOL * max(lhs, rhs):
        return RegimeReport(Regime.CRITICAL, math.inf, eps_c_opo, chi2_crit)
    if lhs < rhs:
        return RegimeReport(Regime.NO_THRESHOLD, math.inf, eps_c_opo, chi2_crit)

    a = p.chi1 * math.sqrt(p.gamma2)
    b = p.chi2 * math.sqrt(p.gamma1)
    eps_c = p.gamma0 * math.sqrt(p.gamma1 * p.gamma2 * p.gamma3) / math.sqrt((a - b) * (a + b))
    return RegimeReport(Regime.WITH_THRESHOLD, eps_c, eps_c_opo, chi2_crit)


@dataclass(frozen=True)
class SteadyState:
    """Mean-field amplitudes of one steady state."""

    beta: complex
    alpha1: complex
    alpha2: complex
    alpha3: complex
    theta: float = 0.0
    branch: int = 1
    above_threshold: bool = False

    @property
    def amplitudes(self) -> np.ndarray:
        """Complex vector (alpha1, alpha2, alpha3, beta)."""
        return np.array([self.alpha1, self.alpha2, self.alpha3, self.beta], dtype=complex)

    @property
    def intensities(self) -> np.ndarray:
        """|amplitude|**2 ordered as (alpha1, alpha2, alpha3, beta)."""
        return np.abs(self.amplitudes) ** 2

    @classmethod
    def from_amplitudes(cls, amps, **kw) -> "SteadyState":
        a1, a2, a3, b = (complex(x) for x in amps)
        return cls(beta=b, alpha1=a1, alpha2=a2, alpha3=a3, **kw)


def steady_state(params: SystemParams, branch: int = 1, theta: float = 0.0) -> SteadyState:
    """Closed-form steady state of the mean-field equations.

    Below threshold (and in the no-threshold or critical regimes) the signal
    modes are empty and ``beta = eps / gamma0``.  Above threshold the pump is
    clamped at ``eps_c / gamma0`` and the signal amplitudes are

    ``alpha3 = s r exp(i theta)``, ``alpha1 = (chi1 beta / gamma1) conj(alpha3)``,
    ``alpha2 = (chi2 beta / gamma2) alpha3``

    with ``r**2 = (eps - eps_c) / ((eps_c/gamma0)(chi1**2/gamma1 + chi2**2/gamma2))``
    and sign ``s = branch``.

    Parameters
    ----------
    params : SystemParams
    branch : {+1, -1}
        Common sign of the signal amplitudes.
    theta : float
        The free phase of the oscillating solution.
    """
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    p = params
    report = classify_regime(p)
    if not report.has_threshold or p.epsilon <= report.eps_c:
        return SteadyState(beta=complex(p.epsilon / p.gamma0), alpha1=0j, alpha2=0j, alpha3=0j,
                           theta=float(theta), branch=branch, above_threshold=False)

    eps_c = report.eps_c
    beta = eps_c / p.gamma0
    r = math.sqrt((p.epsilon - eps_c) / (beta * (p.chi1**2 / p.gamma1 + p.chi2**2 / p.gamma2)))
    phase = np.exp(1j * theta)
    alpha3 = branch * r * phase
    alpha1 = (p.chi1 * beta / p.gamma1) * np.conj(alpha3)
    alpha2 = (p.chi2 * beta / p.gamma2) * alpha3
    return SteadyState(beta=complex(beta), alpha1=complex(alpha1), alpha2=complex(alpha2),
                       alpha3=complex(alpha3), theta=float(theta), branch=branch,
                       above_threshold=True)


def mean_field_drift(params: SystemParams, amps) -> np.ndarray:
    """Right-hand sides of the mean-field equations.

    ``amps`` is (alpha1, alpha2, alpha3, beta); trailing axes broadcast.
    """
    p = params
    a1, a2, a3, b = (np.asarray(x) for x in amps)
    return np.stack([
        -p.gamma1 * a1 + p.chi1 * np.conj(a3) * b,
        -p.gamma2 * a2 + p.chi2 * a3 * b,
        -p.gamma3 * a3 + p.chi1 * np.conj(a1) * b - p.chi2 * a2 * np.conj(b),
        p.epsilon - p.gamma0 * b - p.chi1 * a1 * a3 - p.chi2 * a2 * np.conj(a3),
    ])


def mean_field_residual(params: SystemParams, state: SteadyState) -> float:
    """Euclidean norm of the mean-field right-hand sides at ``state``."""
    return float(np.linalg.norm(mean_field_drift(params, state.amplitudes)))
