"""
Threshold and steady state
==========================

Downconversion feeds modes 1 and 3 from the pump; sum-frequency generation
converts pump and mode 3 into mode 2.  The second process drains mode 3, so
the threshold rises above the bare downconversion value and disappears
altogether once chi2 reaches chi1 * sqrt(gamma2 / gamma1).
"""

import numpy as np

from cascade_opo import classify_regime, standard_params, steady_state
from cascade_opo.model import mean_field_residual

# The standard operating point: gamma0 = gamma1 = gamma3 = 1, gamma2 = 3,
# chi1 = 0.01, chi2 = 0.4 chi1.
p = standard_params()
r = classify_regime(p)
print(f"regime          {r.regime.value}")
print(f"eps_c           {r.eps_c:.6f}")
print(f"eps_c (chi2=0)  {r.eps_c_opo:.6f}")
print(f"chi2_crit       {r.chi2_crit:.6f}")

# Below threshold only the pump is populated.
s = steady_state(p.with_(epsilon=0.5 * r.eps_c))
print("\nbelow threshold: beta =", s.beta, " alphas =", s.alpha1, s.alpha2, s.alpha3)

# Above threshold all four modes are macroscopically occupied.  The common
# phase theta is free; moduli do not depend on it.
above = p.with_(epsilon=1.5 * r.eps_c)
for theta in (0.0, 1.0):
    s = steady_state(above, theta=theta)
    n1, n2, n3, nb = s.intensities
    print(f"\ntheta={theta}: |beta|^2={nb:.1f} |a1|^2={n1:.1f} |a2|^2={n2:.4f} |a3|^2={n3:.1f}")
    print(f"   residual of the mean-field equations: {mean_field_residual(above, s):.2e}")

# Sweeping chi2 shows the threshold growing without bound at chi2_crit.
print("\nchi2/chi2_crit    eps_c")
for f in np.linspace(0.0, 1.2, 7):
    rr = classify_regime(p.with_(chi2=f * r.chi2_crit))
    print(f"{f:13.2f}  {rr.eps_c:9.3f}  {rr.regime.value}")
