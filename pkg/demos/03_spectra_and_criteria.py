"""
Output spectra and inseparability criteria
==========================================

Below threshold the output quadrature spectra follow from the linearised
fluctuations.  Combinations of them form van Loock-Furusawa criteria; a
value under 4 witnesses entanglement.
"""

import numpy as np

from cascade_opo import classify_regime, standard_params
from cascade_opo.criteria import SYMMETRIC, criteria_spectrum
from cascade_opo.spectra import compute_spectra

p = standard_params()
eps_c = classify_regime(p).eps_c
omega = np.linspace(0.0, 10.0, 1001)

# Shot noise is 1 in every quadrature.  Modes 1 and 3 are correlated in X
# and anticorrelated in Y, like a non-degenerate parametric oscillator.
spec = compute_spectra(p.with_(epsilon=0.5 * eps_c), [0.0, 1.0])
for w, V in zip(spec.omega_grid, spec.quad_out):
    print(f"omega={w}: V(X1)={V[0, 0]:.3f} V(X1,X3)={V[0, 4]:.3f} V(Y1,Y3)={V[1, 5]:.3f}")

for ratio in (0.5, 0.9):
    cs = criteria_spectrum(p.with_(epsilon=ratio * eps_c), omega)
    print(f"\neps = {ratio} eps_c")
    for name, values in cs.as_dict().items():
        k = int(np.argmin(values))
        print(f"  {name:5s} min {values[k]:7.3f} at omega = {omega[k]:.2f}  (omega=0: {values[0]:.3g})")
    insep = cs.inseparable()
    print(f"  fully inseparable at omega=0: {insep[0]};"
          f" at some omega: {insep.any()}")

# In the regime without a threshold the violations are weaker.
q = standard_params(chi2=0.025)
q = q.with_(epsilon=1.5 * classify_regime(q).eps_c_opo)
cs = criteria_spectrum(q, omega)
print("\nno threshold, chi2 = 2.5 chi1:",
      {k: round(float(getattr(cs, k).min()), 3) for k in SYMMETRIC})
