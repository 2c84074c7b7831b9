"""
Linear stability of the steady states
=====================================

Fluctuations about a steady state obey a linear Ornstein-Uhlenbeck process
with drift matrix A (eight doubled phase-space variables) and diffusion D.
Stability needs every eigenvalue of A to have a positive real part.
"""

import numpy as np

from cascade_opo import classify_regime, standard_params, steady_state
from cascade_opo.stability import (
    build_matrices,
    characteristic_roots,
    eigen_analysis,
    equal_loss_eigenvalues,
    match_multisets,
    stability_map,
)

p = standard_params()
eps_c = classify_regime(p).eps_c

for ratio in (0.5, 0.9, 1.0, 1.5):
    q = p.with_(epsilon=ratio * eps_c)
    rep = eigen_analysis(build_matrices(q, steady_state(q)))
    print(f"eps = {ratio:.1f} eps_c: min Re(lambda) = {rep.min_real_part:+.4f}"
          f"  stable={rep.stable} marginal={rep.marginal}")

# At 1.5 eps_c one eigenvalue sits at zero: the free phase of the signals.

# Below threshold the eigenvalues are roots of a factored polynomial.
q = p.with_(epsilon=0.7 * eps_c)
lam = eigen_analysis(build_matrices(q, steady_state(q))).eigenvalues
print("\neigensolver vs polynomial roots:", match_multisets(lam, characteristic_roots(q)))

# With equal signal losses the roots are available in closed form.
q = standard_params(epsilon=50.0).with_(gamma2=1.0)
print("equal losses:", np.round(equal_loss_eigenvalues(q).real, 6))

# A coarse map over the (chi2, epsilon) plane.
chi2 = np.linspace(0.0, 3.0, 13) * classify_regime(p).chi2_crit
eps = np.linspace(10.0, 300.0, 12)
classes, _ = stability_map(p, chi2, eps)
symbol = {"BelowThresholdStable": ".", "AboveThresholdUnstable": "x",
          "NoThresholdStable": "o", "Marginal": "?"}
print("\nrows: epsilon from 300 down to 10; columns: chi2 from 0 to 3 chi2_crit")
for j in reversed(range(eps.size)):
    print(f"{eps[j]:6.1f}  " + "".join(symbol[c.value] for c in classes[:, j]))
