"""
Best violations along parameter sweeps
======================================

For every sweep point the criteria are minimised over a frequency window.
"""

import numpy as np

from cascade_opo import classify_regime, standard_params
from cascade_opo.criteria import scan_minimum

p = standard_params()
r = classify_regime(p)

# Pump sweep below threshold with the window 0 <= omega <= gamma0.
pumps = np.linspace(0.1, 0.9, 9) * r.eps_c
res = scan_minimum(p, "pump", pumps, (0.0, 1.0), 201)
print("eps/eps_c   s123     s312     s231")
for e, a, b, c in zip(pumps / r.eps_c, res.minima["s123"], res.minima["s312"], res.minima["s231"]):
    print(f"{e:8.2f}  {a:7.4f}  {b:7.4f}  {c:7.4f}")

# Widening the window to 10 gamma0 lets s231 dip just below 4.
wide = scan_minimum(p, "pump", pumps, (0.0, 10.0), 1001)
print("\nwide window, min s231:", np.round(wide.minima["s231"], 5))

# chi2 sweep upward from chi2_crit at half the bare threshold.
ratios = np.linspace(1.0, 3.0, 9)
res = scan_minimum(p.with_(epsilon=0.5 * r.eps_c_opo), "chi2", ratios * r.chi2_crit, (0.0, 1.0), 201)
print("\nchi2/chi2_crit  min s123")
for f, v in zip(ratios, res.minima["s123"]):
    print(f"{f:14.2f}  {v:.4f}")

# Without a threshold the best violation is not monotonic in the pump.
q = standard_params(chi2=0.02)
pumps = np.linspace(20, 400, 11)
res = scan_minimum(q, "pump", pumps, (0.0, 10.0), 401)
print("\nchi2 = 2 chi1, epsilon vs min s123")
for e, v in zip(pumps, res.minima["s123"]):
    print(f"{e:6.0f}  {v:.4f}")
