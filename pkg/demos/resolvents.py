"""Resolvents of three memory equations and the integrals they must satisfy.

Run with ``python demos/resolvents.py``.
"""
import numpy as np

from volterra_ces import (FiniteSignedMeasure, check_resolvent_integrals, differential_resolvent,
                          fde_resolvent, integral_resolvent)

h, T = 1e-3, 100.0

# r' = -r: the resolvent is exp(-t)
nu_a = FiniteSignedMeasure.dirac(0.0, -1.0)
# r' = -2r + int_0^t exp(-s) r(t-s) ds, stepped through one auxiliary exponential state
nu_b = FiniteSignedMeasure(atoms=((0.0, -2.0),), exp_terms=((1.0, 1.0),))
# r'(t) = -0.3 r(t-1): constant until the delay kicks in
mu_d = FiniteSignedMeasure.dirac(-1.0, -0.3, past=True)

for name, b, m in (("x' = -x", differential_resolvent(nu_a, h, T), nu_a),
                   ("exponential memory", differential_resolvent(nu_b, h, T), nu_b),
                   ("delay 1, weight -0.3", fde_resolvent(mu_d, h, T), mu_d)):
    print(f"{name:22s} r(1) = {b.r(1.0):.6f}  r(2) = {b.r(2.0):.6f}  "
          f"int r = {b.integral_r:.6f}  integrable: {b.integrable_verdict}")
    print(check_resolvent_integrals(b, m).to_text())


# the integral resolvent of k = exp(-2t) is exp(-t)
rk = integral_resolvent(lambda t: np.exp(-2 * t), h, 5.0)
print("integral kernel exp(-2t): max |r_k - exp(-t)| =",
      f"{np.max(np.abs(rk.r.values - np.exp(-rk.r.t))):.2e}")
