"""Mean square of ``dX = -X dt + dB`` from the deterministic resolvent.

With additive noise, ``E[X(t)^2] = x(t)^2 + int_0^t r(s)^2 ds`` and here
``r(t) = exp(-t)``, so the mean square climbs to ``1/2``.

Run with ``python demos/mean_square.py``.
"""
import math

from volterra_ces import FiniteSignedMeasure, Scenario, differential_resolvent, mean_square_additive
from volterra_ces.solvers import solve

h, T = 1e-3, 10.0
nu = FiniteSignedMeasure.dirac(0.0, -1.0)
ms = mean_square_additive(solve(Scenario("ide", h, T, measure=nu)),
                          differential_resolvent(nu, h, T), 1.0)
for t in (0.5, 1.0, 2.0, 5.0, 10.0):
    print(f"t = {t:4.1f}  E[X^2] = {ms(t):.6f}  closed form {0.5 * (1 - math.exp(-2 * t)):.6f}")
