"""A forcing term with no time average still yields a solution with one.

``f(t) = 2 t^2 sin(t^2)`` swings ever faster and harder, and its running mean
tracks ``-cos(t^2)`` forever.  Averages of ``f`` over short windows do tend
to zero in the Cesàro sense, which is all an integrodifferential equation
with integrable resolvent needs: its solution settles.  A Volterra integral
equation with the same forcing passes ``f`` straight through and does not.

Run with ``python demos/forcing_without_limit.py``.
"""
import numpy as np

from volterra_ces import (FiniteSignedMeasure, Scenario, estimate_limit, interval_average_map,
                          pathological_f)
from volterra_ces.solvers import solve

T = 200.0
f = pathological_f(1.0, T)          # step chosen to resolve the oscillation up to T
print(f"step h = {f.h:.3e}, {f.n} steps")

ef = estimate_limit(f)
print(f"f: {ef.verdict}, running mean spread on [T/2, T] = {ef.spread:.3f}")
for theta in (0.25, 0.5, 1.0):
    e = estimate_limit(interval_average_map(f, theta))
    print(f"  int_t^(t+{theta:g}) f: {e.verdict}, limit {e.estimate:+.4f}")

nu = FiniteSignedMeasure(atoms=((0.0, -2.0),), exp_terms=((1.0, 1.0),))
x = solve(Scenario("ide", f.h, T, forcing=f, measure=nu))
ex = estimate_limit(x, 2e-2)
print(f"integrodifferential solution: {ex.verdict}, limit {ex.estimate:+.4f}")

y = solve(Scenario("integral", f.h, T, forcing=f, kernel=lambda t: np.exp(-2 * t)))
ey = estimate_limit(y)
print(f"integral-equation solution:   {ey.verdict}, spread {ey.spread:.3f}")
