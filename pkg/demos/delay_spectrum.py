"""Characteristic roots decide whether delay solutions inherit time averages.

For ``x'(t) = -0.3 x(t-1) + f`` every root lies in the left half plane, so
the resolvent is integrable and a forcing with a limit gives a solution with
one.  For ``x'(t) = -(pi/2) x(t-1) + f`` the roots ``+-i pi/2`` sit on the
imaginary axis; forcing tuned to them keeps the running mean of the solution
oscillating.

Run with ``python demos/delay_spectrum.py``.
"""
import math

from volterra_ces import (FiniteSignedMeasure, Scenario, estimate_limit, fde_resolvent,
                          integrability_verdict, locate_roots, resonant_forcing)
from volterra_ces.spectral import resonant_coefficients
from volterra_ces.solvers import solve

h, T = 1e-2, 2000.0
for weight in (-0.3, -math.pi / 2):
    mu = FiniteSignedMeasure.dirac(-1.0, weight, past=True)
    rs = locate_roots(mu)
    print(f"weight {weight:+.4f}: {len(rs.roots)} roots in {tuple(round(v, 2) for v in rs.rectangle)}")
    for lam, m in sorted(rs.roots, key=lambda p: -p[0].real)[:4]:
        print(f"    {lam.real:+.10f} {lam.imag:+.10f}i  (multiplicity {m})")
    print(f"  v0 = {rs.v0:+.3e}, resolvent integrable: {integrability_verdict(rs)}")

mu_c = FiniteSignedMeasure.dirac(-1.0, -math.pi / 2, past=True)
rs = locate_roots(mu_c)
beta, residue, c1, k1 = resonant_coefficients(mu_c, rs)
print(f"resonant forcing: k1 sin({beta:.4f} t) - c1 cos({beta:.4f} t), c1 = {c1:.4f}, k1 = {k1:.4f}")
f = resonant_forcing(mu_c, rs, h, T)
x = solve(Scenario("fde", h, T, forcing=f, measure=mu_c, history=0.0))
e = estimate_limit(x)
print(f"forced solution: {e.verdict}, running mean spread {e.spread:.3f}")
print("resolvent verdict from stepping and roots:",
      fde_resolvent(mu_c, h, 200.0).integrable_verdict)
