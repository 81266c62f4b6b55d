"""Mean square of the solution under additive white noise.

With noise intensity ``sigma`` entering additively, ``X = x + int r(t-s) sigma(s) dB(s)``
and Itô's isometry gives

    E[X(t)^2] = x(t)^2 + int_0^t r(t-s)^2 sigma(s)^2 ds

for a deterministic initial value.  Multiplicative noise is not covered.
"""
from __future__ import annotations

import numpy as np

from .cesaro import estimate_limit
from .numerics import GridFunction, convolve, cumulative_integral
from .reports import Check, Report


def mean_square_additive(x: GridFunction, b, sigma) -> GridFunction:
    """``t -> x(t)^2 + (r^2 * sigma^2)(t)`` on the grid of ``x``.

    ``sigma`` is a grid function on the same grid, a vectorised callable or
    a constant.
    """
    r = b.r
    if abs(r.h - x.h) > 1e-12 * x.h or r.n < x.n:
        raise ValueError(f"resolvent grid (h={r.h:g}, T={r.horizon:g}) does not match "
                         f"the solution (h={x.h:g}, T={x.horizon:g})")
    r = r.truncate(x.horizon) if r.n > x.n else r
    sig = _sigma_samples(x, sigma)
    noise = convolve(r.with_values(r.values ** 2), x.with_values(sig ** 2))
    return x.with_values(x.values ** 2 + noise.values)


def _sigma_samples(x, sigma):
    if isinstance(sigma, GridFunction):
        if not sigma.same_grid(x) or sigma.n < x.n:
            raise ValueError("noise intensity is on a different grid")
        return np.array(sigma.values[: x.n + 1])
    if callable(sigma):
        return np.broadcast_to(np.asarray(sigma(x.t), dtype=float), x.t.shape).copy()
    return np.full(x.t.shape, float(sigma))


def mean_square_limit_check(x: GridFunction, b, sigma, tol: float = 1e-2) -> Report:
    """Cesàro limit of the noise part against ``S int r^2`` (``S`` the limit of ``sigma^2``)."""
    ms = mean_square_additive(x, b, sigma)
    noise = ms.with_values(ms.values - x.values ** 2)
    sig2 = _sigma_samples(x, sigma) ** 2
    S = estimate_limit(x.with_values(sig2), tol)
    r2 = float(cumulative_integral(b.r.with_values(b.r.values ** 2))[-1])
    en = estimate_limit(noise, tol)
    rep = Report("mean_square_limit")
    rep.info["r_integrable"] = b.integrable_verdict
    rep.info["sigma2_limit"] = S.estimate
    rep.info["integral_r_squared"] = r2
    rep.add(Check.compare("noise_limit", S.estimate * r2, en.estimate, tol))
    return rep
