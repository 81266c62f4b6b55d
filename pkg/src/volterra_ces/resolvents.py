"""Differential, delay and integral resolvents on a uniform grid."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _stepping
from .measures import (FiniteSignedMeasure, as_halfline, atom_lags, density_samples,
                       total_mass, TAIL_EPS)
from .numerics import GridFunction, _steps, cumulative_integral, node_index
from .reports import Check, Report, FAIL, INCONCLUSIVE

log = logging.getLogger(__name__)

YES, NO, MAYBE = "yes", "no", "inconclusive"

#: relative level |r| must fall below before the horizon for a "yes"
DECAY_LEVEL = 1e-8
#: stiffness bound on |w0| * h for the atom at zero
STEP_BOUND = 0.5
#: horizon of the direct-scheme cross-check of the Markovian lift
LIFT_CHECK_HORIZON = 20.0


@dataclass
class ResolventBundle:
    """A resolvent on a grid with its derivative and integrability diagnostics.

    For integral resolvents ``r_prime`` and ``integral_r_prime`` are ``None``.
    """

    r: GridFunction
    r_prime: Optional[GridFunction]
    integral_r: float
    integral_r_prime: Optional[float]
    tail_estimate: float
    integrable_verdict: str
    kind: str = "differential"
    diagnostics: dict = field(default_factory=dict)

    @property
    def h(self):
        return self.r.h


def decay_verdict(r: np.ndarray, h: float):
    """Heuristic integrability verdict from the late-time envelope of ``|r|``.

    Returns ``(verdict, tail_estimate, slope)``.  ``yes`` needs ``|r|`` to
    stay below ``DECAY_LEVEL * max|r|`` before the horizon with a negative
    fitted exponential rate; ``no`` is reported when the envelope fails to
    halve over the last half of the horizon.
    """
    a = np.abs(r)
    peak = a.max()
    if peak == 0.0:
        return YES, 0.0, -np.inf
    env = np.maximum.accumulate(a[::-1])[::-1]   # sup of |r| over [t, T]
    below = np.nonzero(env <= DECAY_LEVEL * peak)[0]
    end = below[0] if below.size else a.size - 1
    start = end // 2
    t = h * np.arange(a.size)
    seg = slice(start, end + 1)
    pos = env[seg] > 0
    if end - start < 2 or pos.sum() < 2:
        slope = -np.inf
    else:
        slope = float(np.polyfit(t[seg][pos], np.log(env[seg][pos]), 1)[0])
    if below.size and slope < 0:
        tail = float(env[-1] / -slope) if np.isfinite(slope) else 0.0
        return YES, tail, slope
    half = a.size // 2
    if env[-1] >= 0.5 * env[half]:
        return NO, np.inf, slope
    return MAYBE, np.inf, slope


def _check_step(w0, rates, h):
    stiff = max([abs(w0)] + [abs(c) for c in rates])
    if stiff * h > STEP_BOUND:
        raise ValueError(f"step h = {h:g} too large for the stiffest memory rate {stiff:g}"
                         f" (need rate*h <= {STEP_BOUND})")


def _bundle_from(x, dx, jumps, h, kind, diagnostics):
    r = GridFunction(h, x)
    rp = GridFunction(h, dx)
    verdict, tail, slope = decay_verdict(x, h)
    diagnostics.setdefault("fitted_rate", slope)
    if jumps:
        diagnostics["r_prime_jumps"] = jumps
    return ResolventBundle(r, rp, float(cumulative_integral(r)[-1]),
                           _stepping.trapezoid_with_jumps(dx, h, jumps), tail, verdict,
                           kind, diagnostics)


def _blown_up(err, h, kind, diagnostics):
    x = err.values
    diagnostics["blowup_time"] = err.time
    r = GridFunction(h, x) if x.size else GridFunction(h, [1.0])
    log.warning("%s resolvent overflowed at t = %g", kind, err.time)
    return ResolventBundle(r, None, np.inf, np.inf, np.inf, NO, kind, diagnostics)


def memory_terms(nu: FiniteSignedMeasure, h: float, n: int, use_lift=True, snap_tol=None):
    """Split a halfline measure into grid atoms, density samples and lift modes."""
    lags, weights = atom_lags(nu, h, snap_tol)
    lift = None
    dens = np.zeros(0)
    if use_lift and nu.exp_terms and nu.support_bound is None:
        b, c = zip(*nu.exp_terms)
        lift = (np.array(b), np.array(c))
    else:
        dens = density_samples(nu, h, n)
    return lags, weights, dens, lift


def differential_resolvent(nu: FiniteSignedMeasure, h: float, T: float, method="auto",
                           snap_tol=None) -> ResolventBundle:
    """Solve ``r' = r * nu``, ``r(0) = 1`` on ``[0, T]``.

    ``method`` is ``"direct"`` (history convolution), ``"lift"`` (auxiliary
    exponential states, needs ``nu.exp_terms``) or ``"auto"``, which lifts
    when possible and cross-checks the lift against the direct scheme on
    ``[0, min(T, 20)]``.
    """
    if nu.past:
        raise ValueError("differential resolvent expects a halfline measure; use fde_resolvent")
    n = _steps(T, h)
    can_lift = bool(nu.exp_terms) and nu.support_bound is None
    if method == "lift" and not can_lift:
        raise ValueError("Markovian lift needs an untruncated exponential-sum density")
    use_lift = can_lift and method in ("auto", "lift")
    lags, weights, dens, lift = memory_terms(nu, h, n, use_lift, snap_tol)
    w0 = float(sum(w for k, w in zip(lags, weights) if k == 0))
    _check_step(w0 + (0.5 * h * dens[0] if dens.size else 0.0),
                lift[1] if lift is not None else (), h)
    diag = {"method": "lift" if use_lift else "direct"}
    if T < 100:
        log.debug("horizon %g may be short for an integrability verdict", T)
    try:
        x, dx, jumps = _stepping.heun_memory(h, n, 1.0, lags, weights, dens, lift)
    except _stepping.BlowUpError as err:
        return _blown_up(err, h, "differential", diag)
    if use_lift and method == "auto":
        m = min(n, _steps_floor(LIFT_CHECK_HORIZON, h))
        d_direct = density_samples(nu, h, m)
        x_direct = _stepping.heun_memory(h, m, 1.0, lags, weights, d_direct)[0]
        err = float(np.max(np.abs(x_direct - x[: m + 1])))
        diag["lift_crosscheck"] = err
        if err > max(1e-6, 1e-6 * (h / 1e-3) ** 2) * 10:
            log.warning("Markovian lift and direct scheme differ by %.3g", err)
    return _bundle_from(x, dx, jumps, h, "differential", diag)


def _steps_floor(length, h):
    return int(np.floor(length / h + 1e-9))


def fde_resolvent(mu: FiniteSignedMeasure, h: float, T: float, spectral=True,
                  snap_tol=None) -> ResolventBundle:
    """Resolvent of the delay equation with memory measure ``mu`` on ``[-tau, 0]``.

    ``r_tau`` vanishes for negative times, so stepping is the method of
    steps: each node reads only computed history.  When ``spectral`` is set
    the characteristic roots decide integrability (``v0 < 0``), overriding
    the envelope heuristic whenever the root count is certified.
    """
    if mu.support_bound is None:
        raise ValueError("delay resolvent needs a measure with a support bound tau")
    tau = mu.support_bound
    if tau > 0:
        node_index(tau, h, snap_tol)
    nu = as_halfline(mu)
    n = _steps(T, h)
    lags, weights, dens, _ = memory_terms(nu, h, n, use_lift=False, snap_tol=snap_tol)
    w0 = float(sum(w for k, w in zip(lags, weights) if k == 0))
    _check_step(w0 + (0.5 * h * dens[0] if dens.size else 0.0), (), h)
    diag = {"method": "method_of_steps", "tau": tau}
    try:
        x, dx, jumps = _stepping.heun_memory(h, n, 1.0, lags, weights, dens)
        bundle = _bundle_from(x, dx, jumps, h, "fde", diag)
    except _stepping.BlowUpError as err:
        bundle = _blown_up(err, h, "fde", diag)
    if spectral:
        from .spectral import locate_roots, integrability_verdict
        rs = locate_roots(mu)
        diag["roots"] = rs
        diag["v0"] = rs.v0
        try:
            sv = integrability_verdict(rs)
        except ValueError:
            sv = MAYBE
        diag["heuristic_verdict"] = bundle.integrable_verdict
        if sv != MAYBE:
            bundle.integrable_verdict = sv
    return bundle


def integral_resolvent(k, h: float, T: float) -> ResolventBundle:
    """Solve ``r_k = k + r_k * k`` on ``[0, T]``.

    ``k`` is a :class:`GridFunction` or a vectorised callable.  The derivative
    fields of the bundle are unused and set to ``None``.
    """
    n = _steps(T, h)
    ks = _kernel_samples(k, h, n)
    diag = {"method": "volterra_trapezoid", "r_prime": "unused"}
    forcing = np.zeros(n + 1)
    forcing[: ks.size] = ks
    try:
        x = _stepping.volterra_trapezoid(ks, forcing, h)
    except _stepping.BlowUpError as err:
        return _blown_up(err, h, "integral", diag)
    r = GridFunction(h, x)
    verdict, tail, slope = decay_verdict(x, h)
    diag["fitted_rate"] = slope
    return ResolventBundle(r, None, float(cumulative_integral(r)[-1]), None, tail,
                           verdict, "integral", diag)


def _kernel_samples(k, h, n):
    if isinstance(k, GridFunction):
        if abs(k.h - h) <= 1e-12 * h:
            v = np.zeros(n + 1)
            m = min(n + 1, len(k))
            v[:m] = k.values[:m]
        else:
            t = h * np.arange(n + 1)
            v = np.where(t <= k.horizon, k(np.minimum(t, k.horizon)), 0.0)
    else:
        t = h * np.arange(n + 1)
        v = np.broadcast_to(np.asarray(k(t), dtype=float), t.shape).copy()
    if not np.all(np.isfinite(v)):
        raise ValueError("kernel produced non-finite samples")
    peak = np.max(np.abs(v))
    if peak == 0.0:
        return np.zeros(0)
    keep = np.nonzero(np.abs(v) > TAIL_EPS * peak)[0]
    return v[: keep[-1] + 1]


def check_resolvent_integrals(b: ResolventBundle, m: FiniteSignedMeasure, tol=1e-3) -> Report:
    """Check ``int r = -1/m(R+)`` and ``int r' = -1`` for an integrable resolvent."""
    if b.r_prime is None:
        raise ValueError("integral identities need a differential or delay resolvent")
    rep = Report("resolvent_integrals")
    rep.info["r_integrable"] = b.integrable_verdict
    mass = total_mass(m)
    rep.info["total_mass"] = mass
    if b.integrable_verdict != YES:
        note = "resolvent not shown integrable; identities not applicable"
        rep.add(Check("integral_r", None, b.integral_r, tol, INCONCLUSIVE, note))
        rep.add(Check("integral_r_prime", -1.0, b.integral_r_prime, tol, INCONCLUSIVE, note))
        return rep
    if mass == 0.0:
        rep.add(Check("integral_r", None, b.integral_r, tol, FAIL,
                      "total mass is zero: -1/m(R+) undefined"))
    else:
        rep.add(Check.compare("integral_r", -1.0 / mass, b.integral_r, tol))
    rep.add(Check.compare("integral_r_prime", -1.0, b.integral_r_prime, tol))
    return rep
