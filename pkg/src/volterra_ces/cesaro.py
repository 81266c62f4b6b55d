"""Cesàro means, interval averages and the limit statements built on them.

A finite horizon cannot prove a limit, so convergence is declared
operationally from the running mean ``t -> (1/t) int_0^t f``:

* ``estimate`` is the mean of the curve over the last dyadic window ``[T/2, T]``;
* ``half_width`` is half its spread on that window;
* ``converged`` when ``half_width <= tol``; ``not_converged`` when the
  half-width is at least ``10 tol`` on both ``[T/2, T]`` and ``[T/4, T/2]``;
  ``inconclusive`` otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import FiniteSignedMeasure, convolve_measure, total_mass
from .numerics import (GridFunction, convolve, convolve_arrays, cumulative_integral,
                       node_index, running_mean)
from .reports import Check, Report, PASS, FAIL, INCONCLUSIVE

CONVERGED, NOT_CONVERGED, UNDECIDED = "converged", "not_converged", "inconclusive"

#: shortest horizon accepted by the convergence diagnostic
MIN_HORIZON = 100.0
DEFAULT_THETAS = (0.25, 0.5, 1.0)


@dataclass
class CesaroReport:
    curve: GridFunction
    estimate: float
    half_width: float
    verdict: str
    previous_half_width: float = float("nan")

    @property
    def converged(self) -> bool:
        return self.verdict == CONVERGED

    @property
    def spread(self) -> float:
        return 2.0 * self.half_width


def _window(curve: GridFunction, a, b):
    t = curve.t
    return curve.values[(t >= a - 1e-9 * curve.h) & (t <= b + 1e-9 * curve.h)]


def estimate_limit(f: GridFunction, tol: float = 1e-2) -> CesaroReport:
    """Running-mean curve of ``f`` with a limit estimate and convergence verdict."""
    length = f.horizon - f.t0
    if length < MIN_HORIZON:
        raise ValueError(f"horizon {length:g} is too short for a Cesàro estimate "
                         f"(need at least {MIN_HORIZON:g})")
    curve = running_mean(f)
    T = f.t0 + length
    late = _window(curve, f.t0 + length / 2, T)
    early = _window(curve, f.t0 + length / 4, f.t0 + length / 2)
    hw = 0.5 * float(late.max() - late.min())
    hw_prev = 0.5 * float(early.max() - early.min())
    if hw <= tol:
        verdict = CONVERGED
    elif hw >= 10 * tol and hw_prev >= 10 * tol:
        verdict = NOT_CONVERGED
    else:
        verdict = UNDECIDED
    return CesaroReport(curve, float(late.mean()), hw, verdict, hw_prev)


def _theta_steps(theta, h):
    if not 0 < theta <= 1:
        raise ValueError(f"theta must lie in (0, 1], got {theta:g}")
    k = node_index(theta, h)
    if k == 0:
        raise ValueError(f"theta = {theta:g} is shorter than half a step h = {h:g}")
    return k


def interval_average_map(f: GridFunction, theta: float) -> GridFunction:
    """``t -> int_t^{t+theta} f`` on ``[0, T - theta]``."""
    k = _theta_steps(theta, f.h)
    if k > f.n:
        raise ValueError("theta exceeds the horizon")
    F = cumulative_integral(f)
    return GridFunction(f.h, F[k:] - F[:-k], f.t0)


@dataclass
class Decomposition:
    """``f = f1 + f2`` with ``f1`` a moving average and ``F2 = int_0^t f2``."""

    theta: float
    f1: GridFunction
    f2: GridFunction
    F2: GridFunction
    identity_gap: float = float("nan")


def decompose(f: GridFunction, theta: float) -> Decomposition:
    """Split ``f`` into ``f1(t) = (1/theta) int_{t-theta}^t f`` (zero-extended) and ``f2 = f - f1``.

    ``identity_gap`` is the largest difference between ``F2`` and
    ``(1/theta) int_0^theta int_{t-v}^t f(s) ds dv``, both by trapezoid.
    """
    k = _theta_steps(theta, f.h)
    th = k * f.h
    # moving trapezoid sum rather than a difference of F, which loses digits at large t
    w = np.ones(k + 1)
    w[0] = w[-1] = 0.5
    f1 = f.h * convolve_arrays(f.values, w, "direct") / th
    if k > f.n:
        f1[:] = cumulative_integral(f) / th
    else:
        f1[:k] = cumulative_integral(f)[:k] / th
    f2 = f.values - f1
    F2 = cumulative_integral(f.with_values(f2))
    # trapezoid in v over [0, theta] of F(t) - F(t - v)
    F = cumulative_integral(f)
    avg = f.h * convolve_arrays(F, w, "direct") / th
    ident = F - avg
    return Decomposition(th, f.with_values(f1), f.with_values(f2), f.with_values(F2),
                         float(np.max(np.abs(F2 - ident))))


def check_additivity(f: GridFunction, thetas=DEFAULT_THETAS, tol: float = 1e-2) -> Report:
    """Interval-average limits must be linear in ``theta``: ``L(theta) = L theta``."""
    rep = Report("interval_additivity")
    ests = {th: estimate_limit(interval_average_map(f, th), tol) for th in thetas}
    for th, e in ests.items():
        rep.info[f"theta_{th:g}_verdict"] = e.verdict
    bad = [th for th, e in ests.items() if not e.converged]
    if bad:
        v = FAIL if any(ests[th].verdict == NOT_CONVERGED for th in bad) else INCONCLUSIVE
        rep.add(Check("slope", None, None, tol, v,
                      f"interval averages for theta in {bad} did not converge"))
        return rep
    slopes = {th: e.estimate / th for th, e in ests.items()}
    L = float(np.mean(list(slopes.values())))
    rep.info["fitted_L"] = L
    for a in thetas:
        for b in thetas:
            if a < b:
                allow = tol + ests[a].half_width / a + ests[b].half_width / b
                rep.add(Check.compare(f"slope_{a:g}_vs_{b:g}", slopes[a], slopes[b], allow))
    return rep


def convolution_limit_check(f: GridFunction, m, tol: float = 5e-3,
                            cesaro_tol: float = 1e-2) -> Report:
    """Cesàro limit of ``f * m`` against ``L m(R+)`` (or ``L int g`` for a function ``g``).

    ``m`` is a :class:`FiniteSignedMeasure` or a :class:`GridFunction` /
    vectorised callable read as an integrable function.
    """
    ef = estimate_limit(f, cesaro_tol)
    if not ef.converged:
        raise ValueError(f"forcing has no detected Cesàro limit (verdict {ef.verdict})")
    if isinstance(m, FiniteSignedMeasure):
        conv = convolve_measure(f, m)
        mass = total_mass(m)
    else:
        g = m if isinstance(m, GridFunction) else GridFunction.sample(m, f.h, f.horizon)
        g = g.truncate(f.horizon) if g.horizon > f.horizon else g
        conv = convolve(f.truncate(g.horizon) if g.horizon < f.horizon else f, g)
        mass = float(cumulative_integral(g)[-1])
    ec = estimate_limit(conv, cesaro_tol)
    rep = Report("convolution_limit")
    rep.info["L"] = ef.estimate
    rep.info["mass"] = mass
    rep.info["convolution_verdict"] = ec.verdict
    rep.add(Check.compare("convolution_limit", ef.estimate * mass, ec.estimate, tol))
    return rep


# ---------------------------------------------------------------- limit panels

def _membership(pred_in, measured_in, name, rep, note=""):
    """Add a check that two Cesàro-membership verdicts agree."""
    if pred_in is None or measured_in is None:
        rep.add(Check(name, pred_in, measured_in, None, INCONCLUSIVE, note or "verdict undecided"))
    else:
        rep.add(Check(name, _yn(pred_in), _yn(measured_in), None,
                      PASS if pred_in == measured_in else FAIL, note))


def _yn(flag):
    return "yes" if flag else "no"


def _in_ces(e: CesaroReport):
    return {CONVERGED: True, NOT_CONVERGED: False}.get(e.verdict)


def _limit_check(name, predicted, e: CesaroReport, tol):
    if e.converged:
        return Check.compare(name, predicted, e.estimate, tol)
    v = FAIL if e.verdict == NOT_CONVERGED else INCONCLUSIVE
    return Check(name, predicted, e.estimate, tol, v, f"running mean {e.verdict}")


def verify_theorem(s, x: GridFunction, xprime: GridFunction = None, bundle=None,
                   tol: float = 2e-2, thetas=DEFAULT_THETAS, cesaro_tol: float = None,
                   panels=("interval", "forcing")) -> Report:
    """Check the Cesàro-limit characterisation on a solved scenario.

    For ``ide``/``fde`` scenarios the ``interval`` panel compares the
    interval-average limits ``L theta`` with the limit ``-L/m`` of ``x``
    (``m`` the total mass of the memory measure), and the ``forcing`` panel
    compares the limit ``L`` of ``f`` with the limits of ``x`` and ``x'``.
    Both need an integrable resolvent; when ``bundle`` does not show one,
    every check is marked inconclusive.  For ``integral`` scenarios the
    ``integral`` panel checks ``x in Ces <=> f in Ces`` and the limit
    ``L (1 + int r_k)``.
    """
    ctol = tol if cesaro_tol is None else cesaro_tol
    f = GridFunction(s.h, s.forcing_samples())
    rep = Report(f"cesaro_limits_{s.kind}")
    rep.info["kind"] = s.kind
    ef = estimate_limit(f, ctol)
    ex = estimate_limit(x, ctol)
    rep.info["r_integrable"] = bundle.integrable_verdict if bundle is not None else "unknown"
    rep.info["f_verdict"] = ef.verdict
    rep.info["x_verdict"] = ex.verdict

    if s.kind == "integral":
        _integral_panel(rep, ef, ex, bundle, tol)
        return rep

    mass = total_mass(s.measure)
    rep.info["mass"] = mass
    hypotheses = bundle is not None and bundle.integrable_verdict == "yes" and mass != 0.0
    if "interval" in panels:
        maps = {th: estimate_limit(interval_average_map(f, th), ctol) for th in thetas}
        for th, e in maps.items():
            rep.info[f"interval_theta_{th:g}_verdict"] = e.verdict
        _interval_panel(rep, maps, ex, mass, tol, hypotheses)
    if "forcing" in panels:
        exp_ = estimate_limit(xprime, ctol) if xprime is not None else None
        if exp_ is not None:
            rep.info["xprime_verdict"] = exp_.verdict
        _forcing_panel(rep, ef, ex, exp_, mass, tol, hypotheses)
    return rep


def _interval_panel(rep, maps, ex, mass, tol, hypotheses):
    note = "" if hypotheses else "resolvent not shown integrable; hypotheses unmet"
    states = [_in_ces(e) for e in maps.values()]
    pred = None if None in states else all(states)
    if not hypotheses:
        for th in maps:
            rep.add(Check(f"interval_limit_theta_{th:g}", None, maps[th].estimate, tol,
                          INCONCLUSIVE, note))
        rep.add(Check("x_limit_interval", None, ex.estimate, tol, INCONCLUSIVE, note))
        return
    if pred:
        L = float(np.mean([e.estimate / th for th, e in maps.items()]))
        rep.info["fitted_L"] = L
        for th, e in maps.items():
            rep.add(Check.compare(f"interval_limit_theta_{th:g}", L * th, e.estimate, tol))
        rep.add(_limit_check("x_limit_interval", -L / mass, ex, tol))
    else:
        _membership(pred, _in_ces(ex), "x_in_ces_interval", rep)


def _forcing_panel(rep, ef, ex, exp_, mass, tol, hypotheses):
    note = "resolvent not shown integrable; hypotheses unmet"
    if not hypotheses:
        rep.add(Check("x_limit", None, ex.estimate, tol, INCONCLUSIVE, note))
        return
    f_in = _in_ces(ef)
    if exp_ is None:
        both = None
    else:
        xs = (_in_ces(ex), _in_ces(exp_))
        both = None if None in xs else all(xs)
    _membership(f_in, both, "f_in_ces_iff_x_and_xprime", rep,
                "" if exp_ is not None else "derivative not supplied")
    if f_in:
        rep.add(_limit_check("x_limit", -ef.estimate / mass, ex, tol))
        if exp_ is not None:
            rep.add(_limit_check("xprime_limit", 0.0, exp_, tol))


def _integral_panel(rep, ef, ex, bundle, tol):
    _membership(_in_ces(ef), _in_ces(ex), "x_in_ces_iff_f_in_ces", rep)
    if ef.converged and bundle is not None:
        if bundle.integrable_verdict != "yes":
            rep.add(Check("x_limit", None, ex.estimate, tol, INCONCLUSIVE,
                          "integral resolvent not shown integrable"))
        else:
            rep.info["integral_r"] = bundle.integral_r
            rep.add(_limit_check("x_limit", ef.estimate * (1.0 + bundle.integral_r), ex, tol))


def delay_equivalence(bundle, x: GridFunction, f: GridFunction, cesaro_tol: float = 1e-2) -> Report:
    """Integrability of ``r_tau`` against Cesàro membership of a delay solution.

    With ``r_tau`` integrable and ``f`` in Ces, ``x`` must be in Ces.  With
    ``r_tau`` not integrable some history and forcing must produce ``x``
    outside Ces; a solution that still has a limit is not a witness, so that
    outcome is inconclusive rather than a failure.
    """
    ef = estimate_limit(f, cesaro_tol)
    ex = estimate_limit(x, cesaro_tol)
    rep = Report("delay_equivalence")
    rv = bundle.integrable_verdict
    rep.info["r_tau_integrable"] = rv
    rep.info["f_in_Ces"] = {True: "yes", False: "no"}.get(_in_ces(ef), "inconclusive")
    rep.info["x_in_Ces"] = {True: "yes", False: "no"}.get(_in_ces(ex), "inconclusive")
    rep.info["x_spread"] = ex.spread
    if rv == "yes":
        if not ef.converged:
            rep.add(Check("equivalence", "yes", rep.info["x_in_Ces"], None, INCONCLUSIVE,
                          "forcing not in Ces; the equivalence says nothing"))
        else:
            _membership(True, _in_ces(ex), "equivalence", rep)
    elif rv == "no":
        x_in = _in_ces(ex)
        verdict = PASS if x_in is False else INCONCLUSIVE
        note = "" if x_in is False else "this solution is not a witness of non-membership"
        rep.add(Check("equivalence", "no", rep.info["x_in_Ces"], None, verdict, note))
    else:
        rep.add(Check("equivalence", None, rep.info["x_in_Ces"], None, INCONCLUSIVE,
                      "integrability of r_tau undecided"))
    return rep


def pathological_dichotomy(f: GridFunction, thetas=DEFAULT_THETAS, tol: float = 1e-2) -> Report:
    """``f`` without a Cesàro limit whose interval averages all tend to 0."""
    rep = Report("pathological_dichotomy")
    ef = estimate_limit(f, tol)
    rep.info["f_spread"] = ef.spread
    rep.add(Check("f_in_ces", "no", _yn(ef.converged) if ef.verdict != UNDECIDED else UNDECIDED,
                  None, PASS if ef.verdict == NOT_CONVERGED else
                  (INCONCLUSIVE if ef.verdict == UNDECIDED else FAIL)))
    for th in thetas:
        e = estimate_limit(interval_average_map(f, th), tol)
        rep.add(_limit_check(f"interval_limit_theta_{th:g}", 0.0, e, tol))
    return rep


def positive_equivalence_check(f: GridFunction, thetas=DEFAULT_THETAS, tol: float = 5e-3,
                               cesaro_tol: float = None) -> Report:
    """Direct Cesàro limit versus interval averages plus a side condition, for ``f >= 0``.

    For nonnegative ``f``, the interval-average limits ``L theta`` together with
    ``(1/t) int_t^{t+1} f -> 0`` are equivalent to ``(1/t) int_0^t f -> L``.
    """
    if np.any(f.values < 0):
        raise ValueError("positive equivalence needs a nonnegative forcing")
    ctol = tol if cesaro_tol is None else cesaro_tol
    rep = Report("positive_equivalence")
    T = f.horizon
    side = interval_average_map(f, 1.0)
    ts = side.t
    sel = ts >= T / 2
    side_vals = side.values[sel] / ts[sel]
    side_max = float(np.max(np.abs(side_vals)))
    rep.info["side_condition_sup"] = side_max
    side_ok = side_max <= ctol
    rep.add(Check("side_condition", 0.0, side_max, ctol, PASS if side_ok else FAIL,
                  "" if side_ok else "(1/t) int_t^{t+1} f does not tend to 0"))
    ef = estimate_limit(f, ctol)
    rep.info["direct_verdict"] = ef.verdict
    if not side_ok:
        rep.add(Check("equivalence", None, ef.estimate, tol, INCONCLUSIVE,
                      "side condition violated; no equivalence claim"))
        return rep
    maps = {th: estimate_limit(interval_average_map(f, th), ctol) for th in thetas}
    if not all(e.converged for e in maps.values()):
        _membership(None if any(e.verdict == UNDECIDED for e in maps.values()) else False,
                    _in_ces(ef), "equivalence", rep)
        return rep
    L = float(np.mean([e.estimate / th for th, e in maps.items()]))
    rep.info["interval_L"] = L
    rep.add(_limit_check("equivalence", L, ef, tol))
    return rep
