"""Characteristic roots of the finite-memory equation.

For a measure ``mu`` on ``[-tau, 0]`` the characteristic function is

    h(lam) = lam - int_[-tau,0] exp(lam*s) mu(ds),

and the rightmost real part ``v0`` of its zeros decides whether the delay
resolvent is integrable.  Roots are counted with the argument principle on
rectangles (the phase of ``h`` is tracked along the boundary with adaptive
refinement), cells are subdivided until each holds at most one root, and
simple roots are polished by Newton's method.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .measures import FiniteSignedMeasure, total_variation
from .numerics import GridFunction
from .reports import Check, Report

_GL_X, _GL_W = np.polynomial.legendre.leggauss(192)

#: split fraction for cell subdivision; off-centre so symmetric roots never sit on a cut
SPLIT = 0.4871
#: envelope values below this are too close to underflow to fit a rate
ENVELOPE_FLOOR = 1e-250


@dataclass
class RootSet:
    rectangle: tuple
    roots: list
    v0: float
    count_certified: bool
    complete_right_of: Optional[float] = None
    failures: tuple = ()

    @property
    def locations(self):
        return np.array([lam for lam, _ in self.roots], dtype=complex)

    def rightmost(self, tol=1e-9):
        return [(lam, m) for lam, m in self.roots if lam.real >= self.v0 - tol]


def _past_view(mu: FiniteSignedMeasure):
    """Atoms (as nonpositive locations), density callable on [-tau, 0], tau."""
    if mu.past:
        atoms = mu.atoms
        dens = mu.density_at if mu.density is not None else None
    else:
        if mu.density is not None and mu.support_bound is None:
            raise ValueError("characteristic function needs a bounded support")
        atoms = tuple((-a, w) for a, w in mu.atoms)
        dens = (lambda u: mu.density_at(-np.asarray(u))) if mu.density is not None else None
    tau = mu.support_bound or 0.0
    return atoms, dens, tau


def char_eval(mu: FiniteSignedMeasure, lam, derivative=False):
    """``h(lam)`` (or ``h'(lam)`` with ``derivative=True``), vectorised in ``lam``.

    ``mu`` may be given on ``[-tau, 0]`` or already reflected to ``[0, tau]``.
    """
    lam = np.asarray(lam, dtype=complex)
    atoms, dens, tau = _past_view(mu)
    out = np.ones_like(lam) if derivative else lam.copy()
    for s, w in atoms:
        e = np.exp(lam * s)
        out -= w * (s * e if derivative else e)
    if dens is not None and tau > 0:
        s = 0.5 * tau * (_GL_X - 1.0)             # nodes on [-tau, 0]
        wq = 0.5 * tau * _GL_W * dens(s)
        if derivative:
            wq = wq * s
        out -= np.exp(np.multiply.outer(lam, s)) @ wq
    return out if out.ndim else complex(out)


def _edge_phase(mu, a, b, n0=48, max_rounds=40):
    """Phase change of ``h`` along the segment ``a -> b``.

    Returns ``(dphase, min|h|)``.  Sample spacing is refined until every
    increment of the phase is below ``pi/4``.
    """
    s = np.linspace(0.0, 1.0, n0)
    vals = char_eval(mu, a + (b - a) * s)
    for _ in range(max_rounds):
        d = np.angle(vals[1:] / vals[:-1])
        bad = np.nonzero(np.abs(d) > math.pi / 4)[0]
        if bad.size == 0:
            return float(d.sum()), float(np.min(np.abs(vals)))
        mids = 0.5 * (s[bad] + s[bad + 1])
        s = np.insert(s, bad + 1, mids)
        vals = np.insert(vals, bad + 1, char_eval(mu, a + (b - a) * mids))
    raise RuntimeError("phase tracking did not resolve along a contour edge")


def winding_count(mu: FiniteSignedMeasure, rect, nudge=1e-6, max_nudges=6):
    """Number of zeros of ``h`` inside ``rect = (re_min, re_max, im_min, im_max)``.

    Equals ``(1/2 pi i)`` times the contour integral of ``h'/h``, evaluated
    through the change of ``arg h``.  Edges passing too close to a zero are
    pushed outward by ``nudge``.  Returns ``(count, rect_used)``.
    """
    x0, x1, y0, y1 = rect
    for _ in range(max_nudges + 1):
        corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
        total, low = 0.0, np.inf
        for a, b in zip(corners, corners[1:] + corners[:1]):
            dphi, m = _edge_phase(mu, a, b)
            total += dphi
            low = min(low, m)
        scale = 1.0 + max(abs(c) for c in corners)
        wind = total / (2 * math.pi)
        if low > 1e-8 * scale and abs(wind - round(wind)) < 0.05:
            return int(round(wind)), (x0, x1, y0, y1)
        x0, x1, y0, y1 = x0 - nudge, x1 + nudge, y0 - nudge, y1 + nudge
    raise RuntimeError(f"contour of {rect} stays too close to a root after {max_nudges} nudges")


def newton(mu, lam, tol=1e-15, maxit=60):
    """Newton iteration on ``h``; returns ``(root, converged)``."""
    lam = complex(lam)
    for _ in range(maxit):
        step = char_eval(mu, lam) / char_eval(mu, lam, derivative=True)
        lam -= step
        if abs(step) <= tol * (1.0 + abs(lam)):
            return lam, True
    return lam, abs(char_eval(mu, lam)) <= 1e-10 * (1.0 + abs(lam))


def default_rectangle(mu: FiniteSignedMeasure):
    """``[-10/tau, max(1, |mu|+margin)] x [-20 pi/tau, 20 pi/tau]``."""
    tau = mu.support_bound or 1.0
    tv = total_variation(mu)
    return (-10.0 / tau, max(1.0, 1.01 * tv + 0.01), -20 * math.pi / tau, 20 * math.pi / tau)


def _complete_right_of(mu, rect):
    # every root obeys |lam| <= |mu| * exp(max(0, -Re lam) * tau)
    x0, x1, y0, y1 = rect
    tv = total_variation(mu)
    tau = mu.support_bound or 0.0
    if tv == 0.0:
        return x0 if x0 <= 0 <= x1 and y0 <= 0 <= y1 else None
    ymax = min(y1, -y0)
    if x1 < tv or ymax < tv:
        return None
    if tau == 0.0:
        return x0
    return max(x0, -math.log(ymax / tv) / tau)


def locate_roots(mu: FiniteSignedMeasure, rectangle=None, min_size=1e-7, max_depth=60) -> RootSet:
    """All zeros of ``h`` in ``rectangle`` (default :func:`default_rectangle`).

    Cells are split until each holds at most one zero counted with
    multiplicity; a cell still holding ``m >= 2`` zeros at ``min_size`` is
    reported as one root of multiplicity ``m``.  ``count_certified`` is false
    when a cell could not be resolved.
    """
    rect = tuple(float(v) for v in (rectangle or default_rectangle(mu)))
    count, rect = winding_count(mu, rect)
    roots, failures = [], []
    stack = [(rect, count, 0)] if count > 0 else []
    while stack:
        cell, m, depth = stack.pop()
        x0, x1, y0, y1 = cell
        if m == 1:
            lam, ok = newton(mu, complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)))
            pad = 1e-12 * (1 + abs(lam))
            if ok and x0 - pad <= lam.real <= x1 + pad and y0 - pad <= lam.imag <= y1 + pad:
                roots.append((lam, 1))
                continue
        size = max(x1 - x0, y1 - y0)
        if size < min_size or depth >= max_depth:
            lam = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
            if m == 1:
                failures.append(lam)
            roots.append((lam, m))
            continue
        kids = _split(cell)
        counts = []
        for k in range(len(kids)):
            c, kids[k] = winding_count(mu, kids[k])
            counts.append(c)
        if sum(counts) != m:
            failures.append(complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)))
        stack.extend((kid, c, depth + 1) for kid, c in zip(kids, counts) if c > 0)
    roots = [(_clean(lam), m) for lam, m in roots]
    roots.sort(key=lambda p: (-p[0].real, p[0].imag))
    v0 = max((lam.real for lam, _ in roots), default=-math.inf)
    return RootSet(rect, roots, v0, not failures, _complete_right_of(mu, rect), tuple(failures))


def _split(cell):
    x0, x1, y0, y1 = cell
    xm = x0 + SPLIT * (x1 - x0)
    ym = y0 + SPLIT * (y1 - y0)
    return [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]


def _clean(lam):
    if abs(lam.imag) <= 1e-12 * (1 + abs(lam)):
        return complex(lam.real, 0.0)
    return lam


def integrability_verdict(rs: RootSet, tol=1e-9) -> str:
    """``yes`` iff ``v0 < -tol`` over a certified region, ``no`` iff ``v0 >= 0``."""
    if not rs.count_certified:
        raise ValueError("root set is not certified; cannot decide integrability")
    if rs.roots and rs.v0 >= -tol:
        return "no"
    if rs.complete_right_of is not None and rs.complete_right_of <= min(rs.v0, 0.0) and rs.v0 < -tol:
        return "yes"
    if rs.complete_right_of is not None and not rs.roots:
        return "yes" if rs.complete_right_of < -tol else "inconclusive"
    return "inconclusive"


def imaginary_axis_pair(rs: RootSet, tol=1e-8):
    """The simple root ``i*beta`` with the smallest ``beta > 0`` on the imaginary axis."""
    cands = [(lam, m) for lam, m in rs.roots if abs(lam.real) <= tol and lam.imag > tol]
    if not cands:
        raise ValueError("no imaginary-axis roots: resonant construction does not apply")
    lam, m = min(cands, key=lambda p: p[0].imag)
    if m != 1:
        raise ValueError(f"imaginary-axis root {lam} has multiplicity {m}; need a simple root")
    return lam


def resonant_coefficients(mu: FiniteSignedMeasure, rs: RootSet):
    """``(beta, residue, c1, k1)`` for the simple root pair ``+-i*beta``.

    ``residue`` is that of ``1/h`` at ``i*beta``; the resolvent carries the
    mode ``c1 cos(beta t) + k1 sin(beta t)`` with ``c1 = 2 Re(residue)`` and
    ``k1 = -2 Im(residue)``.
    """
    lam = imaginary_axis_pair(rs)
    beta = lam.imag
    residue = 1.0 / char_eval(mu, complex(0.0, beta), derivative=True)
    return beta, residue, 2 * residue.real, -2 * residue.imag


def resonant_forcing(mu: FiniteSignedMeasure, rs: RootSet, h: float, T: float) -> GridFunction:
    """``f(t) = k1 sin(beta t) - c1 cos(beta t)`` on ``[0, T]``.

    Driving the delay equation with this ``f`` and zero history makes the
    running mean of the solution oscillate forever.
    """
    beta, _, c1, k1 = resonant_coefficients(mu, rs)
    return GridFunction.sample(lambda t: k1 * np.sin(beta * t) - c1 * np.cos(beta * t), h, T)


def decay_rate_check(rs: RootSet, bundle, tol=0.05) -> Report:
    """Compare the late-time exponential rate of ``|r_tau|`` with ``v0``.

    The envelope is a trailing maximum over a window spanning one period of
    the dominant oscillation (or ``tau`` for a real dominant root), fitted
    on the second half of the span where it stays clear of underflow.
    """
    r = bundle.r
    dom = rs.rightmost(1e-6)
    betas = [abs(lam.imag) for lam, _ in dom if abs(lam.imag) > 1e-9]
    tau = bundle.diagnostics.get("tau") or 1.0
    window = 1.1 * 2 * math.pi / min(betas) if betas else max(tau, 10 * r.h)
    w = max(int(round(window / r.h)), 1)
    a = np.abs(r.values)
    from scipy.ndimage import maximum_filter1d
    env = maximum_filter1d(a, size=w, origin=(w - 1) // 2, mode="nearest")
    # fit on the second half of the span where the envelope is well above underflow
    alive = np.nonzero(env > ENVELOPE_FLOOR)[0]
    end = int(alive[-1]) + 1 if alive.size else 0
    start = max(end // 2, w)
    if end - start < 2 * w:
        raise ValueError("resolvent falls below the floating-point floor before the fit window")
    slope = float(np.polyfit(r.t[start:end], np.log(env[start:end]), 1)[0])
    rep = Report("decay_rate")
    rep.info["v0"] = rs.v0
    rep.add(Check.compare("envelope_rate", rs.v0, slope, tol))
    return rep
