"""Finite signed measures made of atoms plus an integrable density.

A measure on the halfline is stored with nonnegative atom locations.  A
measure on the past window ``[-tau, 0]`` (``past=True``) stores nonpositive
locations and a density read on ``[-tau, 0]``; :func:`reflect_to_halfline`
turns it into the halfline measure that the convolution machinery uses.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate as _quad

from .numerics import GridFunction, convolve_arrays, node_index

Density = Union[Callable, GridFunction, None]

#: relative size below which density samples count as an exhausted tail
TAIL_EPS = 1e-17


@dataclass(frozen=True, eq=False)
class FiniteSignedMeasure:
    """Atoms ``(location, weight)`` plus an optional density.

    ``exp_terms`` describes a density ``sum(b * exp(-c*s))`` exactly; it is
    what enables the Markovian lift in the solvers.  When given it replaces
    ``density``.  ``support_bound`` is ``tau`` when all mass lies in
    ``[0, tau]`` (or ``[-tau, 0]`` for a past measure).
    """

    atoms: tuple = ()
    density: Density = None
    support_bound: Optional[float] = None
    exp_terms: tuple = ()
    past: bool = False
    tail_bound: float = 0.0

    def __post_init__(self):
        atoms = tuple((float(a), float(w)) for a, w in self.atoms)
        locs = [a for a, _ in atoms]
        if len(set(locs)) != len(locs):
            raise ValueError(f"atom locations must be distinct: {locs}")
        for a, w in atoms:
            if not (np.isfinite(a) and np.isfinite(w)):
                raise ValueError(f"non-finite atom ({a}, {w})")
            if w == 0.0:
                raise ValueError(f"atom at {a:g} has zero weight")
            if self.past and a > 0:
                raise ValueError(f"past measure has an atom at positive time {a:g}")
            if not self.past and a < 0:
                raise ValueError(f"halfline measure has an atom at negative time {a:g}")
        tau = self.support_bound
        if tau is not None:
            tau = float(tau)
            if not tau >= 0:
                raise ValueError("support bound must be nonnegative")
            bad = [a for a in locs if abs(a) > tau * (1 + 1e-12)]
            if bad:
                raise ValueError(f"atoms {bad} lie outside the support bound {tau:g}")
        elif self.past:
            if self.density is not None or self.exp_terms:
                raise ValueError("a past measure with a density needs support_bound")
            tau = max((abs(a) for a in locs), default=0.0)
        terms = tuple((float(b), float(c)) for b, c in self.exp_terms)
        for b, c in terms:
            if not c > 0 and tau is None:
                raise ValueError(f"exponential term with rate {c:g} is not integrable")
        object.__setattr__(self, "atoms", tuple(sorted(atoms, key=lambda p: abs(p[0]))))
        object.__setattr__(self, "support_bound", tau)
        object.__setattr__(self, "exp_terms", terms)
        if terms:
            object.__setattr__(self, "density", _exp_density(terms, self.past))
        if isinstance(self.density, GridFunction):
            object.__setattr__(self, "tail_bound", _grid_tail(self.density, tau is not None))

    @classmethod
    def dirac(cls, location=0.0, weight=1.0, past=False):
        return cls(atoms=((location, weight),), past=past,
                   support_bound=abs(location) if past else None)

    @classmethod
    def zero(cls):
        return cls()

    @property
    def has_density(self) -> bool:
        return self.density is not None

    @property
    def is_zero(self) -> bool:
        return not self.atoms and self.density is None

    def density_at(self, s):
        """Density evaluated in the measure's own time orientation."""
        s = np.asarray(s, dtype=float)
        if self.density is None:
            return np.zeros_like(s)
        vals = np.asarray(self.density(s), dtype=float)
        vals = np.broadcast_to(vals, s.shape).copy()
        if self.support_bound is not None:
            tau = self.support_bound
            inside = (s >= -tau - 1e-12) & (s <= 1e-12) if self.past else (s >= -1e-12) & (s <= tau + 1e-12)
            vals[~inside] = 0.0
        return vals

    def _density_integral(self, absolute=False) -> float:
        if self.density is None:
            return 0.0
        if isinstance(self.density, GridFunction):
            v = np.abs(self.density.values) if absolute else self.density.values
            return float(np.trapezoid(v, dx=self.density.h)) if v.size > 1 else 0.0
        if self.exp_terms and not absolute and self.support_bound is None:
            return sum(b / c for b, c in self.exp_terms)
        g = (lambda s: abs(self.density_at(s))) if absolute else self.density_at
        if self.support_bound is not None:
            lo, hi = (-self.support_bound, 0.0) if self.past else (0.0, self.support_bound)
        else:
            lo, hi = (-np.inf, 0.0) if self.past else (0.0, np.inf)
        val, _ = _quad.quad(lambda s: float(g(s)), lo, hi, limit=500)
        return float(val)

    def __add__(self, other: "FiniteSignedMeasure") -> "FiniteSignedMeasure":
        if self.past != other.past:
            raise ValueError("cannot add a past measure to a halfline measure")
        merged = dict()
        for a, w in self.atoms + other.atoms:
            merged[a] = merged.get(a, 0.0) + w
        atoms = tuple((a, w) for a, w in merged.items() if w != 0.0)
        bounds = [m.support_bound for m in (self, other) if not m.is_zero]
        tau = None if any(b is None for b in bounds) else max(bounds, default=None)
        if self.exp_terms or other.exp_terms:
            if (self.density is None or self.exp_terms) and (other.density is None or other.exp_terms):
                return FiniteSignedMeasure(atoms, None, tau, self.exp_terms + other.exp_terms, self.past)
        d1, d2 = self.density, other.density
        if d1 is None or d2 is None:
            dens = d1 if d2 is None else d2
        elif isinstance(d1, GridFunction) and isinstance(d2, GridFunction):
            dens = d1 + d2
        else:
            dens = lambda s: self.density_at(s) + other.density_at(s)  # noqa: E731
        return FiniteSignedMeasure(atoms, dens, tau, (), self.past)

    def __mul__(self, c) -> "FiniteSignedMeasure":
        c = float(c)
        if c == 0.0:
            return FiniteSignedMeasure(past=self.past)
        atoms = tuple((a, c * w) for a, w in self.atoms)
        if self.exp_terms:
            return FiniteSignedMeasure(atoms, None, self.support_bound,
                                       tuple((c * b, r) for b, r in self.exp_terms), self.past)
        d = self.density
        if d is None:
            dens = None
        elif isinstance(d, GridFunction):
            dens = c * d
        else:
            dens = lambda s: c * np.asarray(d(s), dtype=float)  # noqa: E731
        return FiniteSignedMeasure(atoms, dens, self.support_bound, (), self.past)

    __rmul__ = __mul__


def _exp_density(terms, past):
    def d(s):
        s = np.asarray(s, dtype=float)
        x = -s if past else s
        return sum(b * np.exp(-c * x) for b, c in terms) + 0.0 * s
    return d


def _grid_tail(d: GridFunction, bounded: bool) -> float:
    # bound on the mass of |density| past its last sample
    v = np.abs(d.values)
    if bounded or v.size < 10:
        return 0.0
    peak = v.max()
    tail = v[-max(v.size // 10, 2):]
    if peak == 0.0 or tail.max() <= 1e-14 * peak:
        return 0.0
    t = d.t[-tail.size:]
    pos = tail > 0
    if pos.sum() < 2:
        return 0.0
    slope = np.polyfit(t[pos], np.log(tail[pos]), 1)[0]
    if slope >= 0:
        raise ValueError("density does not decay at its horizon; total variation is not finite")
    return float(v[-1] / -slope)


def total_mass(m: FiniteSignedMeasure) -> float:
    """``m(R+)``: sum of atom weights plus the integral of the density."""
    return sum(w for _, w in m.atoms) + m._density_integral()


def total_variation(m: FiniteSignedMeasure) -> float:
    """``|m|(R+)``, with the density tail bound added as an upper allowance."""
    return sum(abs(w) for _, w in m.atoms) + m._density_integral(absolute=True) + m.tail_bound


def reflect_to_halfline(m: FiniteSignedMeasure) -> FiniteSignedMeasure:
    """Map a measure on ``[-tau, 0]`` to ``E -> m(-E)`` on ``[0, tau]``."""
    if not m.past:
        raise ValueError("reflection expects a measure on the past window [-tau, 0]")
    tau = m.support_bound
    atoms = tuple((-a + 0.0, w) for a, w in m.atoms)
    if m.exp_terms:
        return FiniteSignedMeasure(atoms, None, tau, m.exp_terms)
    d = m.density
    if d is None:
        dens = None
    elif isinstance(d, GridFunction):
        if abs(d.horizon) > 1e-9 * d.h:
            raise ValueError("a sampled past density must end at t = 0")
        dens = GridFunction(d.h, d.values[::-1], 0.0)
        if dens.horizon > tau * (1 + 1e-12) + 1e-12:
            raise ValueError(f"density extends past -tau = {-tau:g}")
    else:
        dens = lambda s: np.asarray(d(-np.asarray(s, dtype=float)), dtype=float)  # noqa: E731
    return FiniteSignedMeasure(atoms, dens, tau)


def as_halfline(m: FiniteSignedMeasure) -> FiniteSignedMeasure:
    return reflect_to_halfline(m) if m.past else m


def atom_lags(m: FiniteSignedMeasure, h: float, snap_tol=None):
    """Grid lags and weights of the atoms of a halfline measure.

    Atoms off the grid are snapped to the nearest node when within
    ``snap_tol`` (default ``h/2``); otherwise a ``ValueError`` is raised.
    Atoms that snap onto the same node are merged.
    """
    lags = {}
    for a, w in m.atoms:
        k = node_index(a, h, snap_tol)
        lags[k] = lags.get(k, 0.0) + w
    ks = np.array(sorted(lags), dtype=int)
    ws = np.array([lags[k] for k in ks], dtype=float)
    return ks, ws


def density_samples(m: FiniteSignedMeasure, h: float, n_max: int) -> np.ndarray:
    """Density of a halfline measure on nodes ``0..W`` with ``W <= n_max``.

    Samples are trimmed after the last one that is not negligible, so the
    length of the result is the effective memory of the kernel on the grid.
    """
    if m.density is None:
        return np.zeros(0)
    s = h * np.arange(n_max + 1)
    if m.support_bound is not None:
        w_sup = int(np.floor(m.support_bound / h + 1e-9))
        s = s[: w_sup + 1]
    d = m.density
    if isinstance(d, GridFunction):
        inside = s <= d.horizon + 1e-12
        vals = np.zeros_like(s)
        vals[inside] = d(s[inside])
    else:
        vals = m.density_at(s)
    if not np.all(np.isfinite(vals)):
        raise ValueError("density produced non-finite samples")
    peak = np.max(np.abs(vals)) if vals.size else 0.0
    if peak == 0.0:
        return np.zeros(0)
    keep = np.nonzero(np.abs(vals) > TAIL_EPS * peak)[0]
    return vals[: keep[-1] + 1].copy()


def convolve_samples(x: np.ndarray, dens: np.ndarray, h: float, method="auto") -> np.ndarray:
    """Trapezoid values of ``int_0^t d(s) x(t-s) ds`` at every node.

    The trapezoid runs over ``[0, min(t, W h)]`` where ``W + 1`` is the
    number of density samples, so a density cut off at its support bound is
    integrated with the correct half-weight endpoint.
    """
    n = x.size
    if dens.size == 0:
        return np.zeros(n)
    c = convolve_arrays(x, dens, method)
    c = c - 0.5 * dens[0] * x
    idx = np.arange(n)
    e = np.minimum(idx, dens.size - 1)
    c = c - 0.5 * dens[e] * x[idx - e]
    return h * c


def convolve_measure(f: GridFunction, m: FiniteSignedMeasure, snap_tol=None,
                     method="auto") -> GridFunction:
    """``(f*m)(t) = int_[0,t] f(t-s) m(ds)`` at every node of ``f``.

    The interval is closed at both ends, so an atom at 0 contributes
    ``w*f(t)`` and an atom at ``t`` contributes ``w*f(0)``.  Past measures
    are reflected first, which turns this into ``int f(t+u) mu(du)`` for
    zero-extended ``f``.
    """
    if abs(f.t0) > 1e-12:
        raise ValueError("convolution with a measure needs a signal starting at t = 0")
    m = as_halfline(m)
    x = f.values
    out = np.zeros_like(x)
    ks, ws = atom_lags(m, f.h, snap_tol)
    for k, w in zip(ks, ws):
        if k < x.size:
            out[k:] += w * x[: x.size - k]
    dens = density_samples(m, f.h, f.n)
    out += convolve_samples(x, dens, f.h, method)
    return f.with_values(out)
