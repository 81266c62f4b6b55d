"""Perturbed memory equations, each solved by two independent routes.

Three problem kinds share one :class:`Scenario` description:

* ``ide``: ``x'(t) = (x * nu)(t) + f(t)``, ``x(0) = xi``;
* ``fde``: ``x'(t) = int_[-tau,0] x(t+s) mu(ds) + f(t)``, ``x = psi`` on ``[-tau, 0]``;
* ``integral``: ``x(t) = f(t) + int_0^t k(t-s) x(s) ds``.

The direct routes step the equation itself; the variation-of-constants
routes combine a precomputed resolvent with convolutions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.signal import fftconvolve

from . import _stepping
from .measures import (FiniteSignedMeasure, as_halfline, atom_lags, convolve_samples,
                       density_samples)
from .numerics import GridFunction, _steps, convolve, convolve_arrays, node_index
from .reports import Check, Report
from .resolvents import (ResolventBundle, _check_step, _kernel_samples, differential_resolvent,
                         fde_resolvent, integral_resolvent, memory_terms)

BlowUpError = _stepping.BlowUpError

Signal = Union[GridFunction, Callable, float]
KINDS = ("ide", "fde", "integral")


@dataclass(frozen=True, eq=False)
class Scenario:
    """One perturbed equation on the grid ``0, h, ..., T``.

    ``measure`` is ``nu`` (halfline) for ``ide`` and ``mu`` (past window) for
    ``fde``; ``kernel`` is ``k`` for ``integral``.  ``forcing`` and
    ``history`` may be grid functions, vectorised callables or constants.
    ``history`` is read on ``[-tau, 0]``.
    """

    kind: str
    h: float
    T: float
    forcing: Signal = 0.0
    measure: Optional[FiniteSignedMeasure] = None
    kernel: Optional[Union[GridFunction, Callable]] = None
    xi: float = 0.0
    history: Optional[Signal] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        _steps(self.T, self.h)
        if self.kind == "ide":
            if self.measure is None:
                raise ValueError("an ide scenario needs a measure")
            if self.measure.past:
                raise ValueError("an ide scenario needs a halfline measure")
        elif self.kind == "fde":
            if self.measure is None or self.measure.support_bound is None:
                raise ValueError("an fde scenario needs a measure with a support bound")
            if self.history is None:
                raise ValueError("an fde scenario needs a history on [-tau, 0]")
        elif self.kernel is None:
            raise ValueError("an integral scenario needs a kernel")

    @property
    def n(self) -> int:
        return _steps(self.T, self.h)

    @property
    def tau(self) -> float:
        return self.measure.support_bound if self.kind == "fde" else 0.0

    def forcing_samples(self) -> np.ndarray:
        return _samples(self.forcing, self.h, self.n, "forcing")

    def history_at(self, t) -> np.ndarray:
        """History values at times ``t`` in ``[-tau, 0]``."""
        t = np.asarray(t, dtype=float)
        psi = self.history
        if isinstance(psi, GridFunction):
            lo = psi.t0 - 1e-9 * psi.h
            if t.size and (t.min() < lo or t.max() > psi.horizon + 1e-9 * psi.h):
                raise ValueError(f"history grid [{psi.t0:g}, {psi.horizon:g}] does not cover "
                                 f"[{t.min():g}, {t.max():g}]")
            return np.asarray(psi(np.clip(t, psi.t0, psi.horizon)), dtype=float)
        if callable(psi):
            return np.broadcast_to(np.asarray(psi(t), dtype=float), t.shape).copy()
        return np.full(t.shape, float(psi))

    def with_(self, **changes) -> "Scenario":
        fields = dict(kind=self.kind, h=self.h, T=self.T, forcing=self.forcing,
                      measure=self.measure, kernel=self.kernel, xi=self.xi, history=self.history)
        fields.update(changes)
        return Scenario(**fields)


def _samples(sig, h, n, what):
    if isinstance(sig, GridFunction):
        if abs(sig.h - h) > 1e-12 * h or abs(sig.t0) > 1e-12:
            raise ValueError(f"{what} grid (h={sig.h:g}, t0={sig.t0:g}) does not match h={h:g}")
        if len(sig) < n + 1:
            raise ValueError(f"{what} covers {sig.horizon:g}, need {n * h:g}")
        return np.array(sig.values[: n + 1])
    t = h * np.arange(n + 1)
    if callable(sig):
        v = np.broadcast_to(np.asarray(sig(t), dtype=float), t.shape).copy()
    else:
        v = np.full(t.shape, float(sig))
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{what} produced non-finite samples")
    return v


def _require(s: Scenario, kind):
    if s.kind != kind:
        raise ValueError(f"expected a {kind} scenario, got {s.kind}")


def _check_bundle(s: Scenario, b: ResolventBundle):
    if abs(b.h - s.h) > 1e-12 * s.h or b.r.n < s.n:
        raise ValueError(f"resolvent grid (h={b.h:g}, T={b.r.horizon:g}) does not match "
                         f"the scenario (h={s.h:g}, T={s.T:g})")


# ---------------------------------------------------------------- ide

def solve_ide_direct(s: Scenario, method="auto", derivative=False, snap_tol=None):
    """Step ``x' = x * nu + f`` from ``x(0) = xi``.

    ``method`` follows :func:`differential_resolvent`: exponential-sum
    densities use the Markovian lift unless ``method="direct"``.  With
    ``derivative=True`` the pair ``(x, x')`` is returned.  A diverging
    solution raises :class:`BlowUpError` carrying the blow-up time.
    """
    _require(s, "ide")
    nu, n = s.measure, s.n
    can_lift = bool(nu.exp_terms) and nu.support_bound is None
    if method == "lift" and not can_lift:
        raise ValueError("Markovian lift needs an untruncated exponential-sum density")
    lags, weights, dens, lift = memory_terms(nu, s.h, n, can_lift and method != "direct", snap_tol)
    w0 = float(sum(w for k, w in zip(lags, weights) if k == 0))
    _check_step(w0 + (0.5 * s.h * dens[0] if dens.size else 0.0),
                lift[1] if lift is not None else (), s.h)
    x, dx, _ = _stepping.heun_memory(s.h, n, s.xi, lags, weights, dens, lift,
                                     forcing=s.forcing_samples())
    x = GridFunction(s.h, x)
    return (x, GridFunction(s.h, dx)) if derivative else x


def solve_ide_voc(s: Scenario, b: ResolventBundle, derivative=False):
    """``x = r xi + r * f`` from a differential resolvent on the same grid.

    The derivative, when asked for, is ``r' xi + r' * f + f`` (the resolvent
    starts at 1, so differentiating the convolution adds ``f``).
    """
    _require(s, "ide")
    _check_bundle(s, b)
    r = b.r.truncate(s.T) if b.r.n > s.n else b.r
    f = GridFunction(s.h, s.forcing_samples())
    x = r * s.xi + convolve(r, f)
    if not derivative:
        return x
    if b.r_prime is None:
        raise ValueError("resolvent bundle has no derivative")
    rp = b.r_prime.truncate(s.T) if b.r_prime.n > s.n else b.r_prime
    return x, rp * s.xi + convolve(rp, f) + f


# ---------------------------------------------------------------- fde

def _fde_terms(s: Scenario, snap_tol=None):
    nu = as_halfline(s.measure)
    tau = s.tau
    if tau > 0:
        node_index(tau, s.h, snap_tol)
    lags, weights = atom_lags(nu, s.h, snap_tol)
    dens = density_samples(nu, s.h, s.n + int(round(tau / s.h)))
    return lags, weights, dens


def solve_fde(s: Scenario, derivative=False, snap_tol=None):
    """Method-of-steps solution of the delay equation with history ``psi``.

    Each step reads the memory over ``[t - tau, t]`` from already computed
    values or from the history, which is interpolated at the nodes
    ``-h, -2h, ..., -tau``.
    """
    _require(s, "fde")
    lags, weights, dens = _fde_terms(s, snap_tol)
    w0 = float(sum(w for k, w in zip(lags, weights) if k == 0))
    _check_step(w0 + (0.5 * s.h * dens[0] if dens.size else 0.0), (), s.h)
    K = max([int(k) for k in lags] + [dens.size - 1, 0])
    past = s.history_at(-s.h * np.arange(1, K + 1))
    x0 = float(s.history_at(np.array([0.0]))[0])
    x, dx, _ = _stepping.heun_memory(s.h, s.n, x0, lags, weights, dens,
                                     forcing=s.forcing_samples(), past=past)
    x = GridFunction(s.h, x)
    return (x, GridFunction(s.h, dx)) if derivative else x


def history_term(s: Scenario, b: ResolventBundle, snap_tol=None) -> GridFunction:
    """Free solution ``x0`` of the delay equation driven by its history alone.

    ``x0 = r_tau psi(0) + r_tau * g`` where ``g(t) = int_[-tau,-t) psi(t+s) mu(ds)``
    collects the memory that still reaches into the history.  For an atom at
    ``-a`` the convolution is ``int_{max(0,t-a)}^t r_tau(v) psi(t-v-a) dv``,
    which is evaluated directly so the jump of ``g`` at ``t = a`` costs no
    accuracy.
    """
    _require(s, "fde")
    _check_bundle(s, b)
    h, n = s.h, s.n
    r = b.r.values[: n + 1]
    lags, weights, dens = _fde_terms(s, snap_tol)
    psi0 = float(s.history_at(np.array([0.0]))[0])
    out = psi0 * r
    for k, w in zip(lags, weights):
        k = int(k)
        if k == 0:
            continue
        # p[u] = psi(u h - a) for u = 0..k, the history read by the atom
        p = s.history_at(h * (np.arange(k + 1) - k))
        c = convolve_arrays(r, p)
        m = np.minimum(np.arange(n + 1), k)
        c = c - 0.5 * (r * p[0] + r[np.arange(n + 1) - m] * p[m])
        out = out + w * h * c
    if dens.size > 1:
        W = dens.size - 1
        P = s.history_at(-h * np.arange(W + 1))
        # g[u] = trapezoid over q = 0..W-u of d[u+q] psi(-q h)
        g = fftconvolve(dens[::-1], P)[W::-1][: W + 1].copy()
        u = np.arange(W + 1)
        g -= 0.5 * (dens * P[0] + dens[W] * P[W - u])
        g[W] = 0.0
        g = h * g
        gg = np.zeros(n + 1)
        gg[: min(W + 1, n + 1)] = g[: n + 1]
        out = out + convolve(GridFunction(h, r), GridFunction(h, gg)).values
    return GridFunction(h, out)


def solve_fde_voc(s: Scenario, b: ResolventBundle, snap_tol=None) -> GridFunction:
    """``x = x0 + r_tau * f`` from the delay resolvent on the same grid."""
    x0 = history_term(s, b, snap_tol)
    r = b.r.truncate(s.T) if b.r.n > s.n else b.r
    return x0 + convolve(r, GridFunction(s.h, s.forcing_samples()))


# ---------------------------------------------------------------- integral

def solve_integral_direct(s: Scenario) -> GridFunction:
    """Trapezoid stepping of ``x = f + k * x``."""
    _require(s, "integral")
    ks = _kernel_samples(s.kernel, s.h, s.n)
    return GridFunction(s.h, _stepping.volterra_trapezoid(ks, s.forcing_samples(), s.h))


def solve_integral_eq(s: Scenario, rk: ResolventBundle) -> GridFunction:
    """``x = f + r_k * f`` from the integral resolvent on the same grid."""
    _require(s, "integral")
    _check_bundle(s, rk)
    r = rk.r.truncate(s.T) if rk.r.n > s.n else rk.r
    f = GridFunction(s.h, s.forcing_samples())
    return f + convolve(r, f)


# ---------------------------------------------------------------- dispatch

def resolvent_for(s: Scenario, spectral=True) -> ResolventBundle:
    """The resolvent matching the scenario kind, on the scenario grid."""
    if s.kind == "ide":
        return differential_resolvent(s.measure, s.h, s.T)
    if s.kind == "fde":
        return fde_resolvent(s.measure, s.h, s.T, spectral=spectral)
    return integral_resolvent(s.kernel, s.h, s.T)


def solve(s: Scenario, derivative=False):
    """Direct route for any scenario kind; ``derivative`` is ignored for integral equations."""
    if s.kind == "ide":
        return solve_ide_direct(s, derivative=derivative)
    if s.kind == "fde":
        return solve_fde(s, derivative=derivative)
    x = solve_integral_direct(s)
    return (x, None) if derivative else x


def solve_voc(s: Scenario, b: ResolventBundle) -> GridFunction:
    if s.kind == "ide":
        return solve_ide_voc(s, b)
    if s.kind == "fde":
        return solve_fde_voc(s, b)
    return solve_integral_eq(s, b)


def route_check(s: Scenario, tol=1e-3, bundle=None) -> Report:
    """Max-norm gap between the direct and variation-of-constants routes."""
    b = bundle if bundle is not None else resolvent_for(s, spectral=False)
    gap = float(np.max(np.abs(solve(s).values - solve_voc(s, b).values)))
    rep = Report("route_equivalence")
    rep.info["kind"] = s.kind
    rep.add(Check.compare("max_route_gap", 0.0, gap, tol))
    return rep


# ---------------------------------------------------------------- defects

def _memory_values(s: Scenario, x: np.ndarray) -> np.ndarray:
    """``int x(t-s) nu(ds)`` at every node, with the history for ``t - s < 0``."""
    h = s.h
    nu = as_halfline(s.measure)
    lags, weights = atom_lags(nu, h)
    dens = density_samples(nu, h, x.size - 1 + (int(round(s.tau / h)) if s.kind == "fde" else 0))
    K = max([int(k) for k in lags] + [dens.size - 1, 0]) if s.kind == "fde" else 0
    X = np.concatenate([s.history_at(-h * np.arange(K, 0, -1)) if K else np.zeros(0), x])
    n = x.size
    out = np.zeros(n)
    for k, w in zip(lags, weights):
        k = int(k)
        if s.kind == "fde":
            out += w * X[K - k: K - k + n]
        elif k < n:
            out[k:] += w * x[: n - k]
    if dens.size:
        W = dens.size - 1
        if s.kind == "fde":
            c = convolve_arrays(X, dens)[K:]
            out += h * (c - 0.5 * dens[0] * x - 0.5 * dens[W] * X[K - W: K - W + n])
        else:
            out += convolve_samples(x, dens, h)
    return out


def defect(s: Scenario, x: GridFunction) -> GridFunction:
    """Residual of ``x`` in its defining equation at interior nodes.

    For ``ide``/``fde`` it is the centred difference of ``x`` minus the
    memory term and ``f``; for ``integral`` it is ``x - f - k * x`` with the
    convolution done by Simpson's rule on even nodes, so the residual
    measures the trapezoid error of the solver rather than re-stating it.
    The returned grid holds nodes ``1..N-1`` (every second node for
    ``integral``), starting at ``h``.
    """
    v = x.values
    f = s.forcing_samples()[: v.size]
    h = s.h
    if s.kind in ("ide", "fde"):
        rhs = _memory_values(s, v) + f
        d = (v[2:] - v[:-2]) / (2 * h) - rhs[1:-1]
        return GridFunction(h, d, t0=h)
    ks = np.zeros(v.size)
    kv = _kernel_samples(s.kernel, h, v.size - 1)
    ks[: kv.size] = kv
    wts = np.where(np.arange(v.size) % 2 == 1, 4.0, 2.0)
    c = convolve_arrays(ks, wts * v)
    c = c - ks * v[0] - ks[0] * v     # endpoint weights 1 instead of 2
    even = np.arange(2, v.size, 2)
    d = v[even] - f[even] - (h / 3.0) * c[even]
    return GridFunction(2 * h, d, t0=2 * h)
