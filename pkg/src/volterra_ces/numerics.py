"""Uniform-grid signals, trapezoid quadrature and convolution.

Every signal in the package is a :class:`GridFunction`: samples on the nodes
``t0 + n*h``, read as a piecewise-linear function and extended by zero to
the left of ``t0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

#: above this many samples `convolve` switches to FFT evaluation
SPECTRAL_THRESHOLD = 4096


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real samples ``values[n]`` at times ``t0 + n*h``.

    The samples are copied into a read-only array, so instances can be shared
    freely.  Evaluation at times before ``t0`` returns 0; evaluation past the
    horizon raises.
    """

    h: float
    values: np.ndarray
    t0: float = 0.0
    _t: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        h = float(self.h)
        if not h > 0 or not np.isfinite(h):
            raise ValueError(f"step must be positive and finite, got {self.h!r}")
        v = np.array(self.values, dtype=float, copy=True).reshape(-1)
        if v.size == 0:
            raise ValueError("a grid function needs at least one sample")
        if not np.all(np.isfinite(v)):
            bad = int(np.argmin(np.isfinite(v)))
            raise ValueError(f"non-finite sample at node {bad} (t = {self.t0 + bad * h:g})")
        v.flags.writeable = False
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "values", v)
        t = self.t0 + h * np.arange(v.size)
        t.flags.writeable = False
        object.__setattr__(self, "_t", t)

    @classmethod
    def sample(cls, func, h, horizon, t0=0.0):
        """Sample a vectorised callable on ``[t0, horizon]``.

        ``horizon - t0`` must be a whole number of steps (up to rounding).
        """
        n = _steps(horizon - t0, h)
        t = t0 + h * np.arange(n + 1)
        vals = np.broadcast_to(np.asarray(func(t), dtype=float), t.shape)
        return cls(h, vals, t0)

    @classmethod
    def constant(cls, c, h, horizon):
        return cls(h, np.full(_steps(horizon, h) + 1, float(c)))

    @property
    def t(self) -> np.ndarray:
        return self._t

    @property
    def n(self) -> int:
        """Index of the last node."""
        return self.values.size - 1

    @property
    def horizon(self) -> float:
        return self.t0 + self.n * self.h

    def __len__(self):
        return self.values.size

    def __call__(self, t):
        """Piecewise-linear evaluation with zero extension for ``t < t0``."""
        t = np.asarray(t, dtype=float)
        tol = 1e-9 * self.h
        if np.any(t > self.horizon + tol):
            raise ValueError(f"evaluation beyond horizon {self.horizon:g}")
        out = np.interp(t, self._t, self.values)
        out = np.where(t < self.t0 - tol, 0.0, out)
        return out if out.ndim else float(out)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.h, values, self.t0)

    def truncate(self, horizon) -> "GridFunction":
        n = _steps(horizon - self.t0, self.h)
        if n > self.n:
            raise ValueError(f"cannot extend horizon {self.horizon:g} to {horizon:g}")
        return GridFunction(self.h, self.values[: n + 1], self.t0)

    def same_grid(self, other: "GridFunction") -> bool:
        return (
            abs(self.h - other.h) <= 1e-12 * self.h
            and abs(self.t0 - other.t0) <= 1e-9 * self.h
        )

    def __add__(self, other):
        if isinstance(other, GridFunction):
            _check_same_grid(self, other)
            m = min(len(self), len(other))
            return self.with_values(self.values[:m] + other.values[:m])
        return self.with_values(self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            return self + (-1.0) * other
        return self.with_values(self.values - other)

    def __mul__(self, c):
        if isinstance(c, GridFunction):
            _check_same_grid(self, c)
            m = min(len(self), len(c))
            return self.with_values(self.values[:m] * c.values[:m])
        return self.with_values(self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)


def _steps(length, h) -> int:
    """Number of steps of size ``h`` in ``length``; must be (nearly) whole."""
    q = length / h
    n = int(round(q))
    if n < 0 or abs(q - n) > 1e-6 * max(1.0, q):
        raise ValueError(f"length {length:g} is not a whole number of steps h = {h:g}")
    return n


def node_index(t, h, tol=None) -> int:
    """Nearest node index to time ``t`` on a grid of step ``h``.

    Raises if ``t`` is farther than ``tol`` (default ``h/2``) from that node.
    """
    tol = 0.5 * h if tol is None else tol
    k = int(round(t / h))
    if abs(t - k * h) > tol + 1e-12 * h:
        raise ValueError(f"time {t:g} lies {abs(t - k * h):g} off the grid (tolerance {tol:g})")
    return k


def _check_same_grid(f: GridFunction, g: GridFunction):
    if not f.same_grid(g):
        raise ValueError(f"grid mismatch: h={f.h:g}, t0={f.t0:g} vs h={g.h:g}, t0={g.t0:g}")


def cumulative_integral(f: GridFunction) -> np.ndarray:
    """Trapezoid values of ``int_{t0}^{t_n} f`` at every node."""
    v = f.values
    out = np.zeros_like(v)
    if v.size > 1:
        out[1:] = np.cumsum(0.5 * f.h * (v[1:] + v[:-1]))
    return out


def running_integral(f: GridFunction) -> GridFunction:
    return f.with_values(cumulative_integral(f))


def _antiderivative_at(f: GridFunction, F: np.ndarray, t: float) -> float:
    # exact integral of the piecewise-linear interpolant from t0 to t
    s = (t - f.t0) / f.h
    k = min(int(np.floor(s)), f.n)
    if k >= f.n:
        return float(F[-1])
    u = (s - k) * f.h
    v0, v1 = f.values[k], f.values[k + 1]
    return float(F[k] + u * v0 + 0.5 * u * u * (v1 - v0) / f.h)


def integrate(f: GridFunction, a: float, b: float) -> float:
    """Composite trapezoid approximation of ``int_a^b f``.

    Endpoints off the grid are handled by integrating the linear interpolant,
    so the rule stays exact for piecewise-linear data.
    """
    tol = 1e-9 * f.h
    if not (f.t0 - tol <= a <= b <= f.horizon + tol):
        raise ValueError(f"need {f.t0:g} <= a <= b <= {f.horizon:g}, got a={a:g}, b={b:g}")
    F = cumulative_integral(f)
    a = min(max(a, f.t0), f.horizon)
    b = min(max(b, f.t0), f.horizon)
    return _antiderivative_at(f, F, b) - _antiderivative_at(f, F, a)


def convolve_arrays(f: np.ndarray, g: np.ndarray, method="auto") -> np.ndarray:
    """Full discrete convolution truncated to ``len(f)`` terms."""
    n = len(f)
    if method == "auto":
        method = "fft" if max(len(f), len(g)) > SPECTRAL_THRESHOLD else "direct"
    if method == "direct":
        return np.convolve(f, g)[:n]
    if method == "fft":
        return fftconvolve(f, g)[:n]
    raise ValueError(f"unknown convolution method {method!r}")


def convolve(f: GridFunction, g: GridFunction, method="auto") -> GridFunction:
    """Trapezoid approximation of ``(f*g)(t) = int_0^t f(t-s) g(s) ds``.

    Both inputs must start at 0 and share the step; the result lives on the
    shorter of the two grids.  ``method`` is ``"direct"``, ``"fft"`` or
    ``"auto"`` (FFT above :data:`SPECTRAL_THRESHOLD` samples).
    """
    _check_same_grid(f, g)
    if abs(f.t0) > 1e-12 or abs(g.t0) > 1e-12:
        raise ValueError("convolution is defined for signals starting at t = 0")
    m = min(len(f), len(g))
    a, b = f.values[:m], g.values[:m]
    c = convolve_arrays(a, b, method)
    # trapezoid: drop half of the two endpoint products f(t)g(0), f(0)g(t)
    c = c - 0.5 * (a * b[0] + a[0] * b)
    return GridFunction(f.h, f.h * c)


def running_mean(f: GridFunction) -> GridFunction:
    """The curve ``t -> (1/t) int_0^t f``.

    At ``t = 0`` the value is ``f(0)``, the limit of the mean; at the first
    node ``t = h`` it is the one-panel trapezoid ``(f(0) + f(h))/2``.
    """
    if f.n < 1:
        raise ValueError("running mean needs a positive horizon")
    F = cumulative_integral(f)
    out = np.empty_like(F)
    out[0] = f.values[0]
    out[1:] = F[1:] / (f.t[1:] - f.t0)
    return f.with_values(out)
