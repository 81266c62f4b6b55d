"""Forcing functions: the oscillatory family with no Cesàro limit and simple references.

The oscillatory family is ``f(t) = beta'(t) sin(beta(t)) t`` with
``beta(t) = t**(alpha+1)``.  Its interval averages ``int_t^{t+theta} f`` have
Cesàro limit 0 for every ``theta``, while the running mean of ``f`` itself
keeps swinging like ``-cos(beta(t))``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from .numerics import GridFunction, _steps

REFERENCE_KINDS = ("constant", "decaying_oscillation", "abs_sine", "ramp", "sine")


def nyquist_step(alpha: float, T: float) -> float:
    """Largest step giving 20 samples per local period of ``sin(t**(alpha+1))`` up to ``T``."""
    return math.pi / (10.0 * (alpha + 1.0) * T ** alpha)


def default_step(alpha: float, T: float) -> float:
    """The largest step below :func:`nyquist_step` that divides ``T``."""
    return T / math.ceil(T / nyquist_step(alpha, T))


def pathological_value(alpha: float, t):
    t = np.asarray(t, dtype=float)
    return (alpha + 1.0) * t ** alpha * np.sin(t ** (alpha + 1.0)) * t


def pathological_f(alpha: float, T: float, h: float = None) -> GridFunction:
    """Sample ``(alpha+1) t**alpha sin(t**(alpha+1)) t`` on ``[0, T]``.

    A step coarser than :func:`nyquist_step` is refused: undersampling
    aliases the oscillation into a fake Cesàro limit.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha:g}")
    bound = nyquist_step(alpha, T)
    if h is None:
        h = default_step(alpha, T)
    elif h > bound * (1 + 1e-12):
        raise ValueError(f"step h = {h:g} exceeds the sampling bound pi/(10 (alpha+1) T^alpha)"
                         f" = {bound:g} for alpha = {alpha:g}, T = {T:g}")
    return GridFunction.sample(lambda t: pathological_value(alpha, t), h, T)


def pathological_antiderivative(alpha: float, t):
    """``int_0^t f`` in closed form: ``-t cos(t**(alpha+1)) + int_0^t cos(s**(alpha+1)) ds``.

    The remaining integral is a Fresnel integral for ``alpha = 1`` and is
    done by adaptive quadrature otherwise.
    """
    t = np.asarray(t, dtype=float)
    p = alpha + 1.0
    if alpha == 1.0:
        c = math.sqrt(math.pi / 2) * special.fresnel(t * math.sqrt(2 / math.pi))[1]
    else:
        c = np.vectorize(lambda u: integrate.quad(lambda s: math.cos(s ** p), 0.0, u,
                                                  limit=20000)[0])(t)
    return -t * np.cos(t ** p) + c


def reference_f(kind: str, T: float, h: float, level: float = 0.7) -> GridFunction:
    """Well-behaved forcing on ``[0, T]``.

    ``constant`` is ``level``; ``decaying_oscillation`` is
    ``level + exp(-t) sin(t)``; ``abs_sine`` is ``|sin t|``; ``ramp`` is
    ``t``; ``sine`` is ``sin t``.
    """
    funcs = {
        "constant": lambda t: np.full_like(t, level),
        "decaying_oscillation": lambda t: level + np.exp(-t) * np.sin(t),
        "abs_sine": lambda t: np.abs(np.sin(t)),
        "ramp": lambda t: t,
        "sine": np.sin,
    }
    if kind not in funcs:
        raise ValueError(f"unknown reference kind {kind!r}; expected one of {REFERENCE_KINDS}")
    if not T > 0:
        raise ValueError("horizon must be positive")
    _steps(T, h)
    return GridFunction.sample(funcs[kind], h, T)
