"""Time-stepping kernels shared by the resolvent and solver modules.

Two schemes live here:

* :func:`heun_memory` steps ``x'(t) = (x * nu)(t) + f(t)`` with a
  predictor-corrector trapezoid (Heun) rule.  The memory term is made of
  grid-aligned atoms, a sampled density (trapezoid over the history) and,
  optionally, exponential modes carried as auxiliary states.
* :func:`volterra_trapezoid` solves ``x = f + k * x`` node by node, with the
  diagonal trapezoid term moved to the left-hand side.

Both work on plain arrays; the public modules wrap them in grid functions.
"""
from __future__ import annotations

import numpy as np

#: magnitude treated as a numerical blow-up
OVERFLOW = 1e300


class BlowUpError(ArithmeticError):
    """The computed solution left the floating-point range."""

    def __init__(self, index, time, values):
        super().__init__(f"solution blew up at t = {time:g} (node {index})")
        self.index = index
        self.time = time
        self.values = values


def heun_memory(h, n_steps, x0, lags=(), weights=(), density=None, lift=None,
                forcing=None, past=None):
    """Predictor-corrector trapezoid stepping for a linear equation with memory.

    Parameters
    ----------
    h : float
        Step size.
    n_steps : int
        Number of steps; the result has ``n_steps + 1`` nodes.
    x0 : float
        Value at ``t = 0``.
    lags, weights : sequences
        Atoms as integer grid lags ``k >= 0`` and their weights.
    density : ndarray, optional
        Density samples ``d_0..d_W`` of the (halfline) memory kernel.
    lift : tuple of arrays ``(b, c)``, optional
        Exponential modes ``sum(b_i exp(-c_i s))`` carried as auxiliary
        states ``z_i' = x - c_i z_i``.  Exclusive with ``density``.
    forcing : ndarray, optional
        ``f`` at the nodes.
    past : ndarray, optional
        History ``x(-k h)`` for ``k = 1..K``.  Without it the solution is
        extended by zero and the density quadrature stops at ``t``; with it
        the quadrature always spans the full support ``[0, W h]``.

    Returns
    -------
    x, dx : ndarray
        Solution and the right-hand side ``(x * nu)(t) + f(t)`` at every node
        (right limits).
    jumps : dict
        ``{node: left limit of dx}`` at nodes where a delayed atom first
        reads ``x(0)`` across the zero extension, so ``dx`` jumps there.
    """
    n_steps = int(n_steps)
    lags = [int(k) for k in lags]
    weights = [float(w) for w in weights]
    dens = np.zeros(0) if density is None else np.asarray(density, dtype=float)
    if lift is not None and dens.size:
        raise ValueError("give either a sampled density or exponential modes, not both")
    f = np.zeros(n_steps + 1) if forcing is None else np.asarray(forcing, dtype=float)
    if f.size < n_steps + 1:
        raise ValueError("forcing does not cover the requested horizon")
    zero_ext = past is None

    w0 = sum(w for k, w in zip(lags, weights) if k == 0)
    delayed = [(k, w) for k, w in zip(lags, weights) if k > 0]
    W = dens.size - 1
    K = max([k for k, _ in delayed] + [max(W, 0), 0])
    if not zero_ext and len(past) < K:
        raise ValueError(f"history covers {len(past)} lags, need {K}")

    # X[K + n] = x(n h); X[K - k] = history at -k h
    X = np.zeros(K + n_steps + 1)
    if not zero_ext:
        X[:K] = np.asarray(past[:K], dtype=float)[::-1]
    X[K] = x0
    d0 = float(dens[0]) if W >= 0 else 0.0
    d_rev = dens[1:][::-1].copy() if W >= 1 else None
    half_h = 0.5 * h

    if lift is not None:
        b = [float(v) for v in lift[0]]
        c = [float(v) for v in lift[1]]
    else:
        b, c = [], []
    z = [0.0] * len(b)
    modes = list(zip(b, c))

    def memory(n, left=False):
        # everything in (x*nu)(t_n) except the terms proportional to x_n;
        # left=True gives the limit from below, where x(0-) = 0 replaces x(0)
        acc = 0.0
        i = K + n
        for k, w in delayed:
            if not (left and zero_ext and k == n):
                acc += w * X[i - k]
        if W >= 1:
            e = min(n, W) if zero_ext else W
            if zero_ext and n < W:
                if n >= 1:
                    acc += h * float(np.dot(d_rev[W - n:], X[K:i]))
            else:
                acc += h * float(np.dot(d_rev, X[i - W:i]))
            if e >= 1:
                acc -= half_h * dens[e] * X[i - e]
        return acc

    def self_coef(n):
        e = min(n, W) if zero_ext else W
        return w0 + (half_h * d0 if e >= 1 else 0.0)

    jump_nodes = {k for k, _ in delayed} if zero_ext else set()
    jumps = {}
    dx = np.empty(n_steps + 1)
    xn = float(x0)
    Fn = self_coef(0) * xn + memory(0) + f[0]
    dx[0] = Fn
    for n in range(n_steps):
        m = n + 1
        G = memory(m) + f[m]
        G_left = memory(m, left=True) + f[m] if m in jump_nodes else G
        cc = self_coef(m)
        xp = xn + h * Fn
        if modes:
            zd = [xn - ci * zi for (bi, ci), zi in zip(modes, z)]
            zp = [zi + h * di for zi, di in zip(z, zd)]
            Fp = cc * xp + G_left + sum(bi * zi for (bi, _), zi in zip(modes, zp))
            xn1 = xn + half_h * (Fn + Fp)
            z = [zi + half_h * (di + xp - ci * zpi)
                 for (_, ci), zi, di, zpi in zip(modes, z, zd, zp)]
            Fn = cc * xn1 + G + sum(bi * zi for (bi, _), zi in zip(modes, z))
        else:
            Fp = cc * xp + G_left
            xn1 = xn + half_h * (Fn + Fp)
            Fn = cc * xn1 + G
        if G_left is not G:
            jumps[m] = Fn - G + G_left
        if not abs(xn1) < OVERFLOW:
            x = X[K:K + m].copy()
            raise BlowUpError(m, m * h, x)
        X[K + m] = xn1
        dx[m] = Fn
        xn = xn1
    return X[K:].copy(), dx, jumps


def trapezoid_with_jumps(dx, h, jumps):
    """Trapezoid integral of a derivative with known jump nodes."""
    total = 0.5 * h * float(np.sum(dx[1:] + dx[:-1]))
    for m, left in jumps.items():
        total -= 0.5 * h * (dx[m] - left)
    return total


def volterra_trapezoid(kernel, forcing, h):
    """Solve ``x(t) = f(t) + int_0^t k(t-s) x(s) ds`` with the trapezoid rule.

    ``kernel`` holds ``k_0..k_W``; samples past ``W`` are taken as zero,
    which is how a decaying kernel's negligible tail is dropped.
    """
    k = np.asarray(kernel, dtype=float)
    f = np.asarray(forcing, dtype=float)
    n_nodes = f.size
    x = np.zeros(n_nodes)
    if k.size == 0:
        x[:] = f
        return x
    W = k.size - 1
    diag = 1.0 - 0.5 * h * k[0]
    if abs(diag) < 1e-8:
        raise ZeroDivisionError(f"implicit trapezoid step is singular: 1 - h*k(0)/2 = {diag:g}")
    k_rev = k[1:][::-1].copy()
    x[0] = f[0]
    for n in range(1, n_nodes):
        acc = 0.0
        if n <= W:
            acc += 0.5 * k[n] * x[0]
            if n >= 2:
                acc += float(np.dot(k_rev[W - n + 1:], x[1:n]))
        else:
            acc += float(np.dot(k_rev, x[n - W:n]))
        xn = (f[n] + h * acc) / diag
        if not abs(xn) < OVERFLOW:
            raise BlowUpError(n, n * h, x[:n].copy())
        x[n] = xn
    return x
