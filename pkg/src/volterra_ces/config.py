"""Scenario files: INI sections holding numbers, lists and formulas in ``t`` or ``s``.

A file looks like::

    [scenario]
    kind = ide              ; ide | fde | integral
    step = 1e-3
    horizon = 2000
    xi = 0
    forcing = 0.7 + exp(-t)*sin(t)

    [measure]
    atoms = [[0, -2.0]]
    density = exp(-s)

    [analysis]
    checks = resolvent_integrals, forcing_limit
    thetas = 0.25, 0.5, 1

    [tolerances]
    forcing_limit = 0.02

See ``docs/scenarios.md`` for every key.
"""
from __future__ import annotations

import configparser
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import sympy

from .forcing import REFERENCE_KINDS, default_step, pathological_f, reference_f
from .measures import FiniteSignedMeasure
from .numerics import GridFunction
from .solvers import Scenario

CHECKS = {
    # name: (allowed kinds, default tolerance)
    "resolvent_integrals": (("ide", "fde"), 1e-3),
    "interval_averages": (("ide", "fde"), 2e-2),
    "forcing_limit": (("ide", "fde"), 2e-2),
    "delay_equivalence": (("fde",), 1e-2),
    "pathological_dichotomy": (("ide", "fde", "integral"), 1e-2),
    "positive_forcing": (("ide", "fde", "integral"), 5e-3),
    "integral_contrast": (("integral",), 2e-2),
    "roots": (("fde",), 5e-2),
    "meansquare": (("ide",), 1e-2),
    "route_equivalence": (("ide", "fde", "integral"), 1e-3),
}


class ConfigError(ValueError):
    """The scenario file is malformed or inconsistent."""


@dataclass
class RunConfig:
    scenario: Scenario
    checks: list
    tolerances: dict
    thetas: tuple = (0.25, 0.5, 1.0)
    sigma: object = 1.0
    output_dir: Path = None
    source: Path = None

    def tol(self, check):
        return self.tolerances.get(check, CHECKS[check][1])


# ---------------------------------------------------------------- expressions

_T, _S = sympy.symbols("t s", real=True)


def parse_expression(text: str, var: str = "t"):
    """A vectorised callable for a formula in ``t`` (or ``s``)."""
    expr = _sympify(text)
    sym = _T if var == "t" else _S
    extra = expr.free_symbols - {sym}
    if extra:
        raise ConfigError(f"expression {text!r} uses unknown symbols {sorted(map(str, extra))}")
    fn = sympy.lambdify(sym, expr, "numpy")
    return lambda x: np.broadcast_to(np.asarray(fn(np.asarray(x, dtype=float)), dtype=float),
                                     np.shape(x)).copy()


def _sympify(text):
    text = text.strip().strip("\"'")
    try:
        return sympy.sympify(text, locals={"t": _T, "s": _S, "pi": sympy.pi, "e": sympy.E,
                                           "abs": sympy.Abs})
    except (sympy.SympifyError, SyntaxError, TypeError) as err:
        raise ConfigError(f"cannot parse expression {text!r}: {err}") from None


def exponential_terms(text: str, past: bool = False):
    """``((b, c), ...)`` when the density in ``s`` is exactly ``sum(b exp(-c s))``, else ``None``.

    For a past-window density the sum is read in ``u = -s``.
    """
    expr = sympy.expand(_sympify(text))
    if past:
        expr = sympy.expand(expr.subs(_S, -_S))
    terms = []
    for term in sympy.Add.make_args(expr):
        coeff, rest = term.as_coeff_Mul()
        if rest == 1:
            return None
        if not isinstance(rest, sympy.exp):
            return None
        arg = sympy.expand(rest.args[0])
        poly = sympy.Poly(arg, _S) if arg.free_symbols <= {_S} else None
        if poly is None or poly.degree() != 1:
            return None
        a1, a0 = [float(c) for c in poly.all_coeffs()]
        terms.append((float(coeff) * float(np.exp(a0)), -a1))
    return tuple(terms) if terms else None


# ---------------------------------------------------------------- files

def read_csv_signal(path, h=None):
    """Two-column CSV (header optional) as a grid function; the first column is time."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                if rows:
                    raise ConfigError(f"{path}: bad row {row}") from None
    if len(rows) < 2:
        raise ConfigError(f"{path}: need at least two samples")
    t, v = map(np.array, zip(*rows))
    step = float((t[-1] - t[0]) / (t.size - 1))
    # allow for time stamps printed with about 12 significant digits
    slack = 1e-6 * step + 1e-11 * float(np.max(np.abs(t)))
    if np.max(np.abs(t - (t[0] + step * np.arange(t.size)))) > slack:
        raise ConfigError(f"{path}: samples are not on a uniform grid")
    if h is not None and abs(step - h) > 1e-9 * h:
        raise ConfigError(f"{path}: step {step:g} differs from the scenario step {h:g}")
    return GridFunction(step, v, t0=float(t[0]))


def _float(sec, key, default=None):
    if key not in sec:
        if default is None:
            raise ConfigError(f"[{sec.name}] needs '{key}'")
        return default
    try:
        return float(_sympify(sec[key]))
    except (TypeError, ValueError):
        raise ConfigError(f"[{sec.name}] {key}: not a number: {sec[key]!r}") from None


def parse_measure(sec, past: bool, base: Path) -> FiniteSignedMeasure:
    try:
        atoms = tuple(tuple(float(v) for v in a) for a in _sympify(sec.get("atoms", "[]")))
    except (TypeError, ValueError):
        raise ConfigError(f"[measure] atoms must be [[location, weight], ...], got {sec['atoms']!r}")
    support = _float(sec, "support", -1.0)
    support = None if support < 0 else support
    density = None
    exp_terms = ()
    if "density" in sec:
        terms = exponential_terms(sec["density"], past)
        if terms is not None:
            exp_terms = terms
        else:
            density = parse_expression(sec["density"], "s")
    elif "density_csv" in sec:
        density = read_csv_signal(base / sec["density_csv"])
    try:
        return FiniteSignedMeasure(atoms, density, support, exp_terms, past)
    except ValueError as err:
        raise ConfigError(f"[measure] {err}") from None


def _forcing(sc, kind, measure, h, T, base):
    family = sc.get("forcing_family", "").strip()
    if family == "pathological":
        alpha = _float(sc, "alpha", 1.0)
        try:
            return pathological_f(alpha, T, h)
        except ValueError as err:
            raise ConfigError(str(err)) from None
    if family == "resonant":
        if kind != "fde":
            raise ConfigError("resonant forcing needs an fde scenario")
        from .spectral import locate_roots, resonant_forcing
        try:
            return resonant_forcing(measure, locate_roots(measure), h, T)
        except ValueError as err:
            raise ConfigError(str(err)) from None
    if family:
        if family not in REFERENCE_KINDS:
            raise ConfigError(f"unknown forcing_family {family!r}")
        return reference_f(family, T, h, _float(sc, "level", 0.7))
    if "forcing_csv" in sc:
        return read_csv_signal(base / sc["forcing_csv"], h)
    return parse_expression(sc.get("forcing", "0"), "t")


def load_config(path, step=None, horizon=None, tol=None, out=None) -> RunConfig:
    """Parse a scenario file; command-line overrides win over file values."""
    path = Path(path)
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        if not cp.read(path):
            raise ConfigError(f"cannot read {path}")
    except configparser.Error as err:
        raise ConfigError(f"{path}: {err}") from None
    if "scenario" not in cp:
        raise ConfigError(f"{path}: missing [scenario] section")
    sc = cp["scenario"]
    base = path.parent
    kind = sc.get("kind", "").strip()
    if kind not in ("ide", "fde", "integral"):
        raise ConfigError(f"kind must be ide, fde or integral, got {kind!r}")
    T = horizon if horizon is not None else _float(sc, "horizon")
    if step is not None:
        h = step
    elif "step" in sc:
        h = _float(sc, "step")
    elif sc.get("forcing_family", "").strip() == "pathological":
        h = default_step(_float(sc, "alpha", 1.0), T)
    else:
        raise ConfigError("[scenario] needs 'step'")

    measure = kernel = history = None
    if kind in ("ide", "fde"):
        if "measure" not in cp:
            raise ConfigError(f"{kind} scenario needs a [measure] section")
        measure = parse_measure(cp["measure"], kind == "fde", base)
    else:
        if "kernel_csv" in sc:
            kernel = read_csv_signal(base / sc["kernel_csv"], h)
        elif "kernel" in sc:
            kernel = parse_expression(sc["kernel"], "t")
        else:
            raise ConfigError("integral scenario needs 'kernel' or 'kernel_csv'")
    if kind == "fde":
        history = parse_expression(sc.get("history", "0"), "t")
    forcing = _forcing(sc, kind, measure, h, T, base)
    try:
        scen = Scenario(kind, h, T, forcing, measure, kernel, _float(sc, "xi", 0.0), history)
    except ValueError as err:
        raise ConfigError(str(err)) from None

    an = cp["analysis"] if "analysis" in cp else {}
    checks = [c.strip() for c in an.get("checks", "").split(",") if c.strip()]
    for c in checks:
        if c not in CHECKS:
            raise ConfigError(f"unknown check {c!r}; known checks: {', '.join(CHECKS)}")
        if kind not in CHECKS[c][0]:
            raise ConfigError(f"check {c!r} does not apply to a {kind} scenario")
    thetas = tuple(float(x) for x in str(an.get("thetas", "0.25, 0.5, 1")).split(","))
    for th in thetas:
        if not 0 < th <= 1:
            raise ConfigError(f"theta = {th:g} is outside (0, 1]")
    tols = {}
    if "tolerances" in cp:
        for k, v in cp["tolerances"].items():
            if k not in CHECKS:
                raise ConfigError(f"tolerance for unknown check {k!r}")
            tols[k] = float(v)
    if tol is not None:
        tols = {c: tol for c in CHECKS}
    sigma = parse_expression(an["sigma"], "t") if "sigma" in an else 1.0
    if out is not None:
        out_dir = Path(out)
    elif "output_dir" in an:
        out_dir = base / an["output_dir"]
    else:
        out_dir = Path("out") / path.stem
    return RunConfig(scen, checks, tols, thetas, sigma, out_dir, path)
