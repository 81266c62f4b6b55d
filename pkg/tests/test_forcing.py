import math

import numpy as np
import pytest
from scipy import integrate

from volterra_ces.cesaro import estimate_limit, interval_average_map
from volterra_ces.forcing import (default_step, nyquist_step, pathological_antiderivative,
                                  pathological_f, pathological_value, reference_f)
from volterra_ces.numerics import GridFunction, cumulative_integral


def test_pathological_values():
    assert pathological_value(1.0, 1.0) == pytest.approx(2 * math.sin(1.0))
    assert pathological_value(1.0, 0.0) == 0.0
    assert pathological_value(0.5, 2.0) == pytest.approx(1.5 * 2 ** 0.5 * math.sin(2 ** 1.5) * 2)


def test_step_bound():
    assert nyquist_step(1.0, 200.0) == pytest.approx(math.pi / 4000)
    h = default_step(1.0, 200.0)
    assert h <= nyquist_step(1.0, 200.0)
    assert abs(200.0 / h - round(200.0 / h)) < 1e-6
    with pytest.raises(ValueError):
        pathological_f(1.0, 200.0, h=1e-3)
    with pytest.raises(ValueError):
        pathological_f(0.0, 200.0)


def test_antiderivative_matches_quadrature():
    for alpha, t in ((1.0, 20.0), (0.5, 3.0)):
        ref = integrate.quad(lambda u: pathological_value(alpha, u), 0.0, t, limit=5000,
                             epsabs=1e-11)[0]
        assert float(pathological_antiderivative(alpha, t)) == pytest.approx(ref, abs=1e-8)


def test_sampled_integral_tracks_closed_form():
    # 20 samples per local period leave a trapezoid error near one percent
    f = pathological_f(1.0, 20.0)
    exact = float(pathological_antiderivative(1.0, 20.0))
    assert cumulative_integral(f)[-1] == pytest.approx(exact, rel=2e-2)


def test_running_mean_tracks_negative_cosine():
    f = pathological_f(1.0, 200.0)
    e = estimate_limit(f)
    t = e.curve.t
    sel = t >= 100
    assert np.max(np.abs(e.curve.values[sel] + np.cos(t[sel] ** 2))) < 0.02
    assert e.spread > 0.5


def test_undersampling_aliases():
    # a step far above the bound no longer resolves the oscillation: interval
    # averages lose the closed form and pick up a spurious Cesàro limit
    T, alpha = 200.0, 1.0
    good = pathological_f(alpha, T)
    coarse = GridFunction.sample(lambda t: pathological_value(alpha, t),
                                 T / round(T / (20 * good.h)), T)
    t = np.linspace(150, 198, 49)
    exact = pathological_antiderivative(alpha, t + 1) - pathological_antiderivative(alpha, t)
    scale = np.max(np.abs(exact))
    assert np.max(np.abs(interval_average_map(good, 1.0)(t) - exact)) < 0.1 * scale
    assert np.max(np.abs(interval_average_map(coarse, 1.0)(t) - exact)) > scale
    assert abs(estimate_limit(interval_average_map(good, 1.0)).estimate) < 1e-2
    assert abs(estimate_limit(interval_average_map(coarse, 1.0)).estimate) > 0.1


def test_reference_kinds():
    h, T = 0.01, 10.0
    assert np.allclose(reference_f("constant", T, h, level=0.3).values, 0.3)
    assert reference_f("abs_sine", T, h)(4.0) == pytest.approx(abs(math.sin(4.0)))
    assert reference_f("ramp", T, h)(4.0) == pytest.approx(4.0)
    assert reference_f("decaying_oscillation", T, h)(1.0) == pytest.approx(
        0.7 + math.exp(-1) * math.sin(1))
    with pytest.raises(ValueError):
        reference_f("square", T, h)
    with pytest.raises(ValueError):
        reference_f("sine", T, 0.3)
