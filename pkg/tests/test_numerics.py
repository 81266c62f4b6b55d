import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from volterra_ces.numerics import (GridFunction, convolve, integrate, node_index,
                                   running_integral, running_mean)


def test_grid_function_rejects_bad_input():
    with pytest.raises(ValueError):
        GridFunction(0.0, [1.0, 2.0])
    with pytest.raises(ValueError):
        GridFunction(0.1, [1.0, np.nan])


def test_zero_extension_and_interpolation():
    f = GridFunction.sample(lambda t: t, 0.5, 2.0)
    assert f(-1.0) == 0.0
    assert f(0.75) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        f(3.0)


def test_values_are_read_only():
    f = GridFunction.constant(1.0, 0.1, 1.0)
    with pytest.raises(ValueError):
        f.values[0] = 2.0


def test_node_index_snaps_within_half_step():
    assert node_index(1.0004, 1e-3) == 1000
    with pytest.raises(ValueError):
        node_index(1.0004, 1e-3, tol=1e-4)


def test_integrate_constant_is_exact():
    assert integrate(GridFunction.constant(1.0, 0.01, 3.0), 0.0, 2.0) == pytest.approx(2.0, abs=1e-12)


def test_integrate_sine():
    f = GridFunction.sample(np.sin, np.pi * 1e-4, np.pi)
    assert integrate(f, 0.0, np.pi) == pytest.approx(2.0, abs=1e-6)


def test_integrate_exponential():
    f = GridFunction.sample(lambda t: np.exp(-t), 1e-3, 50.0)
    assert integrate(f, 0.0, 50.0) == pytest.approx(1.0, abs=1e-5)


def test_integrate_checks_bounds():
    f = GridFunction.constant(1.0, 0.1, 1.0)
    with pytest.raises(ValueError):
        integrate(f, 0.5, 2.0)
    with pytest.raises(ValueError):
        integrate(f, 0.6, 0.5)


def test_integrate_second_order():
    def err(h):
        f = GridFunction.sample(lambda t: np.exp(np.sin(t)), h, 2.0)
        exact = 4.23653115722101  # int_0^2 exp(sin t) dt, scipy.integrate.quad
        return abs(integrate(f, 0.0, 2.0) - exact)
    assert err(0.02) / err(0.01) >= 3.5


def test_convolve_closed_forms():
    h = 1e-3
    e1 = GridFunction.sample(lambda t: np.exp(-t), h, 2.0)
    one = GridFunction.constant(1.0, h, 2.0)
    e2 = GridFunction.sample(lambda t: np.exp(-2 * t), h, 2.0)
    assert convolve(e1, one)(1.0) == pytest.approx(1 - np.exp(-1), abs=1e-5)
    assert convolve(e1, e2)(1.0) == pytest.approx(np.exp(-1) - np.exp(-2), abs=1e-5)
    zero = GridFunction.constant(0.0, h, 2.0)
    assert np.all(convolve(e1, zero).values == 0.0)


def test_convolve_rejects_mismatched_grids():
    with pytest.raises(ValueError):
        convolve(GridFunction.constant(1.0, 0.1, 1.0), GridFunction.constant(1.0, 0.2, 1.0))


def test_direct_and_fft_agree(rng):
    h = 0.01
    for n in (50, 1000, 4096):
        a = GridFunction(h, rng.standard_normal(n + 1))
        b = GridFunction(h, rng.standard_normal(n + 1))
        d = convolve(a, b, "direct").values
        s = convolve(a, b, "fft").values
        assert np.max(np.abs(d - s)) <= 1e-10 * np.max(np.abs(d))


def test_running_mean():
    h = 0.01
    c = running_mean(GridFunction.constant(0.3, h, 10.0))
    assert np.allclose(c.values, 0.3, atol=1e-14)
    s = running_mean(GridFunction.sample(np.sin, h, 100.0))
    assert s(100.0) == pytest.approx((1 - np.cos(100.0)) / 100.0, abs=1e-3)
    a = running_mean(GridFunction.sample(lambda t: np.abs(np.sin(t)), h, 2000.0))
    assert a(2000.0) == pytest.approx(2 / np.pi, abs=1e-3)


def test_running_integral_is_trapezoid():
    f = GridFunction.sample(lambda t: t, 0.1, 1.0)
    assert running_integral(f)(1.0) == pytest.approx(0.5, abs=1e-14)


smooth = st.lists(st.floats(-2, 2), min_size=3, max_size=3)


def _smooth(coef, h=0.01, T=5.0):
    a, b, c = coef
    return GridFunction.sample(lambda t: a * np.sin(b * t) + c * np.exp(-t), h, T)


@settings(max_examples=30, deadline=None)
@given(smooth, smooth, st.floats(-3, 3), st.floats(-3, 3))
def test_convolution_linearity(c1, c2, alpha, beta):
    f, g, k = _smooth(c1), _smooth(c2), _smooth([1.0, 0.7, 0.5])
    lhs = convolve(f * alpha + g * beta, k).values
    rhs = alpha * convolve(f, k).values + beta * convolve(g, k).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * (1 + np.max(np.abs(rhs)))


@settings(max_examples=30, deadline=None)
@given(smooth, smooth)
def test_convolution_commutes(c1, c2):
    f, g = _smooth(c1), _smooth(c2)
    fg, gf = convolve(f, g).values, convolve(g, f).values
    assert np.max(np.abs(fg - gf)) <= 1e-10 * (1 + np.max(np.abs(fg)))
