import math

import numpy as np
import pytest

from volterra_ces.cesaro import (CONVERGED, NOT_CONVERGED, UNDECIDED, check_additivity,
                                 convolution_limit_check, decompose, delay_equivalence,
                                 estimate_limit, interval_average_map, pathological_dichotomy,
                                 positive_equivalence_check, verify_theorem)
from volterra_ces.forcing import pathological_f, reference_f
from volterra_ces.numerics import GridFunction
from volterra_ces.resolvents import fde_resolvent
from volterra_ces.solvers import Scenario, resolvent_for, solve


def test_estimate_constant():
    e = estimate_limit(GridFunction.constant(0.7, 0.1, 200.0))
    assert e.verdict == CONVERGED and e.estimate == pytest.approx(0.7) and e.half_width < 1e-12


def test_estimate_sine_decays_like_one_over_t():
    e = estimate_limit(GridFunction.sample(np.sin, 0.01, 400.0), tol=1e-2)
    assert e.converged and abs(e.estimate) < 1e-2


def test_estimate_not_converged():
    # running mean of sin(log t) style oscillation: f = sin(log t) + cos(log t)
    f = GridFunction.sample(lambda t: np.sin(np.log1p(t)) + np.cos(np.log1p(t)), 0.1, 1e5)
    e = estimate_limit(f, tol=1e-3)
    assert e.verdict == NOT_CONVERGED


def test_estimate_inconclusive():
    # drifts by about 0.04 on the late window: above tol, below 10 tol
    f = GridFunction.sample(lambda t: 1 + 2.0 / (1 + t), 0.1, 200.0)
    assert estimate_limit(f, tol=1e-2).verdict == UNDECIDED


def test_short_horizon_rejected():
    with pytest.raises(ValueError):
        estimate_limit(GridFunction.constant(1.0, 0.1, 50.0))


def test_interval_average_map():
    f = GridFunction.sample(np.cos, 1e-3, 10.0)
    g = interval_average_map(f, 0.5)
    t = g.t
    assert np.max(np.abs(g.values - (np.sin(t + 0.5) - np.sin(t)))) < 1e-6
    assert g.horizon == pytest.approx(9.5)
    for bad in (0.0, 1.5, -0.2):
        with pytest.raises(ValueError):
            interval_average_map(f, bad)


def test_interval_average_linear_in_f(rng):
    h = 0.01
    a = GridFunction(h, rng.standard_normal(1001))
    b = GridFunction(h, rng.standard_normal(1001))
    lhs = interval_average_map(a * 2.0 + b, 0.25).values
    rhs = 2 * interval_average_map(a, 0.25).values + interval_average_map(b, 0.25).values
    assert np.max(np.abs(lhs - rhs)) < 1e-12


@pytest.mark.parametrize("theta", [0.25, 0.5, 1.0])
def test_decompose_identities(theta):
    f = GridFunction.sample(lambda t: np.abs(np.sin(t)) + np.cos(3 * t), 1e-3, 30.0)
    d = decompose(f, theta)
    assert np.max(np.abs(d.f1.values + d.f2.values - f.values)) < 1e-10
    assert d.identity_gap < 1e-8


def test_decompose_constant_pointwise():
    d = decompose(GridFunction.constant(0.7, 0.01, 20.0), 1.0)
    sel = d.F2.t >= 1.0
    assert np.max(np.abs(d.f1.values[sel] - 0.7)) < 1e-12
    assert np.max(np.abs(d.F2.values[sel] - 0.35)) < 1e-10


def test_additivity():
    f = reference_f("abs_sine", 400.0, 0.01)
    assert check_additivity(f, tol=1e-2).status == "pass"


@pytest.mark.parametrize("kind", ["constant", "abs_sine"])
def test_convolution_limits(kind, nu_decay, nu_exp):
    f = reference_f(kind, 1000.0, 0.01)
    for m in (nu_decay, nu_exp):
        assert convolution_limit_check(f, m).status == "pass"
    assert convolution_limit_check(f, lambda t: np.exp(-t)).status == "pass"


def test_convolution_limit_needs_limit(nu_decay):
    with pytest.raises(ValueError):
        convolution_limit_check(pathological_f(1.0, 200.0), nu_decay)


def test_verify_ide_constant(nu_exp):
    s = Scenario("ide", 1e-2, 400.0, forcing=0.7, measure=nu_exp)
    x, dx = solve(s, derivative=True)
    rep = verify_theorem(s, x, dx, resolvent_for(s))
    assert rep.status == "pass", rep.to_text()
    assert rep["x_limit"].predicted == pytest.approx(0.7)


def test_verify_without_integrability_is_inconclusive():
    from volterra_ces.measures import FiniteSignedMeasure
    s = Scenario("ide", 1e-2, 200.0, forcing=lambda t: np.exp(-t), measure=FiniteSignedMeasure.zero())
    x = solve(s)
    rep = verify_theorem(s, x, None, resolvent_for(s))
    assert rep.status == "inconclusive"


def test_verify_integral():
    s = Scenario("integral", 1e-2, 400.0, forcing=0.5, kernel=lambda t: np.exp(-2 * t))
    rep = verify_theorem(s, solve(s), None, resolvent_for(s), panels=("integral",))
    assert rep.status == "pass", rep.to_text()
    assert rep["x_limit"].predicted == pytest.approx(1.0, abs=1e-3)


def test_delay_equivalence_integrable(mu_delay):
    s = Scenario("fde", 1e-2, 400.0, forcing=0.3, measure=mu_delay, history=1.0)
    b = fde_resolvent(mu_delay, 1e-2, 400.0)
    rep = delay_equivalence(b, solve(s), GridFunction(s.h, s.forcing_samples()))
    assert rep.status == "pass" and rep.info["x_in_Ces"] == "yes"


def test_pathological_dichotomy():
    assert pathological_dichotomy(pathological_f(1.0, 200.0)).status == "pass"
    assert pathological_dichotomy(reference_f("constant", 200.0, 0.1)).status == "fail"


def test_positive_equivalence():
    rep = positive_equivalence_check(reference_f("abs_sine", 1000.0, 0.01))
    assert rep.status == "pass"
    assert rep["equivalence"].measured == pytest.approx(2 / math.pi, abs=5e-3)
    ramp = positive_equivalence_check(reference_f("ramp", 200.0, 0.01))
    assert ramp["side_condition"].verdict == "fail"
    assert ramp["equivalence"].verdict == "inconclusive"
    with pytest.raises(ValueError):
        positive_equivalence_check(reference_f("sine", 200.0, 0.01))
