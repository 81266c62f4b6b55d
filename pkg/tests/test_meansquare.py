import math

import numpy as np
import pytest

from volterra_ces.meansquare import mean_square_additive, mean_square_limit_check
from volterra_ces.numerics import GridFunction
from volterra_ces.resolvents import differential_resolvent
from volterra_ces.solvers import Scenario, solve


def test_closed_form_exponential(nu_decay):
    # E X^2 = int_0^t exp(-2s) ds = (1 - exp(-2t)) / 2
    s = Scenario("ide", 1e-3, 10.0, measure=nu_decay)
    b = differential_resolvent(nu_decay, 1e-3, 10.0)
    ms = mean_square_additive(solve(s), b, 1.0)
    assert ms(10.0) == pytest.approx(0.5 * (1 - math.exp(-20)), abs=1e-4)
    assert np.max(np.abs(ms.values - 0.5 * (1 - np.exp(-2 * ms.t)))) < 1e-6


def test_deterministic_part_added(nu_decay):
    s = Scenario("ide", 1e-3, 5.0, measure=nu_decay, xi=2.0)
    b = differential_resolvent(nu_decay, 1e-3, 5.0)
    ms = mean_square_additive(solve(s), b, 0.0)
    assert np.max(np.abs(ms.values - 4 * np.exp(-2 * ms.t))) < 1e-6


def test_sigma_forms_agree(nu_decay):
    s = Scenario("ide", 1e-2, 5.0, measure=nu_decay)
    b = differential_resolvent(nu_decay, 1e-2, 5.0)
    x = solve(s)
    a = mean_square_additive(x, b, lambda t: 1 + 0 * t).values
    g = mean_square_additive(x, b, GridFunction.constant(1.0, 1e-2, 5.0)).values
    c = mean_square_additive(x, b, 1.0).values
    assert np.allclose(a, c) and np.allclose(g, c)
    with pytest.raises(ValueError):
        mean_square_additive(x, b, GridFunction.constant(1.0, 5e-3, 5.0))


def test_grid_mismatch(nu_decay):
    b = differential_resolvent(nu_decay, 1e-2, 5.0)
    x = solve(Scenario("ide", 1e-2, 10.0, measure=nu_decay))
    with pytest.raises(ValueError):
        mean_square_additive(x, b, 1.0)


def test_limit_check(nu_exp):
    s = Scenario("ide", 1e-2, 400.0, forcing=lambda t: np.exp(-t), measure=nu_exp)
    b = differential_resolvent(nu_exp, 1e-2, 400.0)
    rep = mean_square_limit_check(solve(s), b, 2.0)
    assert rep.status == "pass", rep.to_text()
