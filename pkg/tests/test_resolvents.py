import numpy as np
import pytest

from volterra_ces.measures import FiniteSignedMeasure
from volterra_ces.numerics import GridFunction
from volterra_ces.resolvents import (check_resolvent_integrals, differential_resolvent,
                                     fde_resolvent, integral_resolvent)

from conftest import EXP_KERNEL_R1


def test_single_atom_is_exponential(nu_decay):
    b = differential_resolvent(nu_decay, 1e-3, 50.0)
    t = b.r.t[b.r.t <= 5.0]
    assert np.max(np.abs(b.r.values[: t.size] - np.exp(-t))) <= 1e-5
    assert b.r(1.0) == pytest.approx(0.367879, abs=1e-5)
    assert b.integrable_verdict == "yes"


@pytest.mark.parametrize("method", ["lift", "direct"])
def test_exponential_kernel_matches_matrix_exponential(nu_exp, method):
    b = differential_resolvent(nu_exp, 1e-3, 5.0, method=method)
    assert b.r(1.0) == pytest.approx(EXP_KERNEL_R1, abs=1e-6)
    assert b.diagnostics["method"] == method


def test_lift_crosscheck_recorded(nu_exp):
    b = differential_resolvent(nu_exp, 1e-3, 30.0)
    assert b.diagnostics["method"] == "lift"
    assert b.diagnostics["lift_crosscheck"] < 1e-6


def test_resolvent_integrals(nu_decay, nu_exp):
    for m in (nu_decay, nu_exp):
        b = differential_resolvent(m, 1e-3, 60.0)
        rep = check_resolvent_integrals(b, m)
        assert rep.status == "pass", rep.to_text()
        assert b.integral_r == pytest.approx(1.0, abs=1e-3)


def test_integrals_refine_with_step(nu_exp):
    # independent oracle: a run at a tenth of the step
    coarse = differential_resolvent(nu_exp, 1e-2, 60.0)
    fine = differential_resolvent(nu_exp, 1e-3, 60.0)
    assert coarse.integral_r == pytest.approx(fine.integral_r, abs=1e-3)


def test_non_integrable_is_inconclusive():
    nu = FiniteSignedMeasure.dirac(0.0, 0.5)
    b = differential_resolvent(nu, 1e-2, 30.0)
    assert b.integrable_verdict == "no"
    rep = check_resolvent_integrals(b, nu)
    assert rep.status == "inconclusive"


def test_zero_measure_resolvent_is_one():
    b = differential_resolvent(FiniteSignedMeasure.zero(), 1e-2, 10.0)
    assert np.allclose(b.r.values, 1.0)
    assert b.integrable_verdict == "no"


def test_step_too_coarse_rejected():
    with pytest.raises(ValueError):
        differential_resolvent(FiniteSignedMeasure.dirac(0.0, -50.0), 0.1, 10.0)


def test_delay_resolvent_by_hand(mu_delay):
    b = fde_resolvent(mu_delay, 1e-3, 100.0)
    assert np.allclose(b.r.values[b.r.t < 1.0 - 1e-9], 1.0)
    assert b.r(1.5) == pytest.approx(0.85, abs=1e-6)
    assert b.r(2.0) == pytest.approx(0.7, abs=1e-6)
    assert b.integral_r == pytest.approx(1 / 0.3, abs=1e-2)
    assert b.integrable_verdict == "yes"
    assert check_resolvent_integrals(b, mu_delay).status == "pass"


def test_delay_resolvent_needs_support():
    with pytest.raises(ValueError):
        fde_resolvent(FiniteSignedMeasure(exp_terms=((1.0, 1.0),), past=True), 1e-2, 10.0)


def test_delay_resolvent_off_grid_delay():
    mu = FiniteSignedMeasure.dirac(-1.0004, -0.3, past=True)
    with pytest.raises(ValueError):
        fde_resolvent(mu, 1e-2, 10.0, snap_tol=1e-5)


def test_integral_resolvent_exponential():
    b = integral_resolvent(lambda t: np.exp(-2 * t), 1e-3, 30.0)
    t = b.r.t[b.r.t <= 5.0]
    assert np.max(np.abs(b.r.values[: t.size] - np.exp(-t))) <= 1e-4
    assert b.r_prime is None and b.integral_r_prime is None
    assert b.integral_r == pytest.approx(1.0, abs=1e-3)
    assert b.integrable_verdict == "yes"
    with pytest.raises(ValueError):
        check_resolvent_integrals(b, FiniteSignedMeasure.zero())


def test_integral_resolvent_grid_kernel():
    k = GridFunction.sample(lambda t: np.exp(-2 * t), 1e-3, 30.0)
    a = integral_resolvent(k, 1e-3, 10.0)
    b = integral_resolvent(lambda t: np.exp(-2 * t), 1e-3, 10.0)
    assert np.max(np.abs(a.r.values - b.r.values)) < 1e-12


def test_zero_kernel():
    b = integral_resolvent(lambda t: 0 * t, 1e-2, 10.0)
    assert np.all(b.r.values == 0.0)


def test_growing_integral_resolvent():
    b = integral_resolvent(lambda t: np.ones_like(t), 1e-2, 20.0)
    # r_k = exp(t)
    assert b.r(5.0) == pytest.approx(np.exp(5.0), rel=1e-3)
    assert b.integrable_verdict in ("no", "inconclusive")
