import math

import numpy as np
import pytest

from volterra_ces.measures import FiniteSignedMeasure

# Frozen oracles (computed independently of the package):
# real branches of lam * exp(lam) = -0.3, from scipy.special.lambertw and
# confirmed by bisection on lam + 0.3 exp(-lam) = 0
ROOT_DECAY_MAIN = -0.4894022271802149
ROOT_DECAY_SECOND = -1.7813370234216275
# real root of lam = 0.3 exp(-lam), bisection
ROOT_GROWTH = 0.23675531078855933
# r(1) for nu = -2 delta_0 + exp(-s) ds: first entry of expm([[-2, 1], [1, -1]])
EXP_KERNEL_R1 = 0.24142772397831136
# residue of 1/h at i pi/2 for mu = -(pi/2) delta_{-1}: 1/(1 + i pi/2)
RESONANT_C1 = 2 / (1 + math.pi ** 2 / 4)
RESONANT_K1 = math.pi / (1 + math.pi ** 2 / 4)


@pytest.fixture
def nu_decay():
    """-delta_0: r(t) = exp(-t)."""
    return FiniteSignedMeasure.dirac(0.0, -1.0)


@pytest.fixture
def nu_exp():
    """-2 delta_0 + exp(-s) ds, total mass -1."""
    return FiniteSignedMeasure(atoms=((0.0, -2.0),), exp_terms=((1.0, 1.0),))


@pytest.fixture
def mu_delay():
    """-0.3 delta_{-1} on [-1, 0]."""
    return FiniteSignedMeasure.dirac(-1.0, -0.3, past=True)


@pytest.fixture
def mu_resonant():
    """-(pi/2) delta_{-1}: characteristic roots +-i pi/2."""
    return FiniteSignedMeasure.dirac(-1.0, -math.pi / 2, past=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# ---------------------------------------------------------------- acceptance lines

ACCEPTANCE = {}


def record(number, title, passed, detail):
    ACCEPTANCE[number] = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
