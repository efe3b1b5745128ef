import math

import numpy as np
import pytest

from pais_uhlenbeck import Parameters

FIX_A = Parameters(m=1.0, omega_sq=0.8, lam=0.2)
FIX_B = Parameters(m=1.0, omega_sq=1.0, lam=0.25)
FIX_C = Parameters(m=1.0, omega_sq=1.0, lam=0.5)
FIX_D = Parameters(m=1.0, omega_sq=1.0, lam=-0.5)

FIXTURES = {"A": FIX_A, "B": FIX_B, "C": FIX_C, "D": FIX_D}

QUARTER = math.pi / 4


@pytest.fixture(params=sorted(FIXTURES), ids=lambda k: f"fix{k}")
def any_fixture(request):
    return FIXTURES[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
