import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wlsample.sampling import RngStream
from wlsample.spaces import FunctionSpace

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def legendre2():
    return FunctionSpace("legendre", 2)


@pytest.fixture
def legendre4():
    return FunctionSpace("legendre", 4)


@pytest.fixture
def fourier3():
    return FunctionSpace("fourier", 3)


@pytest.fixture
def pc4():
    return FunctionSpace("piecewise_constant", 4)


@pytest.fixture
def rng():
    return RngStream(20240601, 0)


def random_hermitian(gen, n, scale=1.0):
    A = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    return scale * (A + A.conj().T) / 2


@pytest.fixture
def gen():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
