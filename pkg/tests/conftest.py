import numpy as np
import pytest

from fraclattice.kernels import Family, OperatorSpec, Sign, fractional_kernel


@pytest.fixture(scope="session")
def frac_laplacian_generator():
    """Generator-form fractional Laplacian at alpha = 1/2 on [-40, 40]."""
    return fractional_kernel(OperatorSpec(Family.DISCRETE_LAPLACIAN, 0.5, sign=Sign.GENERATOR), 40)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0].split("=")[1])):
            terminalreporter.write_line(line)
