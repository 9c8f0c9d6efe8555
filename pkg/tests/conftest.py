from fractions import Fraction

import pytest

from src.biorthogonal.system import build_system
from src.equilibrium.classify import classify_edge
from src.numerics.precision import PrecisionContext
from src.potentials.potential import Potential, Weight


@pytest.fixture(scope="session")
def ctx():
    return PrecisionContext(mantissa_bits=256)


@pytest.fixture(scope="session")
def laguerre_system(ctx):
    """e^{-x}, theta = 2, jmax = 10."""
    return build_system(Weight(), Fraction(2), 10, ctx)


@pytest.fixture(scope="session")
def laguerre_system_3_2(ctx):
    """e^{-x}, theta = 3/2, jmax = 11."""
    return build_system(Weight(), Fraction(3, 2), 11, ctx)


@pytest.fixture(scope="session")
def laguerre_measure():
    return classify_edge(Potential.linear(1.0), 2.0)


@pytest.fixture(scope="session")
def soft_measure():
    return classify_edge(Potential.quadratic(1.0, -3.0), 2.0)
