import pytest

from ncgeo.infrastructure.algebras import (
    function_algebra,
    matrix_algebra,
    truncated_polynomial_algebra,
)
from ncgeo.services.connes import two_point_triple
from ncgeo.services.matrix_geometry import theta_frame


@pytest.fixture(scope="session")
def M2():
    return matrix_algebra(2)


@pytest.fixture(scope="session")
def M3():
    return matrix_algebra(3)


@pytest.fixture(scope="session")
def C3():
    return function_algebra(3)


@pytest.fixture(scope="session")
def T3():
    return truncated_polynomial_algebra(3)


@pytest.fixture(scope="session")
def theta2():
    return theta_frame(2)


@pytest.fixture(scope="session")
def theta3():
    return theta_frame(3)


@pytest.fixture(scope="session")
def two_point():
    return two_point_triple(1)
