import pytest

from torscat import SieveParams, TorusGeometry
from torscat.lattice import class_table


@pytest.fixture(scope="session")
def golden():
    return TorusGeometry.golden()


@pytest.fixture(scope="session")
def square():
    """Degenerate unit lattice, handy for integer oracles."""
    return TorusGeometry.from_a(1.0)


@pytest.fixture(scope="session")
def sqrt2():
    return TorusGeometry.named("sqrt2")


@pytest.fixture(scope="session")
def params():
    return SieveParams()


@pytest.fixture(scope="session")
def golden_table(golden):
    return class_table(golden, 6000.0)
