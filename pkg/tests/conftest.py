import pytest

from becreg.reference import OperatingPoint


@pytest.fixture(scope="session")
def op():
    """Default operating point, shared so the heavy chains run once."""
    return OperatingPoint()


@pytest.fixture(scope="session")
def exchange_table(op):
    return op.exchange_table()
