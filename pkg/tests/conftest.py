import pytest

from spinsys.rate_models import Contact, Independent, Voter


@pytest.fixture
def contact():
    return Contact(1.5)


@pytest.fixture
def independent():
    return Independent(1.0, 1.0)


@pytest.fixture
def voter():
    return Voter()
