import pytest
from hypothesis import settings

from rdcsim.profiles import builtin_profile

settings.register_profile("ci", deadline=None, derandomize=True)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def d1():
    return builtin_profile("d1")


@pytest.fixture(scope="session")
def d2():
    return builtin_profile("d2")


@pytest.fixture(scope="session")
def d3():
    return builtin_profile("d3")
