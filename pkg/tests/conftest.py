import pytest

from lpaisim import default_config


@pytest.fixture(scope="session")
def cfg100():
    """Default operating point at 100 Hz (shared; configs are frozen)."""
    return default_config(100.0)


@pytest.fixture(scope="session")
def cfg50():
    return default_config(50.0)


@pytest.fixture(scope="session")
def cfg330():
    return default_config(330.0)
