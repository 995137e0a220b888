import pytest

from biphoton import build_setup
from biphoton.scan import aperture


@pytest.fixture(scope="session")
def setup():
    """Calibrated default configuration."""
    return build_setup()


@pytest.fixture(scope="session")
def ap(setup):
    return aperture(setup.geometry, setup.grid)
