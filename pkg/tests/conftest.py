import sys
from pathlib import Path

import numpy as np
import pytest

# app_packages is a site directory for the app; mirror that for the tests
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "app_packages"))

from crossdipole.channel import RadioConfig  # noqa: E402
from crossdipole.geometry import TopologyConfig  # noqa: E402

# Rayleigh scale of the default annulus [10, 100]; pinned so tests skip the 10^6-draw fit
RAYLEIGH_B = 60.8


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def topology():
    return TopologyConfig(rayleigh_b=RAYLEIGH_B)


@pytest.fixture(scope="session")
def radio():
    return RadioConfig()
