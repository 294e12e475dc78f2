import math

import numpy as np
import pytest

from crossdipole.utils import db_to_linear, dbm_to_watts, noise_power_watts, watts_to_dbm, wavelength


def test_dbm_conversions():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(23.0) == pytest.approx(0.19952623, rel=1e-7)
    assert watts_to_dbm(1.0) == pytest.approx(30.0)
    assert watts_to_dbm(0.0) == -math.inf


def test_watts_to_dbm_on_arrays():
    np.testing.assert_allclose(watts_to_dbm(np.array([1e-3, 1.0])), [0.0, 30.0], atol=1e-12)


def test_db_to_linear():
    assert db_to_linear(10.0) == pytest.approx(10.0)
    assert db_to_linear(0.0) == 1.0
    assert db_to_linear(math.inf) == math.inf


def test_wavelength_at_800_mhz():
    assert wavelength(800e6) == pytest.approx(0.374740572, rel=1e-8)


def test_noise_power_for_200_khz():
    # -174 dBm/Hz + 10 log10(200e3)
    assert watts_to_dbm(noise_power_watts(200e3)) == pytest.approx(-120.9897, abs=1e-4)
