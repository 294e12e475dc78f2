import math

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# Thermal noise density used by the noise power formula, in dBm/Hz
THERMAL_NOISE_DBM_PER_HZ = -174.0


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts):
    """
    Works on scalars and arrays. Zero power maps to -inf rather than raising,
    since mean interference can legitimately be zero (K = 1).
    """
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(watts, dtype=float)) + 30.0


def db_to_linear(db: float) -> float:
    if math.isinf(db) and db > 0:
        return math.inf
    return 10.0 ** (db / 10.0)


def wavelength(f0: float) -> float:
    return SPEED_OF_LIGHT / f0


def noise_power_watts(bandwidth: float) -> float:
    """-174 + 10*log10(B) dBm, converted to watts."""
    return dbm_to_watts(THERMAL_NOISE_DBM_PER_HZ + 10.0 * math.log10(bandwidth))
