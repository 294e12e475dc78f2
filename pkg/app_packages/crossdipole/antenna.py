"""
Normalized field patterns of the cross-dipole transmitter (a z-axis and a y-axis
half-wave dipole) and the preamble-power rule that picks between them.

Angles follow the usual spherical convention: theta from the +z axis, phi from +x.
"""

import math
from collections.abc import Mapping
from enum import IntEnum

import numpy as np

# Below this distance (radians) from a pattern null the direct quotient is 0/0;
# the two-term Taylor branch is used instead
SERIES_THRESHOLD = 1e-3

HALF_WAVE = 0.5  # dipole length in wavelengths


class AntennaKind(IntEnum):
    DIPOLE_Z = 0
    DIPOLE_Y = 1
    OMNI = 2


def _scalar_or_array(value: np.ndarray):
    return value if value.ndim else float(value)


def field_pattern_general(theta, length_wavelengths: float = HALF_WAVE):
    """
    Field pattern of a z-axis dipole of arbitrary length:

        (cos(kl * cos(theta)) - cos(kl)) / sin(theta),   kl = pi * length / wavelength

    Only the half-wave case is normalized to a unit maximum.
    """
    if length_wavelengths <= 0:
        raise ValueError(f"dipole length must be > 0 wavelengths (got {length_wavelengths})")

    theta = np.asarray(theta, dtype=float)
    kl = math.pi * length_wavelengths

    # distance to the nearest point on the dipole axis
    eps = np.minimum(np.abs(theta), np.abs(math.pi - theta))
    near_axis = eps < SERIES_THRESHOLD

    safe_theta = np.where(near_axis, math.pi / 2, theta)
    direct = (np.cos(kl * np.cos(safe_theta)) - math.cos(kl)) / np.sin(safe_theta)

    c1 = kl * math.sin(kl) / 2.0
    c3 = kl * math.sin(kl) / 24.0 - kl**2 * math.cos(kl) / 8.0
    series = c1 * eps + c3 * eps**3

    return _scalar_or_array(np.where(near_axis, series, direct))


def field_pattern_z(theta):
    """cos(pi/2 * cos(theta)) / sin(theta), with the limit 0 along the axis."""
    theta = np.asarray(theta, dtype=float)

    eps = np.minimum(np.abs(theta), np.abs(math.pi - theta))
    near_axis = eps < SERIES_THRESHOLD

    safe_theta = np.where(near_axis, math.pi / 2, theta)
    direct = np.cos(math.pi / 2 * np.cos(safe_theta)) / np.sin(safe_theta)
    series = math.pi / 4 * eps * (1.0 + eps**2 / 12.0)

    value = np.where(near_axis, series, direct)
    return _scalar_or_array(np.clip(value, 0.0, 1.0))


def field_pattern_y(theta, phi):
    """
    The y-axis dipole sees the z-dipole pattern at the angle gamma between the
    propagation direction and the y axis, cos(gamma) = sin(theta) * sin(phi).
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)

    u = np.clip(np.sin(theta) * np.sin(phi), -1.0, 1.0)
    # atan2 keeps gamma accurate next to |u| = 1, where acos(u) loses half its digits
    gamma = np.arctan2(np.sqrt((1.0 - u) * (1.0 + u)), u)

    return field_pattern_z(gamma)


def gain(kind, theta, phi=0.0):
    """Power gain F^2 for the dipoles, 1 for the omni antenna. Broadcasts over arrays."""
    kind = np.asarray(kind)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)

    g_z = np.asarray(field_pattern_z(theta)) ** 2
    g_y = np.asarray(field_pattern_y(theta, phi)) ** 2

    value = np.select(
        [kind == AntennaKind.DIPOLE_Z, kind == AntennaKind.DIPOLE_Y],
        [g_z, g_y],
        default=1.0,
    )
    return _scalar_or_array(np.asarray(value, dtype=float))


def select_antenna(preamble_powers: Mapping[AntennaKind, float]) -> AntennaKind:
    """Argmax of the received preamble powers; a tie goes to the z-axis dipole."""
    missing = [
        kind.name
        for kind in (AntennaKind.DIPOLE_Z, AntennaKind.DIPOLE_Y)
        if kind not in preamble_powers
    ]
    if missing:
        raise ValueError(f"preamble powers are missing for {', '.join(missing)}")

    power_z = preamble_powers[AntennaKind.DIPOLE_Z]
    power_y = preamble_powers[AntennaKind.DIPOLE_Y]
    for kind, power in ((AntennaKind.DIPOLE_Z, power_z), (AntennaKind.DIPOLE_Y, power_y)):
        if not (math.isfinite(power) and power >= 0):
            raise ValueError(f"preamble power for {kind.name} must be finite and >= 0 (got {power})")

    return AntennaKind.DIPOLE_Y if power_y > power_z else AntennaKind.DIPOLE_Z


def select_antennas(power_z, power_y) -> np.ndarray:
    """Vectorized `select_antenna` over arrays of measured powers."""
    return np.where(
        np.asarray(power_y) > np.asarray(power_z),
        int(AntennaKind.DIPOLE_Y),
        int(AntennaKind.DIPOLE_Z),
    )


def pattern_grid(kind: AntennaKind, n: int) -> dict[str, np.ndarray]:
    """
    Samples the field pattern on an n x n (theta, phi) grid over the full sphere,
    along with the Cartesian point F * (unit direction) used to draw the 3D shape.
    """
    if n < 2:
        raise ValueError(f"grid size must be >= 2 (got {n})")

    theta, phi = np.meshgrid(
        np.linspace(0.0, math.pi, n), np.linspace(0.0, 2.0 * math.pi, n), indexing="ij"
    )
    if kind == AntennaKind.DIPOLE_Z:
        field = np.asarray(field_pattern_z(theta))
    elif kind == AntennaKind.DIPOLE_Y:
        field = np.asarray(field_pattern_y(theta, phi))
    else:
        field = np.ones_like(theta)

    return {
        "theta": theta.ravel(),
        "phi": phi.ravel(),
        "field": field.ravel(),
        "x": (field * np.sin(theta) * np.cos(phi)).ravel(),
        "y": (field * np.sin(theta) * np.sin(phi)).ravel(),
        "z": (field * np.cos(theta)).ravel(),
    }
