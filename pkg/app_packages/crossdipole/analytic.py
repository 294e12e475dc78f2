"""
Expected channel gains E{|g|^2} for a cross-dipole ground transmitter and an omni aerial
receiver, and the ergodic-rate approximations built on them.

Each expectation comes two ways:

- QUADRATURE_EXACT: adaptive quadrature (QUADPACK via scipy) of the exact integral over
  the elevation / azimuth laws of `geometry`;
- TAYLOR_CLOSED_FORM: the closed forms obtained by expanding the pattern around theta = 0,
  which tighten as the receiver height grows.

The multi-pair closed forms contain erfi(sqrt(k2) * ...) with k2 = -h^2 / (2 b^2) < 0. They
are evaluated in complex arithmetic through the Faddeeva function
w(z) = exp(-z^2) erfc(-iz), using erfi(z) = -i + i exp(z^2) w(-z); the constant -i cancels
between the integration limits and the remaining factor exp(z^2) merges with the
exp(-3 k2 / 8) prefactor into the bounded integrand exponent.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate, special

from .antenna import AntennaKind, field_pattern_y, field_pattern_z
from .channel import RadioConfig, free_space_pathloss, sample_fading
from .errors import ErfiOverflowError, ResidueError
from .geometry import (
    TWO_PI,
    TopologyConfig,
    as_generator,
    link_arrays,
    sample_standalone_batch,
    theta_support_multipair,
    theta_support_standalone,
)

ERFI_SATURATION = 30.0

QUAD_EPSABS = 1e-14
QUAD_EPSREL = 1e-8
QUAD_LIMIT = 200

# Imaginary part tolerated in a complex-evaluated closed form, relative to the real part
RESIDUE_TOLERANCE = 1e-9

# Below this |k2| the closed forms cancel catastrophically; a power series in k2 is used
K2_SERIES_THRESHOLD = 1e-3
K2_SERIES_TERMS = 16

# Relative annulus width under which the annulus is treated as a circle of radius m0
DEGENERATE_WIDTH = 1e-9


class Method(Enum):
    QUADRATURE_EXACT = "quadrature"
    TAYLOR_CLOSED_FORM = "taylor"


class Scenario(Enum):
    STANDALONE = "standalone"
    MULTIPAIR = "multipair"


@dataclass(frozen=True)
class GainExpectation:
    value: float
    method: Method
    scenario: Scenario
    antenna: AntennaKind


def erfi(x):
    """Imaginary error function (2/sqrt(pi)) * integral_0^x exp(t^2) dt, via Dawson's integral."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > ERFI_SATURATION):
        worst = float(x.flat[np.argmax(np.abs(x))])
        raise ErfiOverflowError(worst, ERFI_SATURATION)

    # exp(x^2) overflows a double past |x| ~ 26.6; the result is then +-inf
    with np.errstate(over="ignore"):
        value = 2.0 / math.sqrt(math.pi) * np.exp(x**2) * special.dawsn(x)
    return value if value.ndim else float(value)


def _quad(func, a: float, b: float) -> float:
    value, _ = integrate.quad(
        func, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT
    )
    return value


def _dblquad(func, theta_lo: float, theta_hi: float) -> float:
    """Integrates func(theta, phi) over theta in [theta_lo, theta_hi] and phi in [0, 2 pi]."""
    value, _ = integrate.dblquad(
        func, 0.0, TWO_PI, theta_lo, theta_hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL
    )
    return value


def _check_dipole(antenna: AntennaKind):
    if antenna not in (AntennaKind.DIPOLE_Z, AntennaKind.DIPOLE_Y):
        raise ValueError(f"expected gains are defined for the two dipoles (got {antenna})")


def _real_part(value: complex, what: str) -> float:
    if abs(value.imag) > RESIDUE_TOLERANCE * max(abs(value.real), np.finfo(float).tiny):
        raise ResidueError(f"{what} left an imaginary residue {value.imag:.3e} (real {value.real:.3e})")
    return float(value.real)


# Stand-alone scenario


def expected_gain_standalone(
    antenna: AntennaKind,
    config: TopologyConfig,
    radio: RadioConfig,
    method: Method = Method.TAYLOR_CLOSED_FORM,
) -> GainExpectation:
    _check_dipole(antenna)
    k1 = radio.k1
    h = config.h
    width = config.m_max - config.m0
    lo, hi = theta_support_standalone(config)

    if width < DEGENERATE_WIDTH * config.m_max:
        value = _point_mass_standalone(antenna, lo, k1, h, method)
    elif method is Method.QUADRATURE_EXACT:
        if antenna is AntennaKind.DIPOLE_Z:
            integral = _quad(lambda t: field_pattern_z(t) ** 2, lo, hi)
            value = k1 * integral / (width * h)
        else:
            integral = _dblquad(lambda t, p: field_pattern_y(t, p) ** 2, lo, hi)
            value = k1 * integral / (TWO_PI * h * width)
    else:
        cubes = hi**3 - lo**3
        if antenna is AntennaKind.DIPOLE_Z:
            value = math.pi**2 * k1 * cubes / (48.0 * width * h)
        else:
            bracket = (4.0 * math.pi - math.pi**3) * cubes / 12.0 + TWO_PI * (hi - lo)
            value = k1 * bracket / (TWO_PI * h * width)

    return GainExpectation(value, method, Scenario.STANDALONE, antenna)


def _point_mass_standalone(antenna, theta, k1, h, method) -> float:
    """Limit m_max -> m0: every transmitter sits at elevation theta."""
    spread = k1 * math.cos(theta) ** 2 / h**2

    if method is Method.TAYLOR_CLOSED_FORM:
        if antenna is AntennaKind.DIPOLE_Z:
            return spread * (math.pi * theta / 4.0) ** 2
        return spread * (1.0 + (4.0 - math.pi**2) * theta**2 / 8.0)

    if antenna is AntennaKind.DIPOLE_Z:
        return spread * field_pattern_z(theta) ** 2
    return spread * _quad(lambda p: field_pattern_y(theta, p) ** 2, 0.0, TWO_PI) / TWO_PI


# Multi-pair scenario


def k2_of(config: TopologyConfig) -> float:
    return -(config.h**2) / (2.0 * config.b**2)


def _sqrt_k2(k2: float) -> complex:
    # Either square root gives the same closed form (sqrt(k2) * erfi(sqrt(k2) * v) is even);
    # this branch puts -z in the upper half plane, where w(-z) stays bounded.
    if k2 < 0:
        return -1j * math.sqrt(-k2)
    return complex(math.sqrt(k2))


def _moment_series(n: int, k2: float, upper: float) -> float:
    """integral_0^U theta^n exp(k2 (theta^2 + 2/3 theta^4)) dtheta as a power series in k2."""
    total = 0.0
    k2_power = 1.0
    for j in range(K2_SERIES_TERMS):
        inner = math.fsum(
            math.comb(j, m)
            * (2.0 / 3.0) ** m
            * upper ** (n + 2 * j + 2 * m + 1)
            / (n + 2 * j + 2 * m + 1)
            for m in range(j + 1)
        )
        total += k2_power / math.factorial(j) * inner
        k2_power *= k2
    return total


def taylor_moments(k2: float, upper: float) -> tuple[float, float]:
    """
    (M1, M3) with Mn = integral_0^U theta^n exp(k2 (theta^2 + 2/3 theta^4)) dtheta,
    the two integrals the multi-pair closed forms are assembled from.
    """
    if abs(k2) < K2_SERIES_THRESHOLD:
        return _moment_series(1, k2, upper), _moment_series(3, k2, upper)

    root = _sqrt_k2(k2)

    def exponent(theta):
        return math.exp(k2 * (theta**2 + 2.0 / 3.0 * theta**4))

    def erfi_term(theta):
        # exp(-3 k2 / 8) * erfi(z), without its constant -i * exp(-3 k2 / 8)
        z = root * (4.0 * theta**2 + 3.0) / (2.0 * math.sqrt(6.0))
        return 1j * exponent(theta) * special.wofz(-z)

    def m1(theta):
        return math.sqrt(1.5 * math.pi) / (4.0 * root) * erfi_term(theta)

    def m3(theta):
        return (-3.0 / (32.0 * k2)) * (
            math.sqrt(6.0 * math.pi) * root * erfi_term(theta) - 4.0 * exponent(theta)
        )

    M1 = _real_part(m1(upper) - m1(0.0), "first-order moment")
    M3 = _real_part(m3(upper) - m3(0.0), "third-order moment")
    return M1, M3


Y_CUBIC_COEFF = 5.0 * math.pi**2 / 3.0 - math.pi**4 / 4.0


def taylor_integrand_multipair(theta, antenna: AntennaKind, config: TopologyConfig, radio: RadioConfig):
    """The theta-integrand the multi-pair closed forms integrate (azimuth already averaged)."""
    _check_dipole(antenna)
    theta = np.asarray(theta, dtype=float)
    k2 = k2_of(config)
    b2 = config.b**2
    envelope = np.exp(k2 * (theta**2 + 2.0 / 3.0 * theta**4))

    if antenna is AntennaKind.DIPOLE_Z:
        return radio.k1 / b2 * (math.pi**2 * theta**3 / 16.0) * envelope
    return (
        radio.k1
        / (2.0 * math.pi**2 * b2)
        * (2.0 * math.pi**2 * theta + Y_CUBIC_COEFF * theta**3)
        * envelope
    )


def expected_gain_multipair(
    antenna: AntennaKind,
    config: TopologyConfig,
    radio: RadioConfig,
    method: Method = Method.TAYLOR_CLOSED_FORM,
) -> GainExpectation:
    _check_dipole(antenna)
    k1 = radio.k1
    b2 = config.b**2
    k2 = k2_of(config)
    _, upper = theta_support_multipair(config)

    if method is Method.QUADRATURE_EXACT:
        def radial(t):
            tan_t = math.tan(t)
            return tan_t * math.exp(k2 * tan_t**2)

        if antenna is AntennaKind.DIPOLE_Z:
            integral = _quad(lambda t: field_pattern_z(t) ** 2 * radial(t), 0.0, upper)
            value = k1 / b2 * integral
        else:
            integral = _dblquad(
                lambda t, p: field_pattern_y(t, p) ** 2 * radial(t) * (TWO_PI - p),
                0.0,
                upper,
            )
            value = k1 / (2.0 * math.pi**2 * b2) * integral
    else:
        M1, M3 = taylor_moments(k2, upper)
        if antenna is AntennaKind.DIPOLE_Z:
            value = k1 / b2 * math.pi**2 / 16.0 * M3
        else:
            value = k1 / (2.0 * math.pi**2 * b2) * (2.0 * math.pi**2 * M1 + Y_CUBIC_COEFF * M3)

    return GainExpectation(value, method, Scenario.MULTIPAIR, antenna)


def expected_gain_monte_carlo(
    antenna: AntennaKind,
    scenario: Scenario,
    config: TopologyConfig,
    radio: RadioConfig,
    trials: int,
    seed,
) -> tuple[float, float]:
    """
    Sample mean and standard error of |g|^2 over random geometry and fading. The multi-pair
    estimate draws r_hat from the exact deployment law, not from its Rayleigh fit.
    """
    _check_dipole(antenna)
    if trials < 2:
        raise ValueError(f"need at least 2 trials for a standard error (got {trials})")

    rng = as_generator(seed)
    if scenario is Scenario.STANDALONE:
        r, phi = sample_standalone_batch(config, rng, trials)
        _, phi_hat, theta, R = link_arrays(r, phi, 0.0, 0.0, config.h)
    else:
        tx_r, tx_phi = sample_standalone_batch(config, rng, trials)
        rx_r, rx_phi = sample_standalone_batch(config, rng, trials)
        _, phi_hat, theta, R = link_arrays(tx_r, tx_phi, rx_r, rx_phi, config.h)

    alpha = sample_fading(radio.fading, radio.kappa, rng, trials)
    pattern = field_pattern_z(theta) if antenna is AntennaKind.DIPOLE_Z else field_pattern_y(theta, phi_hat)
    g = radio.P * np.asarray(pattern) ** 2 * free_space_pathloss(R, radio.wavelength) * np.abs(alpha) ** 2

    return float(np.mean(g)), float(np.std(g, ddof=1) / math.sqrt(trials))


# Rates


def jensen_rate(desired: float, interference: float, noise: float = 0.0) -> float:
    """log2(1 + E{S} / (sum E{I} + noise)): expectation moved inside the logarithm."""
    denominator = interference + noise
    if denominator <= 0:
        raise ValueError("the Jensen rate needs interference or noise in the denominator")
    return math.log2(1.0 + desired / denominator)


def rate_standalone_z(K: int) -> float:
    if K < 2:
        raise ValueError(f"the rate approximation needs at least one interferer (K >= 2, got {K})")
    return math.log2(1.0 + 1.0 / (K - 1))


def rate_standalone_y(
    K: int,
    config: TopologyConfig,
    radio: RadioConfig,
    method: Method = Method.TAYLOR_CLOSED_FORM,
) -> float:
    if K < 2:
        raise ValueError(f"the rate approximation needs at least one interferer (K >= 2, got {K})")
    zeta_y = expected_gain_standalone(AntennaKind.DIPOLE_Y, config, radio, method).value
    zeta_z = expected_gain_standalone(AntennaKind.DIPOLE_Z, config, radio, method).value
    return jensen_rate(zeta_y, (K - 1) * zeta_z)


def rate_multipair_aerial(
    K_grd: int,
    K_arl: int,
    config: TopologyConfig,
    radio: RadioConfig,
    method: Method = Method.TAYLOR_CLOSED_FORM,
) -> float:
    """
    Aerial receiver served by a y-dipole, interfered by K_grd z-dipoles (serving ground
    receivers) and K_arl - 1 y-dipoles.
    """
    if K_arl < 1:
        raise ValueError(f"an aerial receiver is required (K_arl >= 1, got {K_arl})")
    if K_grd < 0 or K_grd + K_arl < 2:
        raise ValueError(
            f"need K_grd >= 0 and at least one interferer (got K_grd={K_grd}, K_arl={K_arl})"
        )
    zeta_y = expected_gain_multipair(AntennaKind.DIPOLE_Y, config, radio, method).value
    zeta_z = expected_gain_multipair(AntennaKind.DIPOLE_Z, config, radio, method).value
    return jensen_rate(zeta_y, K_grd * zeta_z + (K_arl - 1) * zeta_y)
