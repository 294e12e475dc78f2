"""
Node placement on the ground annulus and the distance / angle laws derived from it.

Two scenarios are covered:

- stand-alone: one aerial receiver fixed at (0, 0, h), transmitters uniform in
  radius and azimuth over the annulus [m0, m_max];
- multi-pair: K transmitters and K receivers all drawn independently from the same
  annulus law, the first K_arl receivers lifted to height h.

Every sampler takes an explicit `numpy.random.Generator`, so the same generator state
and config always produce the same draws.
"""

import functools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, InsufficientDataError

TWO_PI = 2.0 * math.pi

# Links shorter than this are redrawn; free-space pathloss is unbounded at R -> 0
MIN_SEPARATION = 1.0  # meters
# Redraw rounds before an annulus is declared too thin for MIN_SEPARATION
MAX_RESAMPLE_ROUNDS = 1000

# Draws used to fit the Rayleigh scale of r_hat when the config does not supply one
RAYLEIGH_FIT_SAMPLES = 1_000_000
RAYLEIGH_FIT_SEED = 0x5EED


@dataclass(frozen=True)
class TopologyConfig:
    m0: float = 10.0
    m_max: float = 100.0
    h: float = 100.0
    K: int = 10
    K_arl: int = 0
    rayleigh_b: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.m0) and self.m0 > 0):
            raise ConfigError("m0", f"must be a finite value > 0 (got {self.m0})")
        if not (math.isfinite(self.m_max) and self.m_max > self.m0):
            raise ConfigError(
                "m_max", f"m0 < m_max is required (got m0={self.m0}, m_max={self.m_max})"
            )
        if not (math.isfinite(self.h) and self.h > 0):
            raise ConfigError("h", f"must be a finite value > 0 (got {self.h})")
        if int(self.K) != self.K or self.K < 1:
            raise ConfigError("K", f"must be an integer >= 1 (got {self.K})")
        if int(self.K_arl) != self.K_arl or not 0 <= self.K_arl <= self.K:
            raise ConfigError(
                "K_arl", f"must be an integer in [0, K={self.K}] (got {self.K_arl})"
            )
        if self.rayleigh_b is not None and not (
            math.isfinite(self.rayleigh_b) and self.rayleigh_b > 0
        ):
            raise ConfigError("rayleigh_b", f"must be > 0 when set (got {self.rayleigh_b})")

    @property
    def K_grd(self) -> int:
        return self.K - self.K_arl

    @property
    def b(self) -> float:
        """Rayleigh scale of r_hat; fitted from simulated deployments when not configured."""
        if self.rayleigh_b is not None:
            return self.rayleigh_b
        return _fitted_rayleigh_b(self.m0, self.m_max)


class ReceiverKind(Enum):
    GROUND = "ground"
    AERIAL = "aerial"


@dataclass(frozen=True)
class LinkGeometry:
    r_hat: float
    phi_hat: float
    theta: float
    R: float


@dataclass(frozen=True)
class Deployment:
    tx_positions: tuple[tuple[float, float], ...]
    rx_positions: tuple[tuple[float, float, float], ...]
    rx_kind: tuple[ReceiverKind, ...]
    # pairing[i] is the receiver served by transmitter i
    pairing: tuple[int, ...]
    resamples: int = 0

    @property
    def K(self) -> int:
        return len(self.tx_positions)


@dataclass
class DeploymentBatch:
    """
    T multi-pair deployments stored as (T, K) arrays. Pairing is the identity:
    transmitter i serves receiver i.
    """

    tx_r: np.ndarray
    tx_phi: np.ndarray
    rx_r: np.ndarray
    rx_phi: np.ndarray
    rx_z: np.ndarray
    resamples: int = 0
    aerial: np.ndarray = field(init=False)

    def __post_init__(self):
        self.aerial = self.rx_z > 0

    @property
    def trials(self) -> int:
        return self.tx_r.shape[0]

    @property
    def K(self) -> int:
        return self.tx_r.shape[1]

    def links(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(r_hat, phi_hat, theta, R), each (T, K_rx, K_tx)."""
        return link_arrays(
            self.tx_r[:, None, :],
            self.tx_phi[:, None, :],
            self.rx_r[:, :, None],
            self.rx_phi[:, :, None],
            self.rx_z[:, :, None],
        )

    def deployment(self, t: int) -> Deployment:
        K = self.K
        return Deployment(
            tx_positions=tuple(
                (float(self.tx_r[t, i]), float(self.tx_phi[t, i])) for i in range(K)
            ),
            rx_positions=tuple(
                (float(self.rx_r[t, i]), float(self.rx_phi[t, i]), float(self.rx_z[t, i]))
                for i in range(K)
            ),
            rx_kind=tuple(
                ReceiverKind.AERIAL if self.aerial[t, i] else ReceiverKind.GROUND
                for i in range(K)
            ),
            pairing=tuple(range(K)),
            resamples=self.resamples,
        )


def as_generator(seed) -> np.random.Generator:
    """Accepts an int, a SeedSequence or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def link_arrays(tx_r, tx_phi, rx_r, rx_phi, rx_z):
    """
    Broadcasting form of `link_geometry`. Returns (r_hat, phi_hat, theta, R).
    Ground receivers (z = 0) get theta = pi/2.
    """
    tx_r = np.asarray(tx_r, dtype=float)
    rx_r = np.asarray(rx_r, dtype=float)
    rx_z = np.asarray(rx_z, dtype=float)

    phi_hat = np.abs(np.asarray(rx_phi, dtype=float) - np.asarray(tx_phi, dtype=float))
    r_hat_sq = tx_r**2 + rx_r**2 - 2.0 * tx_r * rx_r * np.cos(phi_hat)
    r_hat = np.sqrt(np.maximum(r_hat_sq, 0.0))

    elevated = rx_z > 0
    safe_z = np.where(elevated, rx_z, 1.0)
    theta = np.where(elevated, np.arctan(r_hat / safe_z), math.pi / 2)
    R = np.sqrt(r_hat**2 + rx_z**2)

    return r_hat, phi_hat, theta, R


def link_geometry(
    tx: tuple[float, float], rx: tuple[float, float, float]
) -> LinkGeometry:
    r_hat, phi_hat, theta, R = link_arrays(tx[0], tx[1], rx[0], rx[1], rx[2])
    return LinkGeometry(
        r_hat=float(r_hat), phi_hat=float(phi_hat), theta=float(theta), R=float(R)
    )


# Stand-alone scenario


def sample_standalone_batch(
    config: TopologyConfig, rng: np.random.Generator, size
) -> tuple[np.ndarray, np.ndarray]:
    """Transmitter polar coordinates (r, phi) for `size` independent draws."""
    r = rng.uniform(config.m0, config.m_max, size)
    phi = rng.uniform(0.0, TWO_PI, size)
    return r, phi


def sample_standalone(config: TopologyConfig, seed) -> LinkGeometry:
    rng = as_generator(seed)
    r, phi = sample_standalone_batch(config, rng, None)
    return link_geometry((float(r), float(phi)), (0.0, 0.0, config.h))


def theta_support_standalone(config: TopologyConfig) -> tuple[float, float]:
    return math.atan(config.m0 / config.h), math.atan(config.m_max / config.h)


def pdf_theta_standalone(theta, config: TopologyConfig):
    theta = np.asarray(theta, dtype=float)
    lo, hi = theta_support_standalone(config)
    scale = config.h / (config.m_max - config.m0)
    inside = (theta >= lo) & (theta <= hi)
    density = np.where(inside, scale * (np.tan(np.where(inside, theta, 0.0)) ** 2 + 1.0), 0.0)
    return density if density.ndim else float(density)


def cdf_theta_standalone(theta, config: TopologyConfig):
    theta = np.clip(np.asarray(theta, dtype=float), *theta_support_standalone(config))
    cdf = (config.h * np.tan(theta) - config.m0) / (config.m_max - config.m0)
    cdf = np.clip(cdf, 0.0, 1.0)
    return cdf if cdf.ndim else float(cdf)


# Multi-pair scenario


def sample_multipair_batch(
    config: TopologyConfig, rng: np.random.Generator, trials: int
) -> DeploymentBatch:
    """
    Draws `trials` deployments. Any deployment holding a Tx-Rx link shorter than
    MIN_SEPARATION is redrawn as a whole; the number of redraws is kept on the batch.
    Raises ConfigError when MAX_RESAMPLE_ROUNDS rounds still leave short links.
    """
    K = config.K
    shape = (trials, K)

    def draw(n):
        tx_r = rng.uniform(config.m0, config.m_max, (n, K))
        tx_phi = rng.uniform(0.0, TWO_PI, (n, K))
        rx_r = rng.uniform(config.m0, config.m_max, (n, K))
        rx_phi = rng.uniform(0.0, TWO_PI, (n, K))
        return tx_r, tx_phi, rx_r, rx_phi

    rx_z = np.zeros(shape)
    rx_z[:, : config.K_arl] = config.h

    tx_r, tx_phi, rx_r, rx_phi = draw(trials)
    resamples = 0

    for _ in range(MAX_RESAMPLE_ROUNDS + 1):
        _, _, _, R = link_arrays(
            tx_r[:, None, :],
            tx_phi[:, None, :],
            rx_r[:, :, None],
            rx_phi[:, :, None],
            rx_z[:, :, None],
        )
        bad = np.flatnonzero((R < MIN_SEPARATION).any(axis=(1, 2)))
        if bad.size == 0:
            return DeploymentBatch(tx_r, tx_phi, rx_r, rx_phi, rx_z, resamples=resamples)

        resamples += int(bad.size)
        redrawn = draw(bad.size)
        for target, fresh in zip((tx_r, tx_phi, rx_r, rx_phi), redrawn):
            target[bad] = fresh

    raise ConfigError(
        "m_max",
        f"annulus [{config.m0}, {config.m_max}] is too thin to keep {K} Tx-Rx pairs at least "
        f"{MIN_SEPARATION} m apart ({resamples} deployments redrawn over {MAX_RESAMPLE_ROUNDS} rounds)",
    )


def sample_multipair(config: TopologyConfig, seed) -> Deployment:
    return sample_multipair_batch(config, as_generator(seed), 1).deployment(0)


def sample_r_hat(config: TopologyConfig, rng: np.random.Generator, size: int) -> np.ndarray:
    """Ground-plane separation between an independent Tx and Rx draw."""
    tx_r = rng.uniform(config.m0, config.m_max, size)
    tx_phi = rng.uniform(0.0, TWO_PI, size)
    rx_r = rng.uniform(config.m0, config.m_max, size)
    rx_phi = rng.uniform(0.0, TWO_PI, size)
    r_hat, _, _, _ = link_arrays(tx_r, tx_phi, rx_r, rx_phi, 0.0)
    return r_hat


def pdf_phi_hat(phi_hat):
    phi_hat = np.asarray(phi_hat, dtype=float)
    inside = (phi_hat >= 0) & (phi_hat <= TWO_PI)
    density = np.where(inside, (TWO_PI - phi_hat) / (2.0 * math.pi**2), 0.0)
    return density if density.ndim else float(density)


def cdf_phi_hat(phi_hat):
    x = np.clip(np.asarray(phi_hat, dtype=float), 0.0, TWO_PI)
    cdf = (TWO_PI * x - x**2 / 2.0) / (2.0 * math.pi**2)
    return cdf if cdf.ndim else float(cdf)


def fit_rayleigh_b(samples) -> float:
    """Maximum-likelihood Rayleigh scale, sqrt(sum(r^2) / (2n))."""
    values = np.asarray(samples, dtype=float).ravel()
    if values.size == 0:
        raise InsufficientDataError("cannot fit a Rayleigh scale to an empty sample")
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise ValueError("r_hat samples must be finite and non-negative")

    return math.sqrt(math.fsum(values**2) / (2.0 * values.size))


@functools.lru_cache(maxsize=32)
def _fitted_rayleigh_b(m0: float, m_max: float) -> float:
    config = TopologyConfig(m0=m0, m_max=m_max, rayleigh_b=1.0)
    rng = np.random.default_rng(RAYLEIGH_FIT_SEED)
    b = fit_rayleigh_b(sample_r_hat(config, rng, RAYLEIGH_FIT_SAMPLES))
    print(f"Fitted Rayleigh scale b={b:.4f} for annulus [{m0}, {m_max}]")
    return b


def pdf_r_hat(r_hat, b: float):
    if b <= 0:
        raise ValueError(f"Rayleigh scale must be > 0 (got {b})")
    r = np.asarray(r_hat, dtype=float)
    density = np.where(r >= 0, r / b**2 * np.exp(-(r**2) / (2.0 * b**2)), 0.0)
    return density if density.ndim else float(density)


def cdf_r_hat(r_hat, b: float):
    r = np.maximum(np.asarray(r_hat, dtype=float), 0.0)
    cdf = -np.expm1(-(r**2) / (2.0 * b**2))
    return cdf if cdf.ndim else float(cdf)


def theta_support_multipair(config: TopologyConfig) -> tuple[float, float]:
    return 0.0, math.atan(2.0 * config.m_max / config.h)


def pdf_theta_multipair(theta, config: TopologyConfig):
    # Not renormalized over the truncated support; the fit's tail beyond
    # atan(2 m_max / h) is simply dropped.
    theta = np.asarray(theta, dtype=float)
    b = config.b
    h = config.h
    lo, hi = theta_support_multipair(config)
    inside = (theta >= lo) & (theta <= hi)
    t = np.tan(np.where(inside, theta, 0.0))
    density = (h**2 * t / b**2) * np.exp(-(h**2) * t**2 / (2.0 * b**2)) * (1.0 + t**2)
    density = np.where(inside, density, 0.0)
    return density if density.ndim else float(density)
