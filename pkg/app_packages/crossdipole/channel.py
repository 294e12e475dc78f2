import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .antenna import AntennaKind, gain
from .errors import ConfigError
from .geometry import LinkGeometry, as_generator
from .utils import db_to_linear, dbm_to_watts, noise_power_watts, wavelength


class FadingModel(Enum):
    RAYLEIGH = "rayleigh"
    RICIAN = "rician"


@dataclass(frozen=True)
class RadioConfig:
    """All values are linear (watts, hertz); dBm / dB inputs are converted by the config parser."""

    P: float = dbm_to_watts(23.0)
    f0: float = 800e6
    B: float = 200e3
    kappa: float = db_to_linear(10.0)
    fading: FadingModel = FadingModel.RAYLEIGH

    def __post_init__(self):
        for key in ("P", "f0", "B"):
            value = getattr(self, key)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(key, f"must be a finite value > 0 (got {value})")
        if math.isnan(self.kappa) or self.kappa < 0:
            raise ConfigError("kappa", f"must be >= 0 (got {self.kappa})")
        if not isinstance(self.fading, FadingModel):
            raise ConfigError(
                "fading", f"must be one of {[m.value for m in FadingModel]} (got {self.fading})"
            )

    @property
    def wavelength(self) -> float:
        return wavelength(self.f0)

    @property
    def noise_power(self) -> float:
        return noise_power_watts(self.B)

    @property
    def k1(self) -> float:
        """P * lambda^2 / (16 pi^2), the constant in front of every expected gain."""
        return self.P * self.wavelength**2 / (16.0 * math.pi**2)


@dataclass(frozen=True)
class LinkGainSample:
    gain: float
    link: tuple[int, int]  # (tx index, rx index)
    tx_antenna: AntennaKind
    fading: FadingModel


def free_space_pathloss(d, lam: float):
    """(lambda / (4 pi d))^2."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError(
            f"link distance must be > 0 (got {d.min() if d.ndim else float(d)}); "
            "degenerate geometry should have been rejected when the deployment was drawn"
        )
    beta = (lam / (4.0 * math.pi * d)) ** 2
    return beta if beta.ndim else float(beta)


def sample_fading(model: FadingModel, kappa: float, seed, size=None):
    """
    Unit-power small-scale fading amplitude.

    Rayleigh: CN(0, 1). Rician: sqrt(k/(k+1)) + sqrt(1/(k+1)) * CN(0, 1), LoS term without phase.
    """
    rng = as_generator(seed)
    alpha = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) * math.sqrt(0.5)

    if model is FadingModel.RAYLEIGH:
        return alpha

    if kappa < 0:
        raise ValueError(f"Rician K-factor must be >= 0 (got {kappa})")
    if math.isinf(kappa):
        # pure line of sight
        return np.ones_like(alpha) if size is not None else 1.0 + 0.0j

    return math.sqrt(kappa / (kappa + 1.0)) + math.sqrt(1.0 / (kappa + 1.0)) * alpha


def link_gains(theta, phi_hat, R, tx_antenna, radio: RadioConfig, fading_power):
    """
    |g|^2 = P * G_tx(theta, phi_hat) * beta(R) * G_rx * |alpha|^2 with an omni receiver
    (G_rx = 1). Broadcasts over arrays; `fading_power` is |alpha|^2.
    """
    beta = free_space_pathloss(R, radio.wavelength)
    return radio.P * np.asarray(gain(tx_antenna, theta, phi_hat)) * beta * fading_power


def link_gain(
    geom: LinkGeometry,
    tx_antenna: AntennaKind,
    radio: RadioConfig,
    seed,
    link: tuple[int, int] = (0, 0),
    alpha: complex | None = None,
) -> LinkGainSample:
    """
    One realization of |g|^2. Pass `alpha` to pin the fading amplitude instead of drawing it.
    """
    if alpha is None:
        alpha = sample_fading(radio.fading, radio.kappa, seed)

    value = link_gains(geom.theta, geom.phi_hat, geom.R, tx_antenna, radio, abs(alpha) ** 2)
    return LinkGainSample(
        gain=float(value), link=link, tx_antenna=AntennaKind(tx_antenna), fading=radio.fading
    )
