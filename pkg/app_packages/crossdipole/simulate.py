"""
Monte Carlo engine behind every rate curve.

Each sweep point is split into fixed-size blocks of trials. Block (point p, block b) draws
from a Philox generator keyed by SeedSequence(seed, spawn_key=(p, b)), so a point's
numbers never depend on how many workers run the blocks, and curves computed with the
same seed (e.g. two strategies at one height) see the same deployments and fading.
"""

import math
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from multiprocessing import Pool

import numpy as np

from . import analytic
from .antenna import AntennaKind, select_antennas
from .channel import FadingModel, RadioConfig, link_gains, sample_fading
from .errors import ConfigError
from .geometry import (
    Deployment,
    TopologyConfig,
    as_generator,
    link_arrays,
    sample_multipair_batch,
    sample_standalone_batch,
)
from .utils import watts_to_dbm

BLOCK_TRIALS = 2000

# Preamble power of the antenna-selection measurement; cancels in the argmax
PREAMBLE_POWER = 1.0


class Strategy(Enum):
    ALL_Z = "all-z"
    CROSS_DIPOLE_PERFECT = "cross-dipole-perfect"
    CROSS_DIPOLE_MEASURED = "cross-dipole-measured"


class XAxis(Enum):
    HEIGHT = "h"
    AERIAL_PERCENT = "aerial_percent"


class Metric(Enum):
    RATE = "rate"  # the single aerial receiver of the stand-alone scenario
    AERIAL_RATE = "aerial_rate"  # mean over the aerial receivers of a deployment
    SUM_RATE = "sum_rate"


@dataclass(frozen=True)
class Sweep:
    x_axis: XAxis
    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ConfigError("sweep", "needs at least one point")
        if self.x_axis is XAxis.HEIGHT and any(not v > 0 for v in self.values):
            raise ConfigError("sweep.heights", f"heights must be > 0 (got {list(self.values)})")
        if self.x_axis is XAxis.AERIAL_PERCENT and any(not 0 <= v <= 100 for v in self.values):
            raise ConfigError(
                "sweep.aerial_percents", f"percentages must lie in [0, 100] (got {list(self.values)})"
            )

    @classmethod
    def heights(cls, values) -> "Sweep":
        return cls(XAxis.HEIGHT, tuple(float(v) for v in values))

    @classmethod
    def aerial_percents(cls, values) -> "Sweep":
        return cls(XAxis.AERIAL_PERCENT, tuple(float(v) for v in values))

    def configs(self, config: TopologyConfig) -> list[tuple[float, TopologyConfig]]:
        if self.x_axis is XAxis.HEIGHT:
            return [(x, replace(config, h=x)) for x in self.values]
        return [(x, replace(config, K_arl=round(x * config.K / 100.0))) for x in self.values]


@dataclass(frozen=True)
class RatePoint:
    x: float
    mean: float
    se: float
    extras: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class RateCurve:
    x_axis: XAxis
    metric: Metric
    points: tuple[RatePoint, ...]
    K: int
    K_arl: int | None  # None when the sweep varies it
    trials: int
    seed: int
    fading: FadingModel
    strategy: Strategy | None = None
    antenna: AntennaKind | None = None  # connected transmitter, stand-alone curves only

    def _series(self) -> dict[str, str]:
        if self.strategy is not None:
            return {"strategy": self.strategy.value}
        return {"antenna": self.antenna.name.lower() if self.antenna is not None else ""}

    def records(self) -> list[dict]:
        rows = []
        for point in self.points:
            rows.append(
                {
                    self.x_axis.value: point.x,
                    f"{self.metric.value}_mean": point.mean,
                    f"{self.metric.value}_se": point.se,
                    **point.extras,
                    **self._series(),
                    "K": self.K,
                    "K_arl": self.K_arl if self.K_arl is not None else _k_arl_at(point.x, self.K),
                    "fading": self.fading.value,
                    "trials": self.trials,
                }
            )
        return rows


def _k_arl_at(percent: float, K: int) -> int:
    return round(percent * K / 100.0)


def block_generators(seed: int, point: int, block: int, streams: int = 2) -> list[np.random.Generator]:
    sequence = np.random.SeedSequence(seed, spawn_key=(point, block))
    return [np.random.Generator(np.random.Philox(child)) for child in sequence.spawn(streams)]


def _blocks(trials: int) -> list[int]:
    if trials < 1:
        raise ConfigError("trials", f"must be >= 1 (got {trials})")
    sizes = [BLOCK_TRIALS] * (trials // BLOCK_TRIALS)
    if trials % BLOCK_TRIALS:
        sizes.append(trials % BLOCK_TRIALS)
    return sizes


def _map(func, tasks: list, threads: int | None):
    workers = min(threads or os.cpu_count() or 1, len(tasks))
    if workers <= 1:
        return [func(task) for task in tasks]
    with Pool(processes=workers) as pool:
        return pool.map(func, tasks)


def _summarize(values: np.ndarray) -> tuple[float, float]:
    """Mean and standard error; compensated summation keeps the mean order-insensitive."""
    values = np.asarray(values, dtype=float)
    n = values.size
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    variance = math.fsum((values - mean) ** 2) / (n - 1)
    return mean, math.sqrt(variance / n)


def _mean(values: np.ndarray) -> float:
    return math.fsum(np.asarray(values, dtype=float).ravel()) / max(np.size(values), 1)


def rates_from_gains(gains: np.ndarray, noise: float) -> np.ndarray:
    """
    Per-receiver rate log2(1 + S / (I + noise)) from a (..., K_rx, K_tx) gain array whose
    diagonal holds the serving links.
    """
    desired = np.diagonal(gains, axis1=-2, axis2=-1)
    interference = gains.sum(axis=-1) - desired
    with np.errstate(divide="ignore"):
        return np.log2(1.0 + desired / (interference + noise))


def trial_rates(
    deployment: Deployment,
    antenna_assignment,
    radio: RadioConfig,
    seed,
    noise: float | None = None,
) -> list[float]:
    """
    One realization of every receiver's rate, with fresh fading on every link and the
    noise power of `radio` unless `noise` overrides it.
    """
    kinds = np.asarray([int(kind) for kind in antenna_assignment])
    if kinds.size != deployment.K or len(deployment.rx_positions) != deployment.K:
        raise ValueError(
            f"antenna assignment has {kinds.size} entries for a deployment of {deployment.K} pairs"
        )

    tx = np.asarray(deployment.tx_positions, dtype=float)
    rx = np.asarray(deployment.rx_positions, dtype=float)
    _, phi_hat, theta, R = link_arrays(
        tx[None, :, 0], tx[None, :, 1], rx[:, 0, None], rx[:, 1, None], rx[:, 2, None]
    )

    rng = as_generator(seed)
    fading = np.abs(sample_fading(radio.fading, radio.kappa, rng, theta.shape)) ** 2
    gains = link_gains(theta, phi_hat, R, kinds[None, :], radio, fading)

    rates = rates_from_gains(gains, radio.noise_power if noise is None else noise)
    return [float(rate) for rate in rates]


# Stand-alone scenario


def _standalone_block(task) -> dict[str, np.ndarray]:
    config, radio, antenna, seed, point, block, trials = task
    rng, _ = block_generators(seed, point, block)
    K = config.K

    r, phi = sample_standalone_batch(config, rng, (trials, K))
    _, phi_hat, theta, R = link_arrays(r, phi, 0.0, 0.0, config.h)

    # transmitter 0 serves the receiver; every interferer uses its z-dipole
    kinds = np.full(K, int(AntennaKind.DIPOLE_Z))
    kinds[0] = int(antenna)

    fading = np.abs(sample_fading(radio.fading, radio.kappa, rng, (trials, K))) ** 2
    gains = link_gains(theta, phi_hat, R, kinds[None, :], radio, fading)

    desired = gains[:, 0]
    interference = gains[:, 1:].sum(axis=1)
    with np.errstate(divide="ignore"):
        noise_free = np.log2(1.0 + desired / interference) if K > 1 else np.full(trials, np.nan)

    return {
        "rate": np.log2(1.0 + desired / (interference + radio.noise_power)),
        "noise_free": noise_free,
        "desired": desired,
        "interference": interference,
    }


def run_standalone_sweep(
    config: TopologyConfig,
    radio: RadioConfig,
    antenna: AntennaKind,
    heights,
    trials: int,
    seed: int = 0,
    threads: int | None = None,
) -> RateCurve:
    """
    Ergodic rate of the aerial receiver at (0, 0, h) when its transmitter uses `antenna`
    and the other K - 1 transmitters use their z-dipoles.
    """
    if antenna not in (AntennaKind.DIPOLE_Z, AntennaKind.DIPOLE_Y):
        raise ValueError(f"the connected transmitter must use a dipole (got {antenna})")

    sweep = Sweep.heights(heights)
    sizes = _blocks(trials)
    points = sweep.configs(config)

    tasks = [
        (point_config, radio, antenna, seed, p, b, size)
        for p, (_, point_config) in enumerate(points)
        for b, size in enumerate(sizes)
    ]
    print(
        f"Simulating stand-alone {antenna.name} at {len(points)} heights, "
        f"{trials} trials each (K={config.K})"
    )
    results = _map(_standalone_block, tasks, threads)

    curve_points = []
    for p, (h, point_config) in enumerate(points):
        blocks = results[p * len(sizes) : (p + 1) * len(sizes)]
        stats = {key: np.concatenate([blk[key] for blk in blocks]) for key in blocks[0]}

        mean, se = _summarize(stats["rate"])
        desired = _mean(stats["desired"])
        interference = _mean(stats["interference"])
        extras = {
            "noise_free_rate": _mean(stats["noise_free"]),
            "desired_dbm": float(watts_to_dbm(desired)),
            "interference_dbm": float(watts_to_dbm(interference)),
        }
        if config.K >= 2:
            extras["jensen_rate"] = analytic.jensen_rate(desired, interference)
            if antenna is AntennaKind.DIPOLE_Z:
                extras["analytic_rate"] = analytic.rate_standalone_z(config.K)
            else:
                extras["analytic_rate"] = analytic.rate_standalone_y(config.K, point_config, radio)

        curve_points.append(RatePoint(h, mean, se, extras))

    return RateCurve(
        x_axis=XAxis.HEIGHT,
        metric=Metric.RATE,
        points=tuple(curve_points),
        K=config.K,
        K_arl=1,
        trials=trials,
        seed=seed,
        fading=radio.fading,
        antenna=antenna,
    )


# Multi-pair scenario


def _assignment(
    strategy: Strategy,
    perfect: np.ndarray,
    gain_z: np.ndarray,
    gain_y: np.ndarray,
    radio: RadioConfig,
    preamble_rng: np.random.Generator,
    independent_preamble: bool,
) -> np.ndarray:
    if strategy is Strategy.ALL_Z:
        return np.full_like(perfect, int(AntennaKind.DIPOLE_Z))
    if strategy is Strategy.CROSS_DIPOLE_PERFECT:
        return perfect

    # Measured: each transmitter compares the preamble power it would receive over its own
    # link through either dipole. The preamble fading is drawn apart from the data fading.
    shape = perfect.shape
    fading_z = np.abs(sample_fading(radio.fading, radio.kappa, preamble_rng, shape)) ** 2
    fading_y = (
        np.abs(sample_fading(radio.fading, radio.kappa, preamble_rng, shape)) ** 2
        if independent_preamble
        else fading_z
    )
    own_z = np.diagonal(gain_z, axis1=1, axis2=2)
    own_y = np.diagonal(gain_y, axis1=1, axis2=2)
    return select_antennas(
        own_z * fading_z * PREAMBLE_POWER, own_y * fading_y * PREAMBLE_POWER
    )


def _multipair_block(task) -> dict[Strategy, dict[str, np.ndarray]]:
    config, radio, strategies, independent_preamble, seed, point, block, trials = task
    rng, preamble_rng = block_generators(seed, point, block)

    batch = sample_multipair_batch(config, rng, trials)
    _, phi_hat, theta, R = batch.links()  # (T, K_rx, K_tx)
    fading = np.abs(sample_fading(radio.fading, radio.kappa, rng, theta.shape)) ** 2

    # deterministic part of every link for each dipole; fading applied after selection
    gain_z = link_gains(theta, phi_hat, R, AntennaKind.DIPOLE_Z, radio, 1.0)
    gain_y = link_gains(theta, phi_hat, R, AntennaKind.DIPOLE_Y, radio, 1.0)
    perfect = np.where(batch.aerial, int(AntennaKind.DIPOLE_Y), int(AntennaKind.DIPOLE_Z))

    aerial = batch.aerial
    ground = ~aerial
    n_aerial = int(aerial[0].sum())
    n_ground = config.K - n_aerial
    noise = radio.noise_power

    out = {}
    for strategy in strategies:
        kinds = _assignment(
            strategy, perfect, gain_z, gain_y, radio, preamble_rng, independent_preamble
        )
        gains = np.where(kinds[:, None, :] == int(AntennaKind.DIPOLE_Y), gain_y, gain_z) * fading

        desired = np.diagonal(gains, axis1=1, axis2=2)
        interference = gains.sum(axis=2) - desired
        rates = rates_from_gains(gains, noise)
        noise_free = rates_from_gains(gains, 0.0)

        stats = {
            "sum_rate": rates.sum(axis=1),
            "noise_free_sum_rate": noise_free.sum(axis=1),
            "agreement": (kinds == perfect).mean(axis=1),
            "resamples": np.array([batch.resamples], dtype=float),
        }
        if n_aerial:
            stats["aerial_rate"] = (rates * aerial).sum(axis=1) / n_aerial
            stats["aerial_desired"] = (desired * aerial).sum(axis=1) / n_aerial
            stats["aerial_interference"] = (interference * aerial).sum(axis=1) / n_aerial
        if n_ground:
            stats["ground_rate"] = (rates * ground).sum(axis=1) / n_ground
        out[strategy] = stats

    return out


def _run_multipair(
    config: TopologyConfig,
    radio: RadioConfig,
    strategies: tuple[Strategy, ...],
    sweep: Sweep,
    trials: int,
    seed: int,
    threads: int | None,
    independent_preamble: bool,
) -> dict[Strategy, list[tuple[float, TopologyConfig, dict[str, np.ndarray]]]]:
    sizes = _blocks(trials)
    points = sweep.configs(config)

    tasks = [
        (point_config, radio, strategies, independent_preamble, seed, p, b, size)
        for p, (_, point_config) in enumerate(points)
        for b, size in enumerate(sizes)
    ]
    names = ", ".join(s.value for s in strategies)
    print(
        f"Simulating multi-pair {names} ({radio.fading.value}) at {len(points)} "
        f"{sweep.x_axis.value} points, {trials} trials each (K={config.K})"
    )
    results = _map(_multipair_block, tasks, threads)

    per_strategy = {strategy: [] for strategy in strategies}
    for p, (x, point_config) in enumerate(points):
        blocks = results[p * len(sizes) : (p + 1) * len(sizes)]
        for strategy in strategies:
            keys = blocks[0][strategy].keys()
            stats = {key: np.concatenate([blk[strategy][key] for blk in blocks]) for key in keys}
            per_strategy[strategy].append((x, point_config, stats))
    return per_strategy


def _multipair_point(x, point_config, radio, stats, metric: Metric) -> RatePoint:
    if metric is Metric.AERIAL_RATE:
        if "aerial_rate" not in stats:
            raise ValueError(f"no aerial receivers at {x}; the aerial-rate curve is undefined")
        mean, se = _summarize(stats["aerial_rate"])
    else:
        mean, se = _summarize(stats["sum_rate"])

    extras = {
        "noise_free_sum_rate": _mean(stats["noise_free_sum_rate"]),
        "agreement": _mean(stats["agreement"]),
        "resamples": float(np.sum(stats["resamples"])),
    }
    if metric is Metric.SUM_RATE and "aerial_rate" in stats:
        extras["aerial_rate_mean"], extras["aerial_rate_se"] = _summarize(stats["aerial_rate"])
    if "ground_rate" in stats:
        extras["ground_rate_mean"], extras["ground_rate_se"] = _summarize(stats["ground_rate"])
    if "aerial_desired" in stats:
        desired = _mean(stats["aerial_desired"])
        interference = _mean(stats["aerial_interference"])
        extras["aerial_desired_dbm"] = float(watts_to_dbm(desired))
        extras["aerial_interference_dbm"] = float(watts_to_dbm(interference))
        if interference > 0:
            extras["jensen_aerial_rate"] = analytic.jensen_rate(desired, interference)
        if point_config.K >= 2:
            extras["analytic_aerial_rate"] = analytic.rate_multipair_aerial(
                point_config.K_grd, point_config.K_arl, point_config, radio
            )

    return RatePoint(x, mean, se, extras)


def _curve(config, radio, strategy, sweep, trials, seed, metric, per_point) -> RateCurve:
    return RateCurve(
        x_axis=sweep.x_axis,
        metric=metric,
        points=tuple(
            _multipair_point(x, point_config, radio, stats, metric)
            for x, point_config, stats in per_point
        ),
        K=config.K,
        K_arl=config.K_arl if sweep.x_axis is XAxis.HEIGHT else None,
        trials=trials,
        seed=seed,
        fading=radio.fading,
        strategy=strategy,
    )


def run_multipair_sweep(
    config: TopologyConfig,
    radio: RadioConfig,
    strategy: Strategy,
    sweep: Sweep,
    trials: int,
    seed: int = 0,
    threads: int | None = None,
    metric: Metric = Metric.SUM_RATE,
    independent_preamble: bool = False,
) -> RateCurve:
    """Sum-rate (or aerial-rate) curve with fresh deployments and fading in every trial."""
    per_strategy = _run_multipair(
        config, radio, (strategy,), sweep, trials, seed, threads, independent_preamble
    )
    return _curve(config, radio, strategy, sweep, trials, seed, metric, per_strategy[strategy])


def run_rician_sweep(
    config: TopologyConfig,
    radio: RadioConfig,
    strategy: Strategy,
    sweep: Sweep,
    trials: int,
    seed: int = 0,
    threads: int | None = None,
    metric: Metric = Metric.SUM_RATE,
) -> RateCurve:
    """The multi-pair pipeline with Rician fading on every link; the K-factor is `radio.kappa`."""
    if radio.fading is not FadingModel.RICIAN:
        radio = replace(radio, fading=FadingModel.RICIAN)
    return run_multipair_sweep(config, radio, strategy, sweep, trials, seed, threads, metric)


def run_measured_selection(
    config: TopologyConfig,
    radio: RadioConfig,
    sweep: Sweep,
    trials: int,
    seed: int = 0,
    threads: int | None = None,
    independent_preamble: bool = False,
) -> tuple[RateCurve, RateCurve]:
    """
    Sum-rate curves for perfect receiver-type knowledge and for preamble-power selection,
    computed on shared deployments and data fading.
    """
    strategies = (Strategy.CROSS_DIPOLE_PERFECT, Strategy.CROSS_DIPOLE_MEASURED)
    per_strategy = _run_multipair(
        config, radio, strategies, sweep, trials, seed, threads, independent_preamble
    )
    perfect, measured = (
        _curve(config, radio, s, sweep, trials, seed, Metric.SUM_RATE, per_strategy[s])
        for s in strategies
    )
    return perfect, measured
