import math
from dataclasses import replace

import numpy as np
import pytest

from crossdipole.analytic import rate_standalone_z
from crossdipole.antenna import AntennaKind
from crossdipole.channel import FadingModel
from crossdipole.errors import ConfigError
from crossdipole.geometry import sample_multipair
from crossdipole.simulate import (
    BLOCK_TRIALS,
    Metric,
    Strategy,
    Sweep,
    XAxis,
    block_generators,
    rates_from_gains,
    run_measured_selection,
    run_multipair_sweep,
    run_rician_sweep,
    run_standalone_sweep,
    trial_rates,
)


def test_equal_gains_without_noise():
    gains = np.ones((3, 5, 5))
    np.testing.assert_allclose(rates_from_gains(gains, 0.0), np.full((3, 5), math.log2(1.25)))


def test_sum_rate_is_permutation_invariant(rng):
    gains = rng.exponential(size=(6, 6))
    perm = rng.permutation(6)
    permuted = gains[perm][:, perm]
    assert rates_from_gains(permuted, 1e-3).sum() == pytest.approx(rates_from_gains(gains, 1e-3).sum(), rel=1e-12)


def test_trial_rates(topology, radio):
    config = replace(topology, K=4, K_arl=2)
    deployment = sample_multipair(config, 1)
    assignment = [AntennaKind.DIPOLE_Y] * 2 + [AntennaKind.DIPOLE_Z] * 2

    rates = trial_rates(deployment, assignment, radio, seed=9)
    assert len(rates) == 4
    assert all(r >= 0 and math.isfinite(r) for r in rates)
    assert rates == trial_rates(deployment, assignment, radio, seed=9)

    with pytest.raises(ValueError):
        trial_rates(deployment, assignment[:3], radio, seed=9)


def test_sweep_validation_and_points(topology):
    with pytest.raises(ConfigError):
        Sweep.heights([])
    with pytest.raises(ConfigError):
        Sweep.heights([100.0, -5.0])
    with pytest.raises(ConfigError):
        Sweep.aerial_percents([120.0])

    points = Sweep.aerial_percents([0, 30, 100]).configs(topology)
    assert [config.K_arl for _, config in points] == [0, 3, 10]
    assert [config.h for _, config in Sweep.heights([50, 80]).configs(topology)] == [50.0, 80.0]


def test_block_generators_are_keyed_by_point_and_block():
    a, _ = block_generators(3, 0, 1)
    b, _ = block_generators(3, 0, 1)
    c, _ = block_generators(3, 1, 1)
    first = a.random(4)
    np.testing.assert_array_equal(first, b.random(4))
    assert not np.array_equal(first, c.random(4))


# Stand-alone scenario


def test_standalone_z_rate_follows_the_interferer_count(topology, radio):
    config = replace(topology, K=5)
    curve = run_standalone_sweep(config, radio, AntennaKind.DIPOLE_Z, [100.0, 400.0], 4000, seed=1, threads=1)

    assert curve.metric is Metric.RATE
    assert curve.x_axis is XAxis.HEIGHT
    for point in curve.points:
        # E{S} / E{I} = 1 / (K - 1) for identically placed transmitters
        assert point.extras["jensen_rate"] == pytest.approx(rate_standalone_z(5), abs=0.05)
        assert point.extras["analytic_rate"] == pytest.approx(rate_standalone_z(5))
        assert point.extras["noise_free_rate"] >= point.mean
        assert 0.2 < point.mean < 0.7


def test_standalone_y_rate_rises_with_height(topology, radio):
    config = replace(topology, K=5)
    curve = run_standalone_sweep(config, radio, AntennaKind.DIPOLE_Y, [50.0, 400.0], 2000, seed=1, threads=1)
    low, high = curve.points
    assert high.mean - low.mean > 2.0 * (high.se + low.se)
    assert high.extras["desired_dbm"] < low.extras["desired_dbm"]


def test_standalone_single_trial_has_zero_se(topology, radio):
    curve = run_standalone_sweep(topology, radio, AntennaKind.DIPOLE_Z, [100.0], 1, seed=0, threads=1)
    assert curve.points[0].se == 0.0


def test_standalone_rejects_omni(topology, radio):
    with pytest.raises(ValueError):
        run_standalone_sweep(topology, radio, AntennaKind.OMNI, [100.0], 10)


def test_standard_error_shrinks_with_trials(topology, radio):
    config = replace(topology, K=5)
    small = run_standalone_sweep(config, radio, AntennaKind.DIPOLE_Y, [200.0], 1000, seed=4, threads=1)
    large = run_standalone_sweep(config, radio, AntennaKind.DIPOLE_Y, [200.0], 8000, seed=4, threads=1)
    assert large.points[0].se < small.points[0].se


# Multi-pair scenario


def test_results_do_not_depend_on_worker_count(topology, radio):
    config = replace(topology, K_arl=3)
    sweep = Sweep.heights([100.0, 300.0])
    trials = BLOCK_TRIALS + 500

    serial = run_multipair_sweep(config, radio, Strategy.CROSS_DIPOLE_PERFECT, sweep, trials, seed=8, threads=1)
    parallel = run_multipair_sweep(config, radio, Strategy.CROSS_DIPOLE_PERFECT, sweep, trials, seed=8, threads=3)
    assert serial.points == parallel.points


def test_cross_dipole_beats_all_z_at_height(topology, radio):
    config = replace(topology, K_arl=3)
    sweep = Sweep.heights([400.0])
    perfect = run_multipair_sweep(config, radio, Strategy.CROSS_DIPOLE_PERFECT, sweep, 2000, seed=2, threads=1)
    all_z = run_multipair_sweep(config, radio, Strategy.ALL_Z, sweep, 2000, seed=2, threads=1)

    p, z = perfect.points[0], all_z.points[0]
    assert p.mean - z.mean > 2.0 * (p.se + z.se)
    assert z.extras["agreement"] == pytest.approx(0.7)
    assert p.extras["agreement"] == 1.0


def test_multipair_records(topology, radio):
    config = replace(topology, K_arl=2)
    curve = run_multipair_sweep(
        config, radio, Strategy.ALL_Z, Sweep.heights([200.0]), 300, seed=0, threads=1
    )
    (row,) = curve.records()
    assert row["h"] == 200.0
    assert row["strategy"] == "all-z"
    assert row["K"] == 10 and row["K_arl"] == 2
    assert {"sum_rate_mean", "sum_rate_se", "aerial_rate_mean", "ground_rate_mean", "jensen_aerial_rate"} <= set(row)
    assert row["fading"] == "rayleigh"


def test_aerial_rate_needs_aerial_receivers(topology, radio):
    with pytest.raises(ValueError):
        run_multipair_sweep(
            topology, radio, Strategy.ALL_Z, Sweep.heights([100.0]), 50, threads=1, metric=Metric.AERIAL_RATE
        )


def test_percent_sweep_records_k_arl(topology, radio):
    curve = run_multipair_sweep(
        topology, radio, Strategy.CROSS_DIPOLE_PERFECT, Sweep.aerial_percents([0, 50]), 200, seed=0, threads=1
    )
    assert curve.K_arl is None
    assert [row["K_arl"] for row in curve.records()] == [0, 5]
    assert [row["aerial_percent"] for row in curve.records()] == [0.0, 50.0]


def test_measured_selection_with_shared_preamble_fading(topology, radio):
    # high up, the y-dipole always wins for aerial receivers and the z-dipole for ground ones
    config = replace(topology, K_arl=3)
    perfect, measured = run_measured_selection(config, radio, Sweep.heights([400.0]), 1000, seed=5, threads=1)

    assert measured.strategy is Strategy.CROSS_DIPOLE_MEASURED
    assert measured.points[0].extras["agreement"] == 1.0
    assert measured.points[0].mean == perfect.points[0].mean


def test_measured_selection_with_independent_preamble_fading(topology, radio):
    config = replace(topology, K_arl=3)
    perfect, measured = run_measured_selection(
        config, radio, Sweep.heights([400.0]), 1000, seed=5, threads=1, independent_preamble=True
    )
    assert measured.points[0].extras["agreement"] < 1.0
    assert perfect.points[0].extras["agreement"] == 1.0


def test_rician_sweep_forces_rician_fading(topology, radio):
    curve = run_rician_sweep(
        replace(topology, K_arl=3), radio, Strategy.CROSS_DIPOLE_PERFECT, Sweep.heights([200.0]), 300, threads=1
    )
    assert curve.fading is FadingModel.RICIAN
    assert curve.records()[0]["fading"] == "rician"


def test_rician_sweep_keeps_a_zero_k_factor(topology, radio):
    # kappa = 0 leaves only the scattered term, which draws the same amplitudes as Rayleigh
    config = replace(topology, K_arl=3)
    sweep = Sweep.heights([200.0])
    rician = run_rician_sweep(
        config, replace(radio, fading=FadingModel.RICIAN, kappa=0.0), Strategy.ALL_Z, sweep, 300, seed=6, threads=1
    )
    rayleigh = run_multipair_sweep(config, radio, Strategy.ALL_Z, sweep, 300, seed=6, threads=1)
    assert rician.points[0].mean == rayleigh.points[0].mean
