import math
import pickle

import numpy as np
import pytest
from scipy import integrate, stats

from crossdipole.errors import ConfigError, InsufficientDataError
from crossdipole.geometry import (
    MIN_SEPARATION,
    ReceiverKind,
    TopologyConfig,
    cdf_phi_hat,
    cdf_r_hat,
    cdf_theta_standalone,
    fit_rayleigh_b,
    link_arrays,
    link_geometry,
    pdf_phi_hat,
    pdf_r_hat,
    pdf_theta_multipair,
    pdf_theta_standalone,
    sample_multipair,
    sample_multipair_batch,
    sample_r_hat,
    sample_standalone,
    sample_standalone_batch,
    theta_support_multipair,
    theta_support_standalone,
)


def test_config_rejects_inverted_annulus():
    with pytest.raises(ConfigError, match="m0 < m_max"):
        TopologyConfig(m0=200.0, m_max=100.0)


@pytest.mark.parametrize(
    "kwargs, key",
    [
        ({"h": 0.0}, "h"),
        ({"K": 0}, "K"),
        ({"K": 4, "K_arl": 5}, "K_arl"),
        ({"rayleigh_b": -1.0}, "rayleigh_b"),
    ],
)
def test_config_names_the_bad_key(kwargs, key):
    with pytest.raises(ConfigError) as info:
        TopologyConfig(**kwargs)
    assert info.value.key == key


def test_k_grd():
    assert TopologyConfig(K=10, K_arl=3).K_grd == 7


def test_link_geometry_aerial_and_ground():
    aerial = link_geometry((30.0, 0.0), (0.0, 0.0, 40.0))
    assert aerial.r_hat == pytest.approx(30.0)
    assert aerial.theta == pytest.approx(math.atan(30.0 / 40.0))
    assert aerial.R == pytest.approx(50.0)

    ground = link_geometry((30.0, 0.5), (40.0, 2.0, 0.0))
    assert ground.theta == math.pi / 2
    assert ground.phi_hat == pytest.approx(1.5)
    assert ground.R == pytest.approx(ground.r_hat)


def test_standalone_sample_is_reproducible(topology):
    assert sample_standalone(topology, 7) == sample_standalone(topology, 7)

    geom = sample_standalone(topology, 7)
    lo, hi = theta_support_standalone(topology)
    assert lo <= geom.theta <= hi
    assert geom.R >= topology.h


def test_standalone_support():
    lo, hi = theta_support_standalone(TopologyConfig(h=100.0))
    assert lo == pytest.approx(math.atan(0.1))
    assert hi == pytest.approx(math.pi / 4)


@pytest.mark.parametrize("h", [50.0, 100.0, 400.0])
def test_pdf_theta_standalone_normalized(h):
    config = TopologyConfig(h=h)
    total, _ = integrate.quad(lambda t: pdf_theta_standalone(t, config), *theta_support_standalone(config))
    assert total == pytest.approx(1.0, abs=1e-9)
    assert pdf_theta_standalone(0.0, config) == 0.0


def test_theta_standalone_matches_its_cdf(rng):
    config = TopologyConfig(h=100.0)
    r, phi = sample_standalone_batch(config, rng, 20_000)
    _, _, theta, _ = link_arrays(r, phi, 0.0, 0.0, config.h)
    result = stats.kstest(theta, lambda t: cdf_theta_standalone(t, config))
    assert result.pvalue > 1e-3


def test_phi_hat_law(rng):
    total, _ = integrate.quad(pdf_phi_hat, 0.0, 2.0 * math.pi)
    assert total == pytest.approx(1.0, abs=1e-12)
    assert pdf_phi_hat(0.0) == pytest.approx(1.0 / math.pi)
    assert pdf_phi_hat(2.0 * math.pi) == 0.0
    assert cdf_phi_hat(2.0 * math.pi) == pytest.approx(1.0)

    phi_hat = np.abs(rng.uniform(0.0, 2.0 * math.pi, 20_000) - rng.uniform(0.0, 2.0 * math.pi, 20_000))
    assert stats.kstest(phi_hat, cdf_phi_hat).pvalue > 1e-3


def test_fit_rayleigh_b_default_annulus():
    # E[r_hat^2] = 2 (m_max^3 - m0^3) / (3 (m_max - m0)) = 7400, so b = sqrt(3700)
    b = TopologyConfig().b
    assert b == pytest.approx(60.8, abs=0.5)


def test_fit_rayleigh_b_recovers_a_known_scale(rng):
    samples = stats.rayleigh.rvs(scale=3.0, size=200_000, random_state=rng)
    assert fit_rayleigh_b(samples) == pytest.approx(3.0, rel=0.01)


def test_fit_rayleigh_b_errors():
    with pytest.raises(InsufficientDataError):
        fit_rayleigh_b([])
    with pytest.raises(ValueError):
        fit_rayleigh_b([1.0, -2.0])
    with pytest.raises(ValueError):
        fit_rayleigh_b([1.0, math.nan])


def test_configured_rayleigh_b_is_used():
    assert TopologyConfig(rayleigh_b=12.5).b == 12.5


def test_pdf_r_hat(topology):
    total, _ = integrate.quad(lambda r: pdf_r_hat(r, topology.b), 0.0, math.inf)
    assert total == pytest.approx(1.0, abs=1e-9)
    assert cdf_r_hat(0.0, topology.b) == 0.0
    with pytest.raises(ValueError):
        pdf_r_hat(1.0, 0.0)


def test_sample_r_hat_range(topology, rng):
    r_hat = sample_r_hat(topology, rng, 10_000)
    assert r_hat.min() >= 0.0
    assert r_hat.max() <= 2.0 * topology.m_max


def test_pdf_theta_multipair_is_not_renormalized(topology):
    lo, hi = theta_support_multipair(topology)
    assert lo == 0.0
    assert hi == pytest.approx(math.atan(2.0))

    total, _ = integrate.quad(lambda t: pdf_theta_multipair(t, topology), lo, hi)
    # mass of the Rayleigh fit below r_hat = 2 m_max
    expected = 1.0 - math.exp(-((2.0 * topology.m_max) ** 2) / (2.0 * topology.b**2))
    assert total == pytest.approx(expected, rel=1e-6)
    assert total < 1.0


def test_multipair_deployment_layout(topology):
    config = TopologyConfig(K=6, K_arl=2, rayleigh_b=topology.rayleigh_b)
    deployment = sample_multipair(config, 3)

    assert deployment.K == 6
    assert deployment.pairing == tuple(range(6))
    assert deployment.rx_kind[:2] == (ReceiverKind.AERIAL,) * 2
    assert deployment.rx_kind[2:] == (ReceiverKind.GROUND,) * 4
    assert [rx[2] for rx in deployment.rx_positions] == [config.h] * 2 + [0.0] * 4
    assert deployment == sample_multipair(config, 3)


def test_short_links_are_redrawn(rng):
    # a thin annulus puts many ground pairs within a meter of each other
    config = TopologyConfig(m0=10.0, m_max=10.5, h=50.0, K=2, K_arl=0)
    batch = sample_multipair_batch(config, rng, 200)

    _, _, _, R = batch.links()
    assert batch.resamples > 0
    assert R.min() >= MIN_SEPARATION
    assert batch.deployment(0).resamples == batch.resamples


def test_link_geometry_right_triangle():
    geom = link_geometry((30.0, 0.0), (40.0, math.pi / 2, 100.0))
    assert geom.r_hat == pytest.approx(50.0)
    assert geom.R == pytest.approx(math.sqrt(12500.0))

    swapped = link_geometry((40.0, math.pi / 2), (30.0, 0.0, 100.0))
    assert swapped.r_hat == pytest.approx(geom.r_hat)
    assert swapped.R == pytest.approx(geom.R)


def test_fit_rayleigh_b_constant_samples():
    assert fit_rayleigh_b([4.0] * 10) == pytest.approx(4.0 / math.sqrt(2.0))


def test_annulus_too_thin_for_the_pair_count(rng):
    # fifty ground pairs on a 1 mm wide ring cannot all sit a meter apart
    config = TopologyConfig(m0=10.0, m_max=10.001, h=50.0, K=50, K_arl=0)
    with pytest.raises(ConfigError) as info:
        sample_multipair_batch(config, rng, 4)
    assert info.value.key == "m_max"
    assert "[10.0, 10.001]" in str(info.value)

    # worker processes hand the error back to the parent through pickle
    assert pickle.loads(pickle.dumps(info.value)).key == "m_max"
