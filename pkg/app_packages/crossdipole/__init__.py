from .analytic import (
    GainExpectation,
    Method,
    Scenario,
    erfi,
    expected_gain_monte_carlo,
    expected_gain_multipair,
    expected_gain_standalone,
    jensen_rate,
    rate_multipair_aerial,
    rate_standalone_y,
    rate_standalone_z,
    taylor_moments,
)
from .antenna import (
    AntennaKind,
    field_pattern_general,
    field_pattern_y,
    field_pattern_z,
    gain,
    pattern_grid,
    select_antenna,
    select_antennas,
)
from .capture_logs import capture_logs
from .channel import FadingModel, LinkGainSample, RadioConfig, free_space_pathloss, link_gain, link_gains, sample_fading
from .config import ExperimentSpec, OutputFormat, parse_config
from .errors import ConfigError, ErfiOverflowError, InsufficientDataError, ResidueError
from .geometry import (
    Deployment,
    LinkGeometry,
    ReceiverKind,
    TopologyConfig,
    cdf_phi_hat,
    cdf_r_hat,
    cdf_theta_standalone,
    fit_rayleigh_b,
    link_geometry,
    pdf_phi_hat,
    pdf_r_hat,
    pdf_theta_multipair,
    pdf_theta_standalone,
    sample_multipair,
    sample_r_hat,
    sample_standalone,
)
from .simulate import (
    Metric,
    RateCurve,
    RatePoint,
    Strategy,
    Sweep,
    XAxis,
    run_measured_selection,
    run_multipair_sweep,
    run_rician_sweep,
    run_standalone_sweep,
    trial_rates,
)
from .versions import get_dependency_versions

version = "1.0.0"
