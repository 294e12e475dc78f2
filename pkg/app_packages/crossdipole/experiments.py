"""
One builder per preset. Each returns {panel name: list of row dicts}; `outputs` turns the rows
into tables.
"""

import math
from dataclasses import replace

import numpy as np

from . import analytic
from .analytic import Method, Scenario
from .antenna import AntennaKind
from .config import ExperimentSpec
from .geometry import (
    TWO_PI,
    as_generator,
    link_arrays,
    pdf_phi_hat,
    pdf_r_hat,
    pdf_theta_multipair,
    pdf_theta_standalone,
    sample_r_hat,
    sample_standalone_batch,
    theta_support_multipair,
    theta_support_standalone,
)
from .simulate import (
    Metric,
    Strategy,
    Sweep,
    run_measured_selection,
    run_multipair_sweep,
    run_rician_sweep,
    run_standalone_sweep,
)

HISTOGRAM_BINS = 100

Tables = dict[str, list[dict]]


def _seed(spec: ExperimentSpec, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(spec.seed, spawn_key=key)


def histogram_rows(samples, lo: float, hi: float, pdf, column: str) -> list[dict]:
    """Empirical density on HISTOGRAM_BINS bins next to the analytic PDF at the bin centers."""
    density, edges = np.histogram(samples, bins=HISTOGRAM_BINS, range=(lo, hi), density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    analytic_density = np.asarray(pdf(centers), dtype=float)
    return [
        {f"{column}_bin_center": c, "density": d, column: c, "analytic_density": a}
        for c, d, a in zip(centers.tolist(), density.tolist(), analytic_density.tolist())
    ]


def pdf_theta(spec: ExperimentSpec) -> Tables:
    rows = []
    for i, h in enumerate(spec.heights):
        config = replace(spec.topology, h=h)
        rng = as_generator(_seed(spec, i))
        r, phi = sample_standalone_batch(config, rng, spec.trials)
        _, _, theta, _ = link_arrays(r, phi, 0.0, 0.0, h)

        lo, hi = theta_support_standalone(config)
        for row in histogram_rows(theta, lo, hi, lambda t: pdf_theta_standalone(t, config), "theta"):
            rows.append({"h": h, **row})
    return {"theta": rows}


def pdfs(spec: ExperimentSpec) -> Tables:
    config = spec.topology
    rng = as_generator(_seed(spec, 0))

    _, phi_tx = sample_standalone_batch(config, rng, spec.trials)
    _, phi_rx = sample_standalone_batch(config, rng, spec.trials)
    phi_rows = histogram_rows(np.abs(phi_rx - phi_tx), 0.0, TWO_PI, pdf_phi_hat, "phi_hat")

    r_hat = sample_r_hat(config, rng, spec.trials)
    b = config.b
    r_rows = [
        {"b": b, **row}
        for row in histogram_rows(r_hat, 0.0, 2.0 * config.m_max, lambda r: pdf_r_hat(r, b), "r_hat")
    ]

    theta_rows = []
    for h in spec.heights:
        point = replace(config, h=h)
        lo, hi = theta_support_multipair(point)
        theta = np.arctan(r_hat / h)
        for row in histogram_rows(theta, lo, hi, lambda t: pdf_theta_multipair(t, point), "theta"):
            theta_rows.append({"h": h, **row})

    return {"phi_hat": phi_rows, "r_hat": r_rows, "theta": theta_rows}


def _gain_rows(spec: ExperimentSpec, scenario: Scenario) -> Tables:
    expected = (
        analytic.expected_gain_standalone
        if scenario is Scenario.STANDALONE
        else analytic.expected_gain_multipair
    )
    rows = []
    for i, h in enumerate(spec.heights):
        config = replace(spec.topology, h=h)
        for antenna in (AntennaKind.DIPOLE_Z, AntennaKind.DIPOLE_Y):
            exact = expected(antenna, config, spec.radio, Method.QUADRATURE_EXACT).value
            taylor = expected(antenna, config, spec.radio, Method.TAYLOR_CLOSED_FORM).value
            mc, mc_se = analytic.expected_gain_monte_carlo(
                antenna, scenario, config, spec.radio, max(spec.trials, 2), _seed(spec, i, int(antenna))
            )
            rows.append(
                {
                    "h": h,
                    "antenna": antenna.name.lower(),
                    "exact": exact,
                    "taylor": taylor,
                    "relative_gap": abs(taylor - exact) / exact,
                    "monte_carlo": mc,
                    "monte_carlo_se": mc_se,
                }
            )
    return {"gain": rows}


def gain_standalone(spec: ExperimentSpec) -> Tables:
    return _gain_rows(spec, Scenario.STANDALONE)


def gain_multipair(spec: ExperimentSpec) -> Tables:
    return _gain_rows(spec, Scenario.MULTIPAIR)


def rate_standalone(spec: ExperimentSpec) -> Tables:
    rows = []
    for antenna in (AntennaKind.DIPOLE_Z, AntennaKind.DIPOLE_Y):
        curve = run_standalone_sweep(
            spec.topology, spec.radio, antenna, spec.heights, spec.trials, spec.seed, spec.threads
        )
        rows.extend(curve.records())
    return {"rate": rows}


def _height_sweeps(spec: ExperimentSpec, strategies, metric: Metric) -> list[dict]:
    rows = []
    for count in spec.aerial_counts:
        config = replace(spec.topology, K_arl=count)
        for strategy in strategies:
            curve = run_multipair_sweep(
                config,
                spec.radio,
                strategy,
                Sweep.heights(spec.heights),
                spec.trials,
                spec.seed,
                spec.threads,
                metric,
                spec.independent_preamble,
            )
            rows.extend(curve.records())
    return rows


def rate_multipair(spec: ExperimentSpec) -> Tables:
    counts = tuple(n for n in spec.aerial_counts if n >= 1)
    if not counts:
        raise ValueError("the aerial-rate figure needs at least one aerial receiver count >= 1")
    return {"aerial_rate": _height_sweeps(replace(spec, aerial_counts=counts), (spec.strategy,), Metric.AERIAL_RATE)}


def sum_rate(spec: ExperimentSpec) -> Tables:
    strategies = (spec.strategy, Strategy.ALL_Z)
    if spec.strategy is Strategy.ALL_Z:
        strategies = (Strategy.ALL_Z,)
    return {"sum_rate": _height_sweeps(spec, strategies, Metric.SUM_RATE)}


def sum_rate_vs_percent(spec: ExperimentSpec) -> Tables:
    rows = []
    percents = spec.aerial_percents or tuple(float(p) for p in range(0, 101, 10))
    for h in spec.heights:
        curve = run_multipair_sweep(
            replace(spec.topology, h=h),
            spec.radio,
            spec.strategy,
            Sweep.aerial_percents(percents),
            spec.trials,
            spec.seed,
            spec.threads,
            Metric.SUM_RATE,
            spec.independent_preamble,
        )
        rows.extend({"h": h, **row} for row in curve.records())
    return {"sum_rate": rows, "peak": peak_rows(rows)}


def peak_rows(rows: list[dict]) -> list[dict]:
    """The aerial percentage with the largest sum rate at each height."""
    peaks = []
    for h in sorted({row["h"] for row in rows}):
        at_h = [row for row in rows if row["h"] == h]
        best = max(at_h, key=lambda row: row["sum_rate_mean"])
        peaks.append(
            {
                "h": h,
                "aerial_percent": best["aerial_percent"],
                "sum_rate_mean": best["sum_rate_mean"],
                "sum_rate_se": best["sum_rate_se"],
            }
        )
    return peaks


def antenna_selection(spec: ExperimentSpec) -> Tables:
    rows = []
    for count in spec.aerial_counts:
        perfect, measured = run_measured_selection(
            replace(spec.topology, K_arl=count),
            spec.radio,
            Sweep.heights(spec.heights),
            spec.trials,
            spec.seed,
            spec.threads,
            spec.independent_preamble,
        )
        for p, m in zip(perfect.records(), measured.records()):
            rows.append(p)
            gap = abs(m["sum_rate_mean"] - p["sum_rate_mean"])
            rows.append({**m, "relative_gap": gap / p["sum_rate_mean"] if p["sum_rate_mean"] else math.nan})
    return {"sum_rate": rows}


def rician(spec: ExperimentSpec) -> Tables:
    rows = []
    for count in spec.aerial_counts:
        curve = run_rician_sweep(
            replace(spec.topology, K_arl=count),
            spec.radio,
            spec.strategy,
            Sweep.heights(spec.heights),
            spec.trials,
            spec.seed,
            spec.threads,
        )
        rows.extend(curve.records())
    return {"sum_rate": rows}


def custom(spec: ExperimentSpec) -> Tables:
    if spec.strategy is Strategy.CROSS_DIPOLE_MEASURED:
        return antenna_selection(spec)
    if spec.aerial_percents:
        return sum_rate_vs_percent(spec)
    return {"sum_rate": _height_sweeps(spec, (spec.strategy,), Metric.SUM_RATE)}


BUILDERS = {
    "fig3-pdf-theta": pdf_theta,
    "fig5-pdfs": pdfs,
    "fig6-gain-standalone": gain_standalone,
    "fig7-gain-multipair": gain_multipair,
    "fig7-rate-standalone": rate_standalone,
    "fig8-rate-multipair": rate_multipair,
    "fig9-sumrate": sum_rate,
    "fig9b-sumrate-vs-percent": sum_rate_vs_percent,
    "fig10-antenna-selection": antenna_selection,
    "fig11-rician": rician,
    "custom": custom,
}


def build_tables(spec: ExperimentSpec) -> Tables:
    print(f"Running {spec.preset} with {spec.trials} trials (seed {spec.seed})")
    return BUILDERS[spec.preset](spec)
