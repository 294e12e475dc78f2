"""
Command-line front end.

    crossdipole run --preset NAME [--config FILE] [--seed N] [--trials N] [--threads N]
                    [--out DIR] [--format csv|json]
    crossdipole pattern --antenna z|y|omni [--grid N] [--out DIR] [--format csv|json]
    crossdipole fit-b [--m0 M] [--mmax M] [--samples N] [--seed N]

Exit codes: 0 when every requested output was written, 1 on I/O or run failures,
2 on configuration errors.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import version
from .antenna import AntennaKind, pattern_grid
from .capture_logs import capture_logs
from .config import DEFAULT_OUT_DIR, OUT_DIR_ENV, PRESET_HELP, PRESETS, OutputFormat, parse_config
from .errors import ConfigError
from .experiments import build_tables
from .geometry import RAYLEIGH_FIT_SAMPLES, TopologyConfig, fit_rayleigh_b, sample_r_hat
from .outputs import table_path, write_outputs, write_table
from .versions import describe_version, get_dependency_versions

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

_ANTENNAS = {"z": AntennaKind.DIPOLE_Z, "y": AntennaKind.DIPOLE_Y, "omni": AntennaKind.OMNI}


def _presets_epilog() -> str:
    lines = ["presets:"]
    lines += [f"  {name:<26} {PRESET_HELP[name]}" for name in PRESETS]
    lines.append(
        "fig6-gain-standalone and fig7-gain-multipair share one layout (expected gain vs h)."
    )
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crossdipole",
        description="Interference model of cross-dipole ground transmitters and aerial receivers.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {version}")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser(
        "run",
        help="run a figure preset",
        epilog=_presets_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    run.add_argument("--preset", required=True, choices=sorted(PRESETS), metavar="NAME")
    run.add_argument("--config", type=Path, help="JSON config file")
    run.add_argument("--seed", type=int, help="seed of the random streams")
    run.add_argument("--trials", type=int, help="Monte Carlo trials (samples for histograms)")
    run.add_argument("--threads", type=int, help="worker processes (default: all cores)")
    run.add_argument("--out", type=Path, help=f"output directory (default: ${OUT_DIR_ENV} or ./{DEFAULT_OUT_DIR})")
    run.add_argument("--format", choices=[f.value for f in OutputFormat])

    pattern = commands.add_parser("pattern", help="sample a field pattern over the sphere")
    pattern.add_argument("--antenna", required=True, choices=sorted(_ANTENNAS))
    pattern.add_argument("--grid", type=int, default=64, help="points per angle (default: 64)")
    pattern.add_argument("--out", type=Path)
    pattern.add_argument("--format", choices=[f.value for f in OutputFormat], default="csv")

    fit = commands.add_parser("fit-b", help="fit the Rayleigh scale of the Tx-Rx ground distance")
    fit.add_argument("--m0", type=float, default=TopologyConfig.m0)
    fit.add_argument("--mmax", type=float, default=TopologyConfig.m_max)
    fit.add_argument("--samples", type=int, default=RAYLEIGH_FIT_SAMPLES)
    fit.add_argument("--seed", type=int, default=0)

    return parser


def _output_dir(out: Path | None) -> Path:
    return out if out is not None else Path(os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR)


def run_experiment(spec) -> int:
    """Runs one preset and writes its tables plus the metadata sidecar. Returns the exit code."""
    captured = capture_logs(build_tables, spec)
    sys.stderr.write(captured.log)

    if not captured.ok:
        print(f"error: {spec.preset} failed: {captured.error}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(captured.error, ConfigError) else EXIT_FAILURE

    metadata = {
        "preset": spec.preset,
        "config": spec.to_record(),
        "seed": spec.seed,
        "version": describe_version(version),
        "wall_time_s": captured.wall_time,
        "dependencies": get_dependency_versions(),
        "log": captured.log,
    }
    try:
        paths = write_outputs(spec, captured.result, metadata)
    except OSError as e:
        print(f"error: could not write {e.filename or spec.output_dir}: {e.strerror or e}", file=sys.stderr)
        return EXIT_FAILURE

    for path in paths:
        print(path)
    return EXIT_OK


def _run(args) -> int:
    config_bytes = None
    if args.config is not None:
        try:
            config_bytes = args.config.read_bytes()
        except OSError as e:
            print(f"error: could not read {args.config}: {e.strerror or e}", file=sys.stderr)
            return EXIT_FAILURE

    try:
        spec = parse_config(
            args.preset,
            config_bytes,
            {
                "trials": args.trials,
                "seed": args.seed,
                "threads": args.threads,
                "output_dir": args.out,
                "format": args.format,
            },
        )
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    return run_experiment(spec)


def _pattern(args) -> int:
    if args.grid < 2:
        print(f"error: grid: must be >= 2 (got {args.grid})", file=sys.stderr)
        return EXIT_CONFIG

    kind = _ANTENNAS[args.antenna]
    samples = pattern_grid(kind, args.grid)
    rows = [dict(zip(samples, values)) for values in zip(*(v.tolist() for v in samples.values()))]

    fmt = OutputFormat(args.format)
    path = table_path(_output_dir(args.out), "pattern", args.antenna, fmt)
    try:
        write_table(rows, path, fmt)
    except OSError as e:
        print(f"error: could not write {path}: {e.strerror or e}", file=sys.stderr)
        return EXIT_FAILURE

    print(path)
    return EXIT_OK


def _fit_b(args) -> int:
    try:
        config = TopologyConfig(m0=args.m0, m_max=args.mmax, rayleigh_b=1.0)
        if args.samples < 1:
            raise ConfigError("samples", f"must be >= 1 (got {args.samples})")
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    rng = np.random.default_rng(args.seed)
    b = fit_rayleigh_b(sample_r_hat(config, rng, args.samples))
    print(json.dumps({"m0": args.m0, "m_max": args.mmax, "samples": args.samples, "b": b}))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _run(args)
    if args.command == "pattern":
        return _pattern(args)
    return _fit_b(args)
