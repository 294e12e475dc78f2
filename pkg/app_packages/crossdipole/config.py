"""
Experiment presets and the JSON config schema.

Values are layered preset < config file < command-line flags. Every dBm / dB entry of the
file is converted to linear units here, once.
"""

import json
import math
import os
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path

from .channel import FadingModel, RadioConfig
from .errors import ConfigError
from .geometry import TopologyConfig
from .simulate import Strategy
from .utils import db_to_linear, dbm_to_watts, watts_to_dbm

OUT_DIR_ENV = "CROSSDIPOLE_OUT_DIR"
DEFAULT_OUT_DIR = "results"

DEFAULT_TRIALS = 10_000
DEFAULT_SAMPLES = 1_000_000  # draws behind every histogram
DEFAULT_HEIGHTS = (50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0)
DEFAULT_AERIAL_COUNTS = (1, 3, 5, 7)
DEFAULT_AERIAL_PERCENTS = tuple(float(p) for p in range(0, 101, 10))


class OutputFormat(Enum):
    CSV = "csv"
    JSON = "json"


# Only what differs from the dataclass defaults. Topology defaults: m0=10, m_max=100, K=10.
PRESETS: dict[str, dict] = {
    "fig3-pdf-theta": {"trials": DEFAULT_SAMPLES, "heights": (50.0, 100.0, 200.0, 400.0)},
    "fig5-pdfs": {"trials": DEFAULT_SAMPLES, "heights": (50.0, 100.0, 200.0, 400.0)},
    "fig6-gain-standalone": {},
    "fig7-gain-multipair": {},
    "fig7-rate-standalone": {"topology": {"K": 5}},
    "fig8-rate-multipair": {},
    "fig9-sumrate": {},
    "fig9b-sumrate-vs-percent": {
        "heights": (50.0, 150.0, 400.0),
        "aerial_percents": DEFAULT_AERIAL_PERCENTS,
    },
    "fig10-antenna-selection": {"strategy": Strategy.CROSS_DIPOLE_MEASURED},
    "fig11-rician": {"radio": {"fading": FadingModel.RICIAN}},
    "custom": {},
}

PRESET_HELP = {
    "fig3-pdf-theta": "elevation-angle histogram vs analytic PDF, stand-alone receiver",
    "fig5-pdfs": "phi_hat, r_hat (Rayleigh fit) and multi-pair elevation PDFs",
    "fig6-gain-standalone": "expected gain vs height, stand-alone: exact, closed form, Monte Carlo",
    "fig7-gain-multipair": "expected gain vs height, multi-pair (same layout as fig6)",
    "fig7-rate-standalone": "ergodic rate vs height of the stand-alone receiver, K=5",
    "fig8-rate-multipair": "aerial-receiver rate vs height, multi-pair",
    "fig9-sumrate": "sum rate vs height, cross-dipole vs all z-dipoles",
    "fig9b-sumrate-vs-percent": "sum rate vs share of aerial receivers",
    "fig10-antenna-selection": "perfect vs preamble-measured antenna selection",
    "fig11-rician": "sum rate vs height under Rician fading",
    "custom": "strategy and sweep taken from the config file",
}

_TOP_LEVEL_KEYS = {
    "topology",
    "radio",
    "sweep",
    "trials",
    "seed",
    "threads",
    "format",
    "strategy",
    "independent_preamble_fading",
}
_TOPOLOGY_KEYS = {"m0", "m_max", "h", "K", "K_arl", "rayleigh_b"}
_RADIO_KEYS = {"P_dbm", "f0_hz", "B_hz", "kappa_db", "fading"}
_SWEEP_KEYS = {"heights", "aerial_percents", "aerial_counts"}


@dataclass(frozen=True)
class ExperimentSpec:
    preset: str
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    radio: RadioConfig = field(default_factory=RadioConfig)
    heights: tuple[float, ...] = DEFAULT_HEIGHTS
    aerial_percents: tuple[float, ...] = ()
    aerial_counts: tuple[int, ...] = DEFAULT_AERIAL_COUNTS
    strategy: Strategy = Strategy.CROSS_DIPOLE_PERFECT
    independent_preamble: bool = False
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    threads: int | None = None
    output_dir: Path = Path(DEFAULT_OUT_DIR)
    format: OutputFormat = OutputFormat.CSV

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ConfigError("preset", f"must be one of {sorted(PRESETS)} (got {self.preset!r})")
        if self.trials < 1:
            raise ConfigError("trials", f"must be an integer >= 1 (got {self.trials})")
        if self.seed < 0:
            raise ConfigError("seed", f"must be an integer >= 0 (got {self.seed})")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads", f"must be an integer >= 1 (got {self.threads})")
        if not self.heights or any(not (math.isfinite(h) and h > 0) for h in self.heights):
            raise ConfigError(
                "sweep.heights", f"must be a non-empty list of values > 0 (got {list(self.heights)})"
            )
        if any(not 0 <= p <= 100 for p in self.aerial_percents):
            raise ConfigError(
                "sweep.aerial_percents", f"must lie in [0, 100] (got {list(self.aerial_percents)})"
            )
        if not self.aerial_counts or any(
            not 0 <= n <= self.topology.K for n in self.aerial_counts
        ):
            raise ConfigError(
                "sweep.aerial_counts",
                f"must be a non-empty list of integers in [0, K={self.topology.K}] "
                f"(got {list(self.aerial_counts)})",
            )

    def to_record(self) -> dict:
        """Fully resolved configuration, in the units of the config file."""
        return {
            "preset": self.preset,
            "topology": {**asdict(self.topology), "b": self.topology.b},
            "radio": {
                "P_dbm": float(watts_to_dbm(self.radio.P)),
                "f0_hz": self.radio.f0,
                "B_hz": self.radio.B,
                "kappa_db": _linear_to_db(self.radio.kappa),
                "fading": self.radio.fading.value,
            },
            "sweep": {
                "heights": list(self.heights),
                "aerial_percents": list(self.aerial_percents),
                "aerial_counts": list(self.aerial_counts),
            },
            "strategy": self.strategy.value,
            "independent_preamble_fading": self.independent_preamble,
            "trials": self.trials,
            "seed": self.seed,
            "threads": self.threads,
            "format": self.format.value,
            "output_dir": str(self.output_dir),
        }


def _linear_to_db(value: float) -> float | str:
    if math.isinf(value):
        return "inf"
    if value == 0:
        return "-inf"
    return 10.0 * math.log10(value)


def _check_keys(section: dict, allowed: set[str], prefix: str):
    if not isinstance(section, dict):
        raise ConfigError(prefix or "config", "must be a JSON object")
    for key in section:
        if key not in allowed:
            name = f"{prefix}.{key}" if prefix else key
            raise ConfigError(name, f"unknown key; valid keys are {sorted(allowed)}")


def _number(value, key: str) -> float:
    # bool is an int subclass; reject it explicitly
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        if value in ("inf", "-inf"):
            return float(value)
        raise ConfigError(key, f"must be a number (got {value!r})")
    return float(value)


def _integer(value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ConfigError(key, f"must be an integer (got {value!r})")
    return value


def _enum(enum_cls, value, key: str):
    try:
        return enum_cls(value)
    except ValueError:
        raise ConfigError(
            key, f"must be one of {[m.value for m in enum_cls]} (got {value!r})"
        ) from None


def _list(value, key: str, convert) -> tuple:
    if not isinstance(value, list):
        raise ConfigError(key, f"must be a list (got {value!r})")
    return tuple(convert(item, key) for item in value)


def _apply_file(values: dict, document: dict):
    _check_keys(document, _TOP_LEVEL_KEYS, "")

    topology = document.get("topology", {})
    _check_keys(topology, _TOPOLOGY_KEYS, "topology")
    for key, value in topology.items():
        name = f"topology.{key}"
        if key in ("K", "K_arl"):
            values["topology"][key] = _integer(value, name)
        elif key == "rayleigh_b" and value is None:
            values["topology"][key] = None
        else:
            values["topology"][key] = _number(value, name)

    radio = document.get("radio", {})
    _check_keys(radio, _RADIO_KEYS, "radio")
    if "P_dbm" in radio:
        values["radio"]["P"] = dbm_to_watts(_number(radio["P_dbm"], "radio.P_dbm"))
    if "f0_hz" in radio:
        values["radio"]["f0"] = _number(radio["f0_hz"], "radio.f0_hz")
    if "B_hz" in radio:
        values["radio"]["B"] = _number(radio["B_hz"], "radio.B_hz")
    if "kappa_db" in radio:
        values["radio"]["kappa"] = db_to_linear(_number(radio["kappa_db"], "radio.kappa_db"))
    if "fading" in radio:
        values["radio"]["fading"] = _enum(FadingModel, radio["fading"], "radio.fading")

    sweep = document.get("sweep", {})
    _check_keys(sweep, _SWEEP_KEYS, "sweep")
    if "heights" in sweep:
        values["heights"] = _list(sweep["heights"], "sweep.heights", _number)
    if "aerial_percents" in sweep:
        values["aerial_percents"] = _list(sweep["aerial_percents"], "sweep.aerial_percents", _number)
    if "aerial_counts" in sweep:
        values["aerial_counts"] = _list(sweep["aerial_counts"], "sweep.aerial_counts", _integer)

    for key in ("trials", "seed", "threads"):
        if key in document:
            values[key] = None if key == "threads" and document[key] is None else _integer(document[key], key)
    if "format" in document:
        values["format"] = _enum(OutputFormat, document["format"], "format")
    if "strategy" in document:
        values["strategy"] = _enum(Strategy, document["strategy"], "strategy")
    if "independent_preamble_fading" in document:
        flag = document["independent_preamble_fading"]
        if not isinstance(flag, bool):
            raise ConfigError("independent_preamble_fading", f"must be true or false (got {flag!r})")
        values["independent_preamble"] = flag


def parse_config(
    preset: str,
    config_bytes: bytes | None = None,
    overrides: dict | None = None,
) -> ExperimentSpec:
    """
    Resolves an experiment from a preset name, the raw bytes of an optional JSON config
    file and flag overrides (`trials`, `seed`, `threads`, `output_dir`, `format`; None
    entries are ignored).
    """
    if preset not in PRESETS:
        raise ConfigError("preset", f"must be one of {sorted(PRESETS)} (got {preset!r})")

    defaults = PRESETS[preset]
    values = {
        "topology": dict(defaults.get("topology", {})),
        "radio": dict(defaults.get("radio", {})),
        **{key: value for key, value in defaults.items() if key not in ("topology", "radio")},
    }

    if config_bytes:
        try:
            document = json.loads(config_bytes)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise ConfigError("config", f"not valid JSON ({e})") from None
        _apply_file(values, document)

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "format":
            value = _enum(OutputFormat, value, "format")
        elif key == "output_dir":
            value = Path(value)
        elif key not in ("trials", "seed", "threads"):
            raise ConfigError(key, "unknown override")
        values[key] = value

    if "output_dir" not in values:
        values["output_dir"] = Path(os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR)

    topology = TopologyConfig(**values.pop("topology"))
    radio = RadioConfig(**values.pop("radio"))

    return ExperimentSpec(preset=preset, topology=topology, radio=radio, **values)
