"""
Result tables (CSV or JSON records) and the `<name>.meta.json` sidecar next to them.
"""

import json
import math
from pathlib import Path

import pandas as pd

from .config import ExperimentSpec, OutputFormat

FLOAT_FORMAT = "%.17g"


def table_frame(rows: list[dict]) -> pd.DataFrame:
    return pd.DataFrame.from_records(rows)


def table_path(output_dir: Path, name: str, panel: str, fmt: OutputFormat) -> Path:
    stem = name if not panel else f"{name}-{panel.replace('_', '-')}"
    return Path(output_dir) / f"{stem}.{fmt.value}"


def write_table(rows: list[dict], path: Path, fmt: OutputFormat) -> Path:
    frame = table_frame(rows)
    path.parent.mkdir(parents=True, exist_ok=True)

    if fmt is OutputFormat.CSV:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    else:
        # double_precision=15 is the most pandas allows; json.dumps keeps every digit
        path.write_text(json.dumps(_json_safe(frame.to_dict(orient="records")), indent=2) + "\n")

    print(f"Wrote {len(frame)} rows to {path}")
    return path


def read_table(path: Path) -> pd.DataFrame:
    path = Path(path)
    if path.suffix == ".json":
        return pd.DataFrame.from_records(json.loads(path.read_text()))
    return pd.read_csv(path, float_precision="round_trip")


def _json_safe(value):
    """JSON has no inf / nan; they are written as strings."""
    if isinstance(value, dict):
        return {key: _json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(item) for item in value]
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if hasattr(value, "item"):  # numpy scalar
        return _json_safe(value.item())
    return value


def write_sidecar(path: Path, record: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_json_safe(record), indent=2) + "\n")
    return path


def write_outputs(
    spec: ExperimentSpec, tables: dict[str, list[dict]], metadata: dict
) -> list[Path]:
    """
    One table per panel (`<preset>.<fmt>` for a single panel, `<preset>-<panel>.<fmt>`
    otherwise) and the `<preset>.meta.json` sidecar.
    """
    single = len(tables) == 1
    written = []
    for panel, rows in tables.items():
        path = table_path(spec.output_dir, spec.preset, "" if single else panel, spec.format)
        written.append(write_table(rows, path, spec.format))

    sidecar = Path(spec.output_dir) / f"{spec.preset}.meta.json"
    written.append(
        write_sidecar(sidecar, {**metadata, "tables": [str(p) for p in written]})
    )
    return written
