"""Serialization: CSV/JSON tables for every result type and the run manifest
that makes a run replayable.

Manifests carry the fully resolved configuration, the root seed, and the
command options, and deliberately no timestamps or host details: replaying a
manifest must reproduce the original output files byte for byte.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os

import numpy as np

from .errors import DataError


def _plain(value):
    """JSON-safe scalar: numpy types to Python, floats kept as floats."""
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


def _cell(value) -> str:
    """CSV cell with round-trip float precision."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(_plain(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_table(path, header, rows, fmt: str) -> None:
    """One result table in the requested format. JSON renders the table as a
    {column: values} mapping."""
    if fmt == "csv":
        write_csv(path, header, rows)
    elif fmt == "json":
        rows = list(rows)
        payload = {
            name: [_plain(row[i]) for row in rows] for i, name in enumerate(header)
        }
        write_json(path, payload)
    else:
        raise DataError(f"unknown output format {fmt!r}")


# --- result tables -----------------------------------------------------------

SERIES_COLUMNS = (
    "shot",
    "timestamp",
    "scan_value",
    "population",
    "true_probability",
    "phase_noise",
    "f2_counts",
    "total_counts",
)


def series_rows(series):
    for i in range(len(series)):
        yield (
            i,
            series.timestamps[i],
            series.scan_values[i],
            series.populations[i],
            series.true_probabilities[i],
            series.phase_noise[i],
            series.f2_counts[i],
            series.total_counts[i],
        )


ALLAN_COLUMNS = ("tau", "allan_deviation", "error", "bins")


def allan_rows(curve):
    for i in range(len(curve)):
        yield (curve.taus[i], curve.sigmas[i], curve.errors[i], curve.bin_counts[i])


SWEEP_COLUMNS = (
    "data_rate",
    "interrogation_T",
    "duty_cycle",
    "phase_noise_budget",
    "sensitivity_budget",
    "sensitivity_flat_budget",
    "sensitivity_measured",
    "mc_shots",
)


def sweep_rows(result):
    for row in result.rows:
        yield (
            row.data_rate,
            row.interrogation_T,
            row.duty_cycle,
            row.phase_noise_budget,
            row.sensitivity_budget,
            row.sensitivity_flat_budget,
            "" if row.sensitivity_measured is None else row.sensitivity_measured,
            row.mc_shots,
        )


def report_rows(report: dict):
    for key in sorted(report):
        yield (key, report[key])


def fit_to_dict(fit) -> dict:
    return _plain(dataclasses.asdict(fit))


# --- manifests ---------------------------------------------------------------

MANIFEST_KIND = "lpaisim-run"


def write_manifest(path, command: str, config_snapshot: dict, seed, options: dict,
                   fmt: str, outputs: list[str]) -> None:
    payload = {
        "kind": MANIFEST_KIND,
        "command": command,
        "seed": seed,
        "format": fmt,
        "options": options,
        "outputs": outputs,
        "config": config_snapshot,
    }
    write_json(path, payload)


def read_manifest(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed manifest {path}: {exc}") from exc
    if not isinstance(data, dict) or data.get("kind") != MANIFEST_KIND:
        raise DataError(f"{path} is not a run manifest")
    return data


def output_path(out_dir, stem: str, fmt: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, f"{stem}.{fmt}")
