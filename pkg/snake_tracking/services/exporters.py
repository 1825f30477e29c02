# -*- coding: utf-8 -*-
"""
Utility classes/functions for persisting runs: CSV logs and reports, JSON models and snapshots.

Floats are written with repr() so every value reads back bit-exactly. Every
OSError is logged and re-raised as ExportException.
"""
import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np

from ..constants import DOFS, SCHEMA_VERSION
from ..exceptions import ExportException
from ..identifier import identifier_to_dict
from ..models import ComparisonReport, Dataset, StepRecord, TrackingLog

log = logging.getLogger(__name__)

PathLike = Union[str, Path]

LOG_COLUMNS = (
    ["step"]
    + [f"reference_{dof}_deg" for dof in DOFS]
    + [f"measured_{dof}_deg" for dof in DOFS]
    + [f"control_{dof}_rad" for dof in DOFS]
    + [f"innovation_{dof}" for dof in DOFS]
)
TIMING_COLUMNS = ["step", "wall_time_ns"]
REPORT_COLUMNS = [
    "controller",
    "trajectory",
    "repeats",
    "rmse_pitch_mean",
    "rmse_pitch_std",
    "rmse_yaw_mean",
    "rmse_yaw_std",
]
TIMING_REPORT_COLUMNS = ["controller", "trajectory", "repeats", "mean_step_time_ns", "speedup", "time_p_value"]


def run_name(controller: str, trajectory: str, repeat: int) -> str:
    return f"{controller}_{trajectory}_r{repeat}"


def _log_name(tracking_log: TrackingLog) -> str:
    return run_name(tracking_log.controller, tracking_log.trajectory, tracking_log.repeat)


def _fmt(value: float) -> str:
    return repr(float(value))


def _schema_header(**fields: Any) -> str:
    tags = " ".join(f"{key}={value}" for key, value in fields.items())
    return f"# schema={SCHEMA_VERSION} {tags}".rstrip() + "\n"


def _parse_schema_header(line: str, path: PathLike) -> Dict[str, str]:
    if not line.startswith("# "):
        raise ExportException(f"{path} has no schema header")
    tags = dict(token.split("=", 1) for token in line[2:].split() if "=" in token)
    if tags.get("schema") != str(SCHEMA_VERSION):
        raise ExportException(f"{path} has schema {tags.get('schema')!r}, expected {SCHEMA_VERSION}")
    return tags


def _write_rows(path: PathLike, header_line: Optional[str], columns: List[str], rows: Iterable[List[Any]]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as file_handle:
            if header_line:
                file_handle.write(header_line)
            writer = csv.writer(file_handle, lineterminator="\n")
            writer.writerow(columns)
            writer.writerows(rows)
    except OSError as e:
        log.exception(f"Failed to write CSV file {path}")
        raise ExportException(f"OSError exporting to {path}: {e}") from e
    return path


def _read_lines(path: PathLike) -> List[str]:
    try:
        with open(path, "r", newline="", encoding="utf-8") as file_handle:
            return file_handle.read().splitlines()
    except OSError as e:
        log.exception(f"Failed to read {path}")
        raise ExportException(f"OSError reading {path}: {e}") from e


class CsvRunExporter:
    """Writes and reads the per-run CSV files and the comparison reports."""

    @staticmethod
    def write_log(tracking_log: TrackingLog, directory: PathLike) -> Path:
        """
        Writes the deterministic part of a run (no wall times) to `<directory>/<run name>.csv`.

        Raises:
            ExportException: If an OSError occurs during writing.
        """
        path = Path(directory) / f"{_log_name(tracking_log)}.csv"
        header = _schema_header(
            controller=tracking_log.controller,
            trajectory=tracking_log.trajectory,
            repeat=tracking_log.repeat,
            seed=tracking_log.seed,
        )
        rows = (
            [record.step]
            + [_fmt(record.reference[dof]) for dof in DOFS]
            + [_fmt(record.measured[dof]) for dof in DOFS]
            + [_fmt(record.control[dof]) for dof in DOFS]
            + [_fmt(record.innovation[dof]) for dof in DOFS]
            for record in tracking_log.records
        )
        _write_rows(path, header, LOG_COLUMNS, rows)
        log.debug(f"Wrote {len(tracking_log)} steps to {path}")
        return path

    @staticmethod
    def read_log(path: PathLike, timing_path: Optional[PathLike] = None) -> TrackingLog:
        """
        Reads a log written by write_log. Wall times come from `timing_path` when given, else 1 ns.

        Raises:
            ExportException: On I/O failure or a missing/unsupported schema header.
        """
        lines = _read_lines(path)
        if not lines:
            raise ExportException(f"{path} is empty")
        tags = _parse_schema_header(lines[0], path)
        wall_times: Dict[int, int] = {}
        if timing_path is not None:
            timing_lines = _read_lines(timing_path)
            for row in csv.DictReader(timing_lines[1:]):
                wall_times[int(row["step"])] = int(row["wall_time_ns"])

        tracking_log = TrackingLog(
            controller=tags.get("controller", ""),
            trajectory=tags.get("trajectory", ""),
            repeat=int(tags.get("repeat", 0)),
            seed=int(tags.get("seed", 0)),
        )
        for row in csv.DictReader(lines[1:]):
            step = int(row["step"])
            tracking_log.records.append(
                StepRecord(
                    step=step,
                    reference={dof: float(row[f"reference_{dof}_deg"]) for dof in DOFS},
                    measured={dof: float(row[f"measured_{dof}_deg"]) for dof in DOFS},
                    control={dof: float(row[f"control_{dof}_rad"]) for dof in DOFS},
                    innovation={dof: float(row[f"innovation_{dof}"]) for dof in DOFS},
                    wall_time_ns=wall_times.get(step, 1),
                )
            )
        return tracking_log

    @staticmethod
    def write_timings(tracking_log: TrackingLog, directory: PathLike) -> Path:
        """Writes the per-step controller wall times of a run."""
        path = Path(directory) / f"{_log_name(tracking_log)}.csv"
        header = _schema_header(controller=tracking_log.controller, trajectory=tracking_log.trajectory)
        rows = ([record.step, record.wall_time_ns] for record in tracking_log.records)
        return _write_rows(path, header, TIMING_COLUMNS, rows)

    @staticmethod
    def write_report(report: ComparisonReport, path: PathLike) -> Path:
        """Writes the RMSE statistics (deterministic given the master seed)."""
        rows = (
            [
                row.controller,
                row.trajectory,
                row.repeats,
                _fmt(row.rmse_pitch_mean),
                _fmt(row.rmse_pitch_std),
                _fmt(row.rmse_yaw_mean),
                _fmt(row.rmse_yaw_std),
            ]
            for row in report.rows
        )
        path = _write_rows(path, _schema_header(), REPORT_COLUMNS, rows)
        log.info(f"Wrote report with {len(report.rows)} rows to {path}")
        return path

    @staticmethod
    def write_timing_report(report: ComparisonReport, path: PathLike) -> Path:
        """Writes mean per-step times, speedups and Welch p-values."""
        rows = (
            [
                row.controller,
                row.trajectory,
                row.repeats,
                _fmt(row.mean_step_time_ns),
                _fmt(row.speedup),
                _fmt(row.time_p_value),
            ]
            for row in report.rows
        )
        return _write_rows(path, _schema_header(), TIMING_REPORT_COLUMNS, rows)

    @staticmethod
    def write_dataset(dataset: Dataset, path: PathLike) -> Path:
        rows = ([_fmt(u), _fmt(x)] for u, x in dataset.samples)
        return _write_rows(path, None, ["u_rad", "x_deg"], rows)

    @staticmethod
    def read_dataset(path: PathLike) -> Dataset:
        """Reads a `u_rad,x_deg` CSV into a Dataset."""
        lines = _read_lines(path)
        try:
            pairs = [(float(row["u_rad"]), float(row["x_deg"])) for row in csv.DictReader(lines)]
        except (KeyError, TypeError, ValueError) as e:
            raise ExportException(f"{path} is not a u_rad,x_deg CSV: {e}") from e
        return Dataset.from_pairs(pairs)

    @staticmethod
    def write_trajectory(points: np.ndarray, path: PathLike) -> Path:
        """Writes a (T, 2) pitch/yaw reference as `j,pitch_deg,yaw_deg`."""
        rows = ([j, _fmt(pitch), _fmt(yaw)] for j, (pitch, yaw) in enumerate(points))
        return _write_rows(path, None, ["j", "pitch_deg", "yaw_deg"], rows)


# --- JSON ---


def write_json(document: Any, path: PathLike) -> Path:
    """Writes a JSON document with sorted keys, creating parent directories."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as file_handle:
            json.dump(document, file_handle, indent=2, sort_keys=True)
            file_handle.write("\n")
    except OSError as e:
        log.exception(f"Failed to write JSON file {path}")
        raise ExportException(f"OSError exporting to {path}: {e}") from e
    return path


def read_json(path: PathLike) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as file_handle:
            return json.load(file_handle)
    except OSError as e:
        log.exception(f"Failed to read JSON file {path}")
        raise ExportException(f"OSError reading {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ExportException(f"{path} is not valid JSON: {e}") from e


def write_snapshots(tracking_log: TrackingLog, directory: PathLike) -> Optional[Path]:
    """Writes a run's periodic identifier snapshots to one JSON file; returns None when there are none."""
    if not tracking_log.snapshots:
        return None
    document = {
        "schema": SCHEMA_VERSION,
        "controller": tracking_log.controller,
        "trajectory": tracking_log.trajectory,
        "repeat": tracking_log.repeat,
        "snapshots": [
            {"step": snapshot.step, "dof": snapshot.dof, "identifier": identifier_to_dict(snapshot.identifier)}
            for snapshot in tracking_log.snapshots
        ],
    }
    return write_json(document, Path(directory) / f"{_log_name(tracking_log)}.json")


def write_text(text: str, path: PathLike) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as file_handle:
            file_handle.write(text)
    except OSError as e:
        log.exception(f"Failed to write {path}")
        raise ExportException(f"OSError exporting to {path}: {e}") from e
    return path
