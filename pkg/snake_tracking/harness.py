# -*- coding: utf-8 -*-
"""
Experiment orchestration: fit -> excite -> track -> compare, plus metrics and persisted artifacts.
"""
import logging
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy import stats

from .config import ExperimentConfig
from .constants import (
    CONTROLLER_MPC,
    CONTROLLER_MPPI,
    CONTROLLERS,
    DOF_PITCH,
    DOF_YAW,
    DOFS,
    LOGS_DIR,
    REPORT_FILE,
    REPORT_TABLE_FILE,
    SNAPSHOTS_DIR,
    TIMING_REPORT_FILE,
    TIMINGS_DIR,
)
from .exceptions import EmptyLog
from .gmm_gmr import fit_em, synthesize_dataset
from .identifier import excite, init_centers, make_identifier
from .interfaces import PositionMap
from .models import ComparisonReport, ComparisonRow, DisturbanceConfig, RbfIdentifier, TrackingLog, TrajectorySpec
from .mpc_baseline import track_mpc
from .mppi_controller import track
from .plant_sim import GmrPositionMap, SnakePlant
from .rng import derive_seed, stream
from .services.exporters import CsvRunExporter, write_snapshots, write_text
from .services.plotting import emit_plots
from .trajectories import generate

log = logging.getLogger(__name__)


# --- Metrics ---


def rmse(tracking_log: TrackingLog) -> Tuple[float, float]:
    """
    Root-mean-square of reference minus measured, per DoF.

    Returns:
        (pitch RMSE, yaw RMSE) in deg.

    Raises:
        EmptyLog: If the log has no records.
    """
    if len(tracking_log) == 0:
        raise EmptyLog(f"Log {tracking_log.controller}/{tracking_log.trajectory} has no records")
    values = []
    for dof in (DOF_PITCH, DOF_YAW):
        error = tracking_log.series("reference", dof) - tracking_log.series("measured", dof)
        values.append(float(np.sqrt(np.mean(error * error))))
    return values[0], values[1]


def mean_step_time_ns(tracking_log: TrackingLog) -> float:
    if len(tracking_log) == 0:
        raise EmptyLog(f"Log {tracking_log.controller}/{tracking_log.trajectory} has no records")
    return float(np.mean(tracking_log.wall_times_ns))


def _welch_p_value(a: List[float], b: List[float]) -> float:
    """Two-sided Welch t-test p-value; NaN with fewer than two samples per side."""
    if len(a) < 2 or len(b) < 2:
        return float("nan")
    return float(stats.ttest_ind(a, b, equal_var=False).pvalue)


def build_report(logs: Iterable[TrackingLog]) -> ComparisonReport:
    """
    Aggregates logs into one row per (controller, trajectory).

    RMSE mean/std are taken over repeats (population std). speedup is the MPC
    mean per-step time divided by the row's, 1.0 when no MPC run exists.
    """
    groups: "OrderedDict[Tuple[str, str], List[TrackingLog]]" = OrderedDict()
    ordered = sorted(logs, key=lambda item: (item.trajectory, CONTROLLERS.index(item.controller), item.repeat))
    for tracking_log in ordered:
        groups.setdefault((tracking_log.controller, tracking_log.trajectory), []).append(tracking_log)

    run_times = {key: [mean_step_time_ns(item) for item in group] for key, group in groups.items()}
    report = ComparisonReport()
    for (controller, trajectory), group in groups.items():
        errors = np.array([rmse(item) for item in group])
        times = run_times[(controller, trajectory)]
        mean_time = float(np.mean(times))
        mpc_times = run_times.get((CONTROLLER_MPC, trajectory))
        mppi_times = run_times.get((CONTROLLER_MPPI, trajectory))
        speedup = float(np.mean(mpc_times)) / mean_time if mpc_times else 1.0
        p_value = _welch_p_value(mpc_times, mppi_times) if mpc_times and mppi_times else float("nan")
        report.rows.append(
            ComparisonRow(
                controller=controller,
                trajectory=trajectory,
                repeats=len(group),
                rmse_pitch_mean=float(np.mean(errors[:, 0])),
                rmse_pitch_std=float(np.std(errors[:, 0])),
                rmse_yaw_mean=float(np.mean(errors[:, 1])),
                rmse_yaw_std=float(np.std(errors[:, 1])),
                mean_step_time_ns=mean_time,
                speedup=speedup,
                time_p_value=p_value,
            )
        )
    return report


def format_table(report: ComparisonReport) -> str:
    """Renders the report as an aligned plain-text table."""
    header = ["trajectory", "controller", "n", "RMSE pitch (deg)", "RMSE yaw (deg)", "time/step (ms)", "speedup", "p"]
    rows = [
        [
            row.trajectory,
            row.controller,
            str(row.repeats),
            f"{row.rmse_pitch_mean:.4f} +/- {row.rmse_pitch_std:.4f}",
            f"{row.rmse_yaw_mean:.4f} +/- {row.rmse_yaw_std:.4f}",
            f"{row.mean_step_time_ns / 1e6:.3f}",
            f"{row.speedup:.2f}",
            "-" if np.isnan(row.time_p_value) else f"{row.time_p_value:.2g}",
        ]
        for row in report.rows
    ]
    widths = [max(len(line[i]) for line in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip() for line in [header] + rows]
    lines.insert(1, "  ".join("-" * width for width in widths))
    return "\n".join(lines) + "\n"


# --- Orchestration ---


@dataclass(frozen=True)
class RunJob:
    """One (trajectory, repeat, controller) tracking run."""

    trajectory: TrajectorySpec
    repeat: int
    controller: str


class ExperimentRunner:
    """
    Runs the full comparison protocol for one ExperimentConfig.

    Every random stream is derived from the master seed: the surrogate fit on
    (dof), the plant, excitation, centers and initial weights on
    (trajectory, repeat, dof), and MPPI sampling on (mppi seed, trajectory,
    repeat). Both controllers therefore see the same plant noise and the same
    initial identifier for a given (trajectory, repeat).
    """

    def __init__(self, cfg: ExperimentConfig):
        if not isinstance(cfg, ExperimentConfig):
            raise TypeError("cfg must be an instance of ExperimentConfig")
        cfg.validate()
        self.cfg = cfg
        self._position_maps: Optional[Dict[str, PositionMap]] = None

    @property
    def position_maps(self) -> Dict[str, PositionMap]:
        if self._position_maps is None:
            self._position_maps = self.fit_position_maps()
        return self._position_maps

    def fit_position_maps(self) -> Dict[str, PositionMap]:
        """Fits one GMM-GMR surrogate per DoF on a synthesized dataset."""
        gmm_cfg = self.cfg.gmm
        maps: Dict[str, PositionMap] = {}
        for dof in DOFS:
            dataset = synthesize_dataset(
                dof,
                n_samples=gmm_cfg.samples,
                noise_std=gmm_cfg.noise_std,
                seed=derive_seed(self.cfg.master_seed, "dataset", dof),
            )
            model = fit_em(
                dataset,
                gmm_cfg.n_components,
                seed=derive_seed(self.cfg.master_seed, "gmm", gmm_cfg.seed, dof),
                max_iter=gmm_cfg.max_iter,
                tol=gmm_cfg.tol,
            )
            maps[dof] = GmrPositionMap(model)
        return maps

    def prepare_identifiers(self, trajectory: str, repeat: int) -> Dict[str, RbfIdentifier]:
        """
        Excites a disturbance-free plant, places RBF centers and seeds the initial weights.

        With identifier.nominal_model set, each identifier predicts on top of its DoF's surrogate map.
        """
        id_cfg = self.cfg.identifier
        master = self.cfg.master_seed
        identifiers = {}
        for dof in DOFS:
            samples = excite(
                self.position_maps[dof],
                DisturbanceConfig.disturbance_free(),
                stream(master, "excitation", trajectory, repeat, dof),
                steps=id_cfg.excitation_steps,
                step_std=id_cfg.excitation_step_std,
            )
            basis = init_centers(samples, id_cfg.n_basis, seed=derive_seed(master, "centers", trajectory, repeat, dof))
            identifiers[dof] = make_identifier(
                basis,
                seed=derive_seed(master, "weights", trajectory, repeat, dof),
                p0_scale=id_cfg.p0_scale,
                q0_scale=id_cfg.q0_scale,
                r0=id_cfg.r0,
                nominal=self.position_maps[dof] if id_cfg.nominal_model else None,
            )
        return identifiers

    def jobs(self) -> List[RunJob]:
        return [
            RunJob(trajectory=spec, repeat=repeat, controller=controller)
            for spec in self.cfg.trajectories
            for repeat in range(self.cfg.repeats)
            for controller in CONTROLLERS
        ]

    def run_one(self, job: RunJob) -> TrackingLog:
        """Runs one job on a fresh plant with a fresh identifier."""
        kind = job.trajectory.kind
        plant = SnakePlant.create(self.position_maps, self.cfg.plant, self.cfg.master_seed, kind, job.repeat)
        identifiers = self.prepare_identifiers(kind, job.repeat)
        reference = generate(job.trajectory)
        options = dict(
            trajectory=kind,
            repeat=job.repeat,
            outlier_gate=self.cfg.identifier.outlier_gate,
            snapshot_every=self.cfg.identifier.snapshot_every,
            preview=self.cfg.preview,
        )
        if job.controller == CONTROLLER_MPPI:
            seed = derive_seed(self.cfg.master_seed, "mppi", self.cfg.mppi.seed, kind, job.repeat)
            return track(plant, identifiers, reference, self.cfg.mppi, seed=seed, **options)
        return track_mpc(plant, identifiers, reference, self.cfg.mpc, seed=self.cfg.mpc.seed, **options)

    def run(self) -> List[TrackingLog]:
        """
        Runs every job and returns the logs in job order.

        With serial_timing set (the default) jobs run serially so per-step wall
        times are not skewed by contention.
        """
        jobs = self.jobs()
        if self._position_maps is None:
            self._position_maps = self.fit_position_maps()
        log.info(f"Running {len(jobs)} tracking runs")
        if self.cfg.workers > 1 and not self.cfg.serial_timing:
            with ThreadPoolExecutor(max_workers=self.cfg.workers) as pool:
                return list(pool.map(self.run_one, jobs))
        if self.cfg.workers > 1:
            log.warning(f"workers={self.cfg.workers} ignored: serial_timing is set")
        return [self.run_one(job) for job in jobs]

    def persist(self, logs: List[TrackingLog], report: ComparisonReport, plots: bool = True) -> Path:
        """Writes logs, timings, snapshots, reports and (optionally) plots under output_dir."""
        output_dir = Path(self.cfg.output_dir)
        for tracking_log in logs:
            CsvRunExporter.write_log(tracking_log, output_dir / LOGS_DIR)
            CsvRunExporter.write_timings(tracking_log, output_dir / TIMINGS_DIR)
            write_snapshots(tracking_log, output_dir / SNAPSHOTS_DIR)
        CsvRunExporter.write_report(report, output_dir / REPORT_FILE)
        CsvRunExporter.write_timing_report(report, output_dir / TIMING_REPORT_FILE)
        write_text(format_table(report), output_dir / REPORT_TABLE_FILE)
        if plots:
            emit_plots(logs, report, output_dir)
        return output_dir


def run_experiment(cfg: ExperimentConfig, plots: bool = True) -> ComparisonReport:
    """
    Runs the whole protocol, persists every artifact and returns the comparison report.

    Raises:
        ConfigInvalid: If the config fails validation.
        ExportException: If an output file cannot be written.
    """
    runner = ExperimentRunner(cfg)
    logs = runner.run()
    report = build_report(logs)
    output_dir = runner.persist(logs, report, plots=plots)
    log.info(f"Experiment finished: {len(logs)} runs written to {output_dir}")
    return report


def load_results(directory: Path) -> Tuple[List[TrackingLog], ComparisonReport]:
    """Reads back every persisted log (with its wall times) and rebuilds the report."""
    directory = Path(directory)
    logs = []
    for path in sorted((directory / LOGS_DIR).glob("*.csv")):
        timing_path = directory / TIMINGS_DIR / path.name
        logs.append(CsvRunExporter.read_log(path, timing_path if timing_path.exists() else None))
    return logs, build_report(logs)
