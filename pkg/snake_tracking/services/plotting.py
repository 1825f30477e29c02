# -*- coding: utf-8 -*-
"""
SVG figures of a comparison run: tracked paths per trajectory and mean per-step controller time.

Output is byte-stable for identical inputs: the SVG hash salt is fixed, the
date metadata is dropped and path simplification is off so every logged point
becomes one path vertex.
"""
import logging
from collections import OrderedDict
from pathlib import Path
from typing import Iterable, List, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..constants import (  # noqa: E402
    COLOR_BY_CONTROLLER,
    COLOR_REFERENCE,
    CONTROLLERS,
    DOF_PITCH,
    DOF_YAW,
    PLOTS_DIR,
    TIMING_PLOT_FILE,
)
from ..exceptions import ExportException  # noqa: E402
from ..models import ComparisonReport, TrackingLog  # noqa: E402

log = logging.getLogger(__name__)

_RC = {
    "svg.hashsalt": "snake-tracking",
    "svg.fonttype": "path",
    "path.simplify": False,
}


def _save(figure: "plt.Figure", path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        figure.savefig(path, format="svg", metadata={"Date": None})
    except OSError as e:
        log.exception(f"Failed to write figure {path}")
        raise ExportException(f"OSError exporting to {path}: {e}") from e
    finally:
        plt.close(figure)
    return path


def plot_trajectory(trajectory: str, logs: List[TrackingLog], path: Path) -> Path:
    """Overlays the reference (red), MPC runs (green) and MPPI runs (blue) in (yaw, pitch) axes."""
    with plt.rc_context(_RC):
        figure, axes = plt.subplots(figsize=(5, 5))
        reference = logs[0]
        axes.plot(
            reference.series("reference", DOF_YAW),
            reference.series("reference", DOF_PITCH),
            color=COLOR_REFERENCE,
            linewidth=1.5,
            label="reference",
            gid="reference",
        )
        labelled = set()
        for tracking_log in sorted(logs, key=lambda item: (CONTROLLERS.index(item.controller), item.repeat)):
            axes.plot(
                tracking_log.series("measured", DOF_YAW),
                tracking_log.series("measured", DOF_PITCH),
                color=COLOR_BY_CONTROLLER[tracking_log.controller],
                linewidth=0.8,
                alpha=0.8,
                label=None if tracking_log.controller in labelled else tracking_log.controller.upper(),
                gid=f"{tracking_log.controller}-r{tracking_log.repeat}",
            )
            labelled.add(tracking_log.controller)
        axes.set_xlabel("yaw (deg)")
        axes.set_ylabel("pitch (deg)")
        axes.set_title(trajectory)
        axes.set_aspect("equal", adjustable="datalim")
        axes.legend(loc="upper right")
        return _save(figure, path)


def plot_timing(report: ComparisonReport, path: Path) -> Path:
    """Grouped bar chart of mean per-step controller time (ms) per trajectory."""
    trajectories = list(OrderedDict.fromkeys(row.trajectory for row in report.rows))
    controllers = [name for name in CONTROLLERS if any(row.controller == name for row in report.rows)]
    width = 0.8 / max(len(controllers), 1)
    with plt.rc_context(_RC):
        figure, axes = plt.subplots(figsize=(7, 4))
        for offset, controller in enumerate(controllers):
            positions, heights = [], []
            for index, trajectory in enumerate(trajectories):
                row = report.row(controller, trajectory)
                if row is not None:
                    positions.append(index + offset * width)
                    heights.append(row.mean_step_time_ns / 1e6)
            axes.bar(positions, heights, width=width, color=COLOR_BY_CONTROLLER[controller], label=controller.upper())
        axes.set_xticks([index + width * (len(controllers) - 1) / 2 for index in range(len(trajectories))])
        axes.set_xticklabels(trajectories, rotation=20)
        axes.set_ylabel("controller time per step (ms)")
        axes.legend()
        figure.tight_layout()
        return _save(figure, path)


def emit_plots(logs: Iterable[TrackingLog], report: ComparisonReport, output_dir: Union[str, Path]) -> List[Path]:
    """
    Writes one SVG per trajectory plus the timing bar chart under `<output_dir>/plots`.

    An empty run set writes nothing.

    Raises:
        ExportException: If a figure cannot be written.
    """
    by_trajectory: "OrderedDict[str, List[TrackingLog]]" = OrderedDict()
    for tracking_log in logs:
        by_trajectory.setdefault(tracking_log.trajectory, []).append(tracking_log)
    if not by_trajectory:
        log.info("No runs to plot")
        return []

    plots_dir = Path(output_dir) / PLOTS_DIR
    paths = [plot_trajectory(name, group, plots_dir / f"{name}.svg") for name, group in by_trajectory.items()]
    paths.append(plot_timing(report, plots_dir / TIMING_PLOT_FILE))
    log.info(f"Wrote {len(paths)} figures to {plots_dir}")
    return paths
