# -*- coding: utf-8 -*-
"""
Command-line entry point: fit-gmm, dump-traj, track, compare and plot.

Exit codes: 0 success, 2 invalid configuration, 3 any other failure.
"""
import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import ExperimentConfig, load_config, setup_logging
from .constants import (
    CONTROLLERS,
    DEFAULT_TRAJECTORY_POINTS,
    DOF_PITCH,
    DOFS,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    EXIT_RUNTIME_ERROR,
    GMM_COMPONENTS,
    GMM_MAX_ITER,
    GMM_TOL,
    LOGS_DIR,
    SNAPSHOTS_DIR,
    TIMINGS_DIR,
    TRAJECTORY_KINDS,
)
from .exceptions import ConfigInvalid, SnakeTrackingException
from .gmm_gmr import fit_em, model_to_dict, synthesize_dataset
from .harness import ExperimentRunner, format_table, load_results, rmse, run_experiment
from .models import TrajectorySpec
from .services.exporters import CsvRunExporter, write_json, write_snapshots
from .services.plotting import emit_plots
from .trajectories import generate

log = logging.getLogger(__name__)


def _load(path: Optional[str], seed: Optional[int]) -> ExperimentConfig:
    cfg = load_config(path) if path else ExperimentConfig()
    return cfg.with_seed(seed) if seed is not None else cfg


def cmd_fit_gmm(args: argparse.Namespace) -> int:
    if args.input:
        dataset = CsvRunExporter.read_dataset(args.input)
    else:
        dataset = synthesize_dataset(args.dof, n_samples=args.samples, seed=args.seed)
    model = fit_em(dataset, args.k, seed=args.seed, max_iter=args.max_iter, tol=args.tol)
    write_json(model_to_dict(model), args.output)
    print(f"Fitted {model.n_components} components in {model.n_iter} iterations (converged={model.converged})")
    return EXIT_OK


def cmd_dump_traj(args: argparse.Namespace) -> int:
    points = generate(TrajectorySpec(kind=args.traj, points=args.points))
    output = args.output or f"{args.traj}.csv"
    CsvRunExporter.write_trajectory(points, output)
    print(f"Wrote {len(points)} points to {output}")
    return EXIT_OK


def cmd_track(args: argparse.Namespace) -> int:
    cfg = _load(args.config, args.seed)
    spec = next((item for item in cfg.trajectories if item.kind == args.traj), TrajectorySpec(kind=args.traj))
    cfg = dataclasses.replace(cfg, trajectories=(spec,), repeats=1)
    runner = ExperimentRunner(cfg)
    tracking_log = runner.run_one(runner.jobs()[CONTROLLERS.index(args.controller)])

    output_dir = Path(cfg.output_dir)
    CsvRunExporter.write_log(tracking_log, output_dir / LOGS_DIR)
    CsvRunExporter.write_timings(tracking_log, output_dir / TIMINGS_DIR)
    write_snapshots(tracking_log, output_dir / SNAPSHOTS_DIR)
    pitch, yaw = rmse(tracking_log)
    print(f"{args.controller} on {args.traj}: RMSE pitch {pitch:.4f} deg, yaw {yaw:.4f} deg")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = _load(args.config, args.seed)
    if args.output_dir:
        cfg = dataclasses.replace(cfg, output_dir=args.output_dir)
    report = run_experiment(cfg, plots=not args.no_plots)
    print(format_table(report), end="")
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    logs, report = load_results(Path(args.from_dir))
    paths = emit_plots(logs, report, args.from_dir)
    print(f"Wrote {len(paths)} figures")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="snake_tracking", description=__doc__.strip().splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit-gmm", help="fit the GMM-GMR surrogate of one DoF")
    fit.add_argument("--k", type=int, default=GMM_COMPONENTS)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--max-iter", type=int, default=GMM_MAX_ITER)
    fit.add_argument("--tol", type=float, default=GMM_TOL)
    fit.add_argument("--samples", type=int, default=2000, help="synthesized dataset size")
    source = fit.add_mutually_exclusive_group()
    source.add_argument("--input", help="u_rad,x_deg CSV")
    source.add_argument("--dof", choices=DOFS, default=DOF_PITCH, help="synthesize from the ground-truth map")
    fit.add_argument("--output", required=True)
    fit.set_defaults(handler=cmd_fit_gmm)

    dump = sub.add_parser("dump-traj", help="write a reference trajectory as CSV")
    dump.add_argument("--traj", choices=TRAJECTORY_KINDS, required=True)
    dump.add_argument("--points", type=int, default=DEFAULT_TRAJECTORY_POINTS)
    dump.add_argument("--output")
    dump.set_defaults(handler=cmd_dump_traj)

    track = sub.add_parser("track", help="track one trajectory with one controller")
    track.add_argument("--controller", choices=CONTROLLERS, required=True)
    track.add_argument("--traj", choices=TRAJECTORY_KINDS, required=True)
    track.add_argument("--config")
    track.add_argument("--seed", type=int)
    track.set_defaults(handler=cmd_track)

    compare = sub.add_parser("compare", help="run the full MPPI vs MPC comparison")
    compare.add_argument("--config", required=True)
    compare.add_argument("--seed", type=int)
    compare.add_argument("--output-dir")
    compare.add_argument("--no-plots", action="store_true")
    compare.set_defaults(handler=cmd_compare)

    plot = sub.add_parser("plot", help="redraw figures from a results directory")
    plot.add_argument("--from", dest="from_dir", required=True)
    plot.set_defaults(handler=cmd_plot)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(logging.DEBUG if args.verbose else logging.INFO)
    try:
        return args.handler(args)
    except ConfigInvalid as e:
        log.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG_ERROR
    except SnakeTrackingException as e:
        log.error(f"{type(e).__name__}: {e}")
        return EXIT_RUNTIME_ERROR
    except Exception:
        log.exception(f"Unexpected error in {args.command}")
        return EXIT_RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
