# -*- coding: utf-8 -*-
"""
Tests for the command-line entry point.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from snake_tracking.constants import EXIT_CONFIG_ERROR, EXIT_OK, EXIT_RUNTIME_ERROR, LOGS_DIR, PLOTS_DIR, TIMINGS_DIR
from snake_tracking.main import build_parser, main


def tiny_config(output_dir: Path) -> Dict[str, Any]:
    return {
        "gmm": {"n_components": 3, "samples": 200, "max_iter": 50},
        "identifier": {"n_basis": 4, "excitation_steps": 20},
        "mppi": {"num_samples": 8, "horizon": 4},
        "mpc": {"horizon": 4, "max_solver_iters": 10},
        "trajectories": [{"kind": "star", "points": 10}],
        "repeats": 1,
        "output_dir": str(output_dir),
    }


def write_config(path: Path, document: Dict[str, Any]) -> str:
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)


class TestMain:
    """Tests for main() and its subcommands."""

    def test_should_write_reference_csv_when_dumping_trajectory(
        self, tmp_path: Path, capsys: pytest.CaptureFixture
    ) -> None:
        # Arrange
        output = tmp_path / "star.csv"

        # Act
        code = main(["dump-traj", "--traj", "star", "--points", "10", "--output", str(output)])

        # Assert
        assert code == EXIT_OK
        lines = output.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "j,pitch_deg,yaw_deg"
        assert len(lines) == 11
        assert "Wrote 10 points" in capsys.readouterr().out

    def test_should_write_model_json_when_fitting_synthesized_data(self, tmp_path: Path) -> None:
        # Arrange
        output = tmp_path / "model.json"

        # Act
        code = main(["fit-gmm", "--k", "2", "--samples", "100", "--dof", "yaw", "--output", str(output)])

        # Assert
        assert code == EXIT_OK
        document = json.loads(output.read_text(encoding="utf-8"))
        assert len(document["components"]) == 2

    def test_should_exit_with_config_error_when_config_is_invalid(self, tmp_path: Path) -> None:
        # Arrange
        config = write_config(tmp_path / "bad.json", {"repeats": 0})

        # Act
        code = main(["track", "--controller", "mppi", "--traj", "star", "--config", config])

        # Assert
        assert code == EXIT_CONFIG_ERROR

    def test_should_exit_with_runtime_error_when_config_file_is_missing(self, tmp_path: Path) -> None:
        assert main(["compare", "--config", str(tmp_path / "missing.json")]) == EXIT_RUNTIME_ERROR

    def test_should_exit_with_runtime_error_when_dataset_is_malformed(self, tmp_path: Path) -> None:
        # Arrange
        dataset = tmp_path / "data.csv"
        dataset.write_text("a,b\n1,2\n", encoding="utf-8")

        # Act
        code = main(["fit-gmm", "--input", str(dataset), "--output", str(tmp_path / "model.json")])

        # Assert
        assert code == EXIT_RUNTIME_ERROR

    @patch("snake_tracking.main.run_experiment")
    def test_should_log_traceback_and_exit_with_runtime_error_when_command_fails_unexpectedly(
        self, mock_run_experiment: MagicMock, tmp_path: Path, caplog: pytest.LogCaptureFixture
    ) -> None:
        # Arrange
        mock_run_experiment.side_effect = np.linalg.LinAlgError("Matrix is not positive definite")
        config = write_config(tmp_path / "config.json", tiny_config(tmp_path / "results"))

        # Act
        with caplog.at_level(logging.ERROR):
            code = main(["compare", "--config", config])

        # Assert
        assert code == EXIT_RUNTIME_ERROR
        mock_run_experiment.assert_called_once()
        record = next(item for item in caplog.records if "Unexpected error in compare" in item.getMessage())
        assert record.exc_info is not None
        assert record.exc_info[0] is np.linalg.LinAlgError

    def test_should_write_log_and_print_rmse_when_tracking_one_trajectory(
        self, tmp_path: Path, capsys: pytest.CaptureFixture
    ) -> None:
        # Arrange
        output_dir = tmp_path / "out"
        config = write_config(tmp_path / "tiny.json", tiny_config(output_dir))

        # Act
        code = main(["track", "--controller", "mpc", "--traj", "star", "--config", config, "--seed", "3"])

        # Assert
        assert code == EXIT_OK
        assert (output_dir / LOGS_DIR / "mpc_star_r0.csv").exists()
        assert (output_dir / TIMINGS_DIR / "mpc_star_r0.csv").exists()
        assert "mpc on star: RMSE pitch" in capsys.readouterr().out

    def test_should_redraw_figures_when_plotting_from_compare_output(
        self, tmp_path: Path, capsys: pytest.CaptureFixture
    ) -> None:
        # Arrange
        output_dir = tmp_path / "out"
        config = write_config(tmp_path / "tiny.json", tiny_config(tmp_path / "ignored"))

        # Act
        compare_code = main(["compare", "--config", config, "--output-dir", str(output_dir), "--no-plots"])
        plot_code = main(["plot", "--from", str(output_dir)])

        # Assert
        assert (compare_code, plot_code) == (EXIT_OK, EXIT_OK)
        assert sorted(path.name for path in (output_dir / PLOTS_DIR).glob("*.svg")) == ["star.svg", "timing.svg"]
        out = capsys.readouterr().out
        assert "trajectory" in out
        assert "Wrote 2 figures" in out

    def test_should_reject_unknown_trajectory_when_parsing_arguments(self) -> None:
        with pytest.raises(SystemExit):
            build_parser().parse_args(["dump-traj", "--traj", "spiral"])
