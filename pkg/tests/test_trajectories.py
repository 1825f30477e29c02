# -*- coding: utf-8 -*-
"""
Unit tests for the reference trajectory generators.
"""

import numpy as np
import pytest

from snake_tracking.constants import (
    TRAJ_INFINITY_HORIZONTAL,
    TRAJ_INFINITY_VERTICAL,
    TRAJ_OVAL_HORIZONTAL,
    TRAJ_OVAL_VERTICAL,
    TRAJ_STAR,
    TRAJECTORY_KINDS,
)
from snake_tracking.exceptions import ConfigInvalid, UnknownKind
from snake_tracking.models import TrajectorySpec
from snake_tracking.trajectories import generate, parameter_grid, star_radius

PITCH, YAW = 0, 1


class TestGenerate:
    """Tests for generate."""

    @pytest.mark.parametrize("kind", TRAJECTORY_KINDS)
    def test_should_return_points_by_two_when_generating_any_kind(self, kind: str) -> None:
        # Act
        points = generate(TrajectorySpec(kind=kind, points=120))

        # Assert
        assert points.shape == (120, 2)
        assert np.all(np.abs(points) <= 15.0)

    @pytest.mark.parametrize("kind", TRAJECTORY_KINDS)
    def test_should_keep_consecutive_points_close_when_curve_is_sampled(self, kind: str) -> None:
        # Arrange
        points = generate(TrajectorySpec(kind=kind, points=200))
        closed = np.vstack([points, points[:1]])

        # Act
        gaps = np.linalg.norm(np.diff(closed, axis=0), axis=1)

        # Assert
        assert gaps.max() <= 2 * np.pi * 10.0 / 200 * 1.6

    def test_should_start_on_yaw_axis_when_oval_is_horizontal(self) -> None:
        # Act
        points = generate(TrajectorySpec(kind=TRAJ_OVAL_HORIZONTAL))

        # Assert
        assert points[0, PITCH] == 0.0
        assert points[0, YAW] == 10.0
        assert points[50, PITCH] == pytest.approx(5.0)

    @pytest.mark.parametrize(
        "horizontal, vertical",
        [(TRAJ_OVAL_HORIZONTAL, TRAJ_OVAL_VERTICAL), (TRAJ_INFINITY_HORIZONTAL, TRAJ_INFINITY_VERTICAL)],
    )
    def test_should_swap_axes_when_variant_is_vertical(self, horizontal: str, vertical: str) -> None:
        # Act
        flat = generate(TrajectorySpec(kind=horizontal, points=64))
        upright = generate(TrajectorySpec(kind=vertical, points=64))

        # Assert
        np.testing.assert_array_equal(upright, flat[:, ::-1])

    def test_should_cross_origin_when_infinity_reaches_quarter_turn(self) -> None:
        # Act
        points = generate(TrajectorySpec(kind=TRAJ_INFINITY_HORIZONTAL))

        # Assert
        np.testing.assert_allclose(points[50], [0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(points[150], [0.0, 0.0], atol=1e-12)

    def test_should_alternate_tips_and_valleys_when_star_is_sampled(self) -> None:
        # Act
        points = generate(TrajectorySpec(kind=TRAJ_STAR))
        radii = np.linalg.norm(points, axis=1)

        # Assert
        for k in range(5):
            assert radii[(50 + 40 * k) % 200] == pytest.approx(10.0)
            assert radii[(70 + 40 * k) % 200] == pytest.approx(5.0)
        assert points[50, PITCH] == pytest.approx(10.0)

    def test_should_be_five_fold_symmetric_when_computing_star_radius(self) -> None:
        # Arrange
        t = parameter_grid(200)

        # Act
        radius = star_radius(t, 10.0, 5.0)

        # Assert
        np.testing.assert_allclose(radius, np.roll(radius, 40), atol=1e-12)
        assert radius.min() == pytest.approx(5.0)
        assert radius.max() == pytest.approx(10.0)

    def test_should_raise_unknown_kind_when_kind_is_not_supported(self) -> None:
        with pytest.raises(UnknownKind, match="Unknown trajectory kind 'spiral'"):
            generate(TrajectorySpec(kind="spiral"))

    def test_should_raise_config_invalid_when_too_few_points(self) -> None:
        with pytest.raises(ConfigInvalid):
            generate(TrajectorySpec(kind=TRAJ_STAR, points=1))
