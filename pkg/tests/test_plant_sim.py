# -*- coding: utf-8 -*-
"""
Unit tests for the simulated snake plant.
"""

from unittest.mock import MagicMock

import numpy as np
import pytest

from snake_tracking.constants import DOF_PITCH, DOF_YAW, STATE_CLAMP_DEG
from snake_tracking.exceptions import NonFiniteControl
from snake_tracking.gmm_gmr import ground_truth
from snake_tracking.interfaces import PositionMap
from snake_tracking.models import DisturbanceConfig, GaussianComponent, GmmModel, PlantState
from snake_tracking.plant_sim import (
    DofPlant,
    GmrPositionMap,
    GroundTruthMap,
    SnakePlant,
    environmental_load,
    map_displacements,
    observe,
    step,
    true_increment,
)
from snake_tracking.rng import make_generator

# --- Test Data ---
TEST_SEED = 1234
QUIET = DisturbanceConfig.disturbance_free()


@pytest.fixture
def pitch_map() -> GroundTruthMap:
    return GroundTruthMap(DOF_PITCH)


class TestPositionMaps:
    """Tests for the GMR and analytic position maps."""

    def test_should_match_finite_difference_when_computing_ground_truth_slope(self, pitch_map: GroundTruthMap) -> None:
        # Arrange
        h = 1e-6

        for u in (-1.2, 0.0, 0.4):
            # Act
            slope = pitch_map.slope(u)

            # Assert
            numeric = (pitch_map.position(u + h) - pitch_map.position(u - h)) / (2 * h)
            assert slope == pytest.approx(numeric, rel=1e-6)

    def test_should_follow_linear_regression_when_gmr_map_has_one_component(self) -> None:
        # Arrange
        component = GaussianComponent(prior=1.0, mean=np.zeros(2), covariance=np.array([[1.0, 2.0], [2.0, 5.0]]))
        position_map = GmrPositionMap(GmmModel(components=(component,)))

        # Act / Assert
        assert position_map.position(0.5) == pytest.approx(1.0, abs=1e-12)
        assert position_map.slope(0.5) == pytest.approx(2.0, abs=1e-12)

    def test_should_batch_like_scalar_calls_when_evaluating_positions(self, pitch_map: GroundTruthMap) -> None:
        # Arrange
        component = GaussianComponent(prior=1.0, mean=np.zeros(2), covariance=np.array([[1.0, 2.0], [2.0, 5.0]]))
        us = np.array([[-0.5, 0.0], [0.25, 1.0]])

        for position_map in (pitch_map, GmrPositionMap(GmmModel(components=(component,)))):
            # Act
            batched = position_map.positions(us)

            # Assert
            assert batched.shape == us.shape
            expected = np.array([[position_map.position(u) for u in row] for row in us])
            np.testing.assert_allclose(batched, expected, atol=1e-12)

    def test_should_loop_over_position_when_subclass_has_no_batched_version(self) -> None:
        # Arrange
        class Doubling(PositionMap):
            def position(self, u: float) -> float:
                return 2.0 * u

            def slope(self, u: float) -> float:
                return 2.0

        # Act
        batched = Doubling().positions(np.array([[1.0, -3.0]]))

        # Assert
        np.testing.assert_array_equal(batched, [[2.0, -6.0]])


class TestTrueIncrement:
    """Tests for true_increment."""

    def test_should_return_map_slope_when_control_is_zero(self, pitch_map: GroundTruthMap) -> None:
        # Act
        f = true_increment(7.0, 0.0, pitch_map)

        # Assert
        assert f == pytest.approx(35.0 * 1.2 + 3.0)

    def test_should_leave_state_unchanged_when_state_is_on_the_position_map(self, pitch_map: GroundTruthMap) -> None:
        # Arrange
        u = 0.3
        x = pitch_map.position(u)

        # Act
        f = true_increment(x, u, pitch_map)

        # Assert
        assert x + f * u == pytest.approx(x, abs=1e-12)

    def test_should_equal_generator_quotient_when_starting_from_zero(self, pitch_map: GroundTruthMap) -> None:
        # Act
        f = true_increment(0.0, 0.5, pitch_map)

        # Assert
        expected = (35.0 * np.tanh(1.2 * 0.5) + 3.0 * 0.5) / 0.5
        assert f == pytest.approx(expected, rel=1e-12)

    def test_should_match_scalar_increment_when_computing_map_displacements(self, pitch_map: GroundTruthMap) -> None:
        # Arrange
        xs = np.array([1.0, -4.0, 2.0])
        us = np.array([0.3, 5e-5, -0.2])

        # Act
        displacement = map_displacements(xs, us, pitch_map.positions(us), pitch_map)

        # Assert
        expected = [true_increment(x, u, pitch_map) * u for x, u in zip(xs, us)]
        np.testing.assert_allclose(displacement, expected, atol=1e-12)
        assert displacement[1] == pytest.approx(pitch_map.slope(5e-5) * 5e-5)


class TestStep:
    """Tests for step, environmental_load and observe."""

    def test_should_take_purely_nominal_step_when_state_is_zero(self, pitch_map: GroundTruthMap) -> None:
        # Arrange
        cfg = DisturbanceConfig()
        rng = make_generator(TEST_SEED)

        # Act
        next_state = step(PlantState(x=0.0), 0.4, rng, cfg, pitch_map)

        # Assert
        assert next_state.x == pytest.approx(float(ground_truth(0.4, DOF_PITCH)), abs=1e-12)
        assert next_state.u_prev == 0.4

    def test_should_equal_nominal_increment_exactly_when_disturbance_free(self, pitch_map: GroundTruthMap) -> None:
        # Arrange
        x, u = 4.0, -0.2

        # Act
        next_state = step(PlantState(x=x), u, make_generator(TEST_SEED), QUIET, pitch_map)

        # Assert
        assert next_state.x == x + true_increment(x, u, pitch_map) * u

    def test_should_apply_sinusoidal_load_when_state_is_five_degrees(self) -> None:
        # Act
        load = environmental_load(5.0, DisturbanceConfig())

        # Assert
        assert load == pytest.approx(0.03 * 5.0 * np.sin(50.0), rel=1e-12)

    def test_should_converge_to_position_map_when_control_is_constant_and_disturbance_free(
        self, pitch_map: GroundTruthMap
    ) -> None:
        # Arrange
        state = PlantState(x=-3.0)
        rng = make_generator(TEST_SEED)

        # Act
        for _ in range(5):
            state = step(state, 0.3, rng, QUIET, pitch_map)

        # Assert
        assert state.x == pytest.approx(pitch_map.position(0.3), abs=1e-9)

    def test_should_produce_identical_states_when_seed_is_repeated(self, pitch_map: GroundTruthMap) -> None:
        # Arrange
        cfg = DisturbanceConfig()
        state = PlantState(x=8.0)

        # Act
        first = step(state, 0.1, make_generator(TEST_SEED), cfg, pitch_map)
        second = step(state, 0.1, make_generator(TEST_SEED), cfg, pitch_map)

        # Assert
        assert first == second

    def test_should_clamp_state_when_map_drives_it_beyond_mechanical_limit(self) -> None:
        # Arrange
        position_map = MagicMock(spec=PositionMap)
        position_map.position.return_value = 500.0

        # Act
        next_state = step(PlantState(x=0.0), 1.0, make_generator(TEST_SEED), QUIET, position_map)

        # Assert
        assert next_state.x == STATE_CLAMP_DEG

    def test_should_raise_non_finite_control_when_control_is_nan(self, pitch_map: GroundTruthMap) -> None:
        with pytest.raises(NonFiniteControl):
            step(PlantState(x=0.0), float("nan"), make_generator(TEST_SEED), QUIET, pitch_map)

    def test_should_return_true_state_when_measurement_noise_is_zero(self) -> None:
        # Act
        z = observe(PlantState(x=12.5), make_generator(TEST_SEED), QUIET)

        # Assert
        assert z == 12.5

    def test_should_add_first_scaled_draw_when_measuring_with_noise(self) -> None:
        # Arrange
        cfg = DisturbanceConfig(measurement_noise_std=0.3)
        expected = 10.0 + 0.3 * make_generator(TEST_SEED).standard_normal()

        # Act
        z = observe(PlantState(x=10.0), make_generator(TEST_SEED), cfg)

        # Assert
        assert z == expected

    def test_should_match_configured_std_when_observing_many_times(self) -> None:
        # Arrange
        cfg = DisturbanceConfig(measurement_noise_std=0.1)
        rng = make_generator(TEST_SEED)

        # Act
        samples = np.array([observe(PlantState(x=0.0), rng, cfg) for _ in range(100_000)])

        # Assert
        assert np.std(samples) == pytest.approx(0.1, rel=0.02)


class TestSnakePlant:
    """Tests for DofPlant and SnakePlant."""

    def test_should_start_at_rest_position_when_created(self, pitch_map: GroundTruthMap) -> None:
        # Act
        plant = SnakePlant.create({DOF_PITCH: pitch_map, DOF_YAW: GroundTruthMap(DOF_YAW)}, QUIET, TEST_SEED, "star", 0)

        # Assert
        assert plant.state(DOF_PITCH).x == 0.0
        assert plant.state(DOF_YAW).x == 0.0

    def test_should_leave_yaw_untouched_when_stepping_pitch(self, pitch_map: GroundTruthMap) -> None:
        # Arrange
        plant = SnakePlant.create(
            {DOF_PITCH: pitch_map, DOF_YAW: GroundTruthMap(DOF_YAW)}, DisturbanceConfig(), TEST_SEED, "star", 0
        )
        yaw_before = plant.state(DOF_YAW)

        # Act
        plant.apply(DOF_PITCH, 0.5)

        # Assert
        assert plant.state(DOF_YAW) == yaw_before
        assert plant.state(DOF_PITCH).x != 0.0

    def test_should_draw_identical_noise_when_plants_share_seed_keys(self, pitch_map: GroundTruthMap) -> None:
        # Arrange
        maps = {DOF_PITCH: pitch_map, DOF_YAW: GroundTruthMap(DOF_YAW)}
        first = SnakePlant.create(maps, DisturbanceConfig(), TEST_SEED, "oval_horizontal", 2)
        second = SnakePlant.create(maps, DisturbanceConfig(), TEST_SEED, "oval_horizontal", 2)

        # Act
        for u in (0.1, 0.2, -0.1):
            first.apply(DOF_PITCH, u)
            second.apply(DOF_PITCH, u)

        # Assert
        assert first.state(DOF_PITCH) == second.state(DOF_PITCH)
        assert first.measure(DOF_PITCH) == second.measure(DOF_PITCH)

    def test_should_raise_type_error_when_position_map_is_invalid(self) -> None:
        with pytest.raises(TypeError, match="position_map must be an instance of PositionMap"):
            DofPlant("not a map", QUIET, make_generator(0), make_generator(1))  # type: ignore[arg-type]
