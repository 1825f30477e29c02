# -*- coding: utf-8 -*-
"""
Unit tests for the MPPI controller.
"""

import dataclasses
from typing import Dict

import numpy as np
import pytest

from snake_tracking.constants import (
    DIVERGED_COST,
    DOF_PITCH,
    DOFS,
    ROLLOUT_PARALLEL,
    ROLLOUT_SEQUENTIAL,
    SAMPLING_RANDOM_WALK,
)
from snake_tracking.exceptions import DegenerateWeights, NonFinitePropagation
from snake_tracking.gmm_gmr import ground_truth
from snake_tracking.identifier import init_centers, make_identifier
from snake_tracking.models import CostWeights, DisturbanceConfig, MppiConfig, RbfBasis, RbfIdentifier
from snake_tracking.mppi_controller import (
    MppiController,
    control_weights,
    desired_window,
    optimal_control,
    rollout,
    sample_controls,
    shift_sequence,
    track,
)
from snake_tracking.plant_sim import GroundTruthMap, SnakePlant
from snake_tracking.rng import make_generator

# --- Test Data ---
TEST_SEED = 314
UNIT_WEIGHTS = CostWeights(stage_state_weight=1.0, control_weight=1.0, terminal_weight=1.0)


def _constant_identifier(gain: float) -> RbfIdentifier:
    """A one-basis identifier whose f_hat is `gain` everywhere in the region of interest."""
    basis = RbfBasis(centers=np.zeros((1, 2)), widths=np.array([1e6]))
    return RbfIdentifier(
        basis=basis,
        weights=np.array([gain]),
        covariance=np.eye(1),
        process_noise=np.zeros((1, 1)),
        measurement_noise=0.1,
    )


@pytest.fixture
def identifier() -> RbfIdentifier:
    return _constant_identifier(2.0)


@pytest.fixture
def cfg() -> MppiConfig:
    return MppiConfig(num_samples=16, horizon=5, temperature=0.5, control_noise_std=0.05)


class TestSampling:
    """Tests for sample_controls and shift_sequence."""

    def test_should_repeat_nominal_when_noise_is_zero(self, cfg: MppiConfig) -> None:
        # Arrange
        nominal = np.linspace(-0.2, 0.2, cfg.horizon)
        quiet = dataclasses.replace(cfg, control_noise_std=0.0)

        # Act
        samples = sample_controls(nominal, quiet, make_generator(TEST_SEED))

        # Assert
        assert samples.shape == (cfg.num_samples, cfg.horizon)
        np.testing.assert_array_equal(samples, np.tile(nominal, (cfg.num_samples, 1)))

    def test_should_match_configured_std_when_sampling_many_sequences(self) -> None:
        # Arrange
        big = MppiConfig(num_samples=2000, horizon=50, control_noise_std=0.005)

        # Act
        samples = sample_controls(np.zeros(big.horizon), big, make_generator(TEST_SEED))

        # Assert
        assert np.std(samples) == pytest.approx(0.005, rel=0.02)

    def test_should_clip_samples_when_nominal_sits_on_bound(self, cfg: MppiConfig) -> None:
        # Act
        samples = sample_controls(np.full(cfg.horizon, 1.5), cfg, make_generator(TEST_SEED))

        # Assert
        assert samples.max() <= 1.5

    def test_should_accumulate_noise_when_sampling_random_walk(self, cfg: MppiConfig) -> None:
        # Arrange
        walk = dataclasses.replace(cfg, sampling=SAMPLING_RANDOM_WALK)
        draws = make_generator(TEST_SEED).standard_normal((cfg.num_samples, cfg.horizon))

        # Act
        samples = sample_controls(np.zeros(cfg.horizon), walk, make_generator(TEST_SEED))

        # Assert
        np.testing.assert_allclose(samples, walk.control_noise_std * np.cumsum(draws, axis=1), rtol=1e-12)

    def test_should_shift_left_and_repeat_last_when_warm_starting(self) -> None:
        np.testing.assert_array_equal(shift_sequence(np.array([1.0, 2.0, 3.0])), [2.0, 3.0, 3.0])


class TestRollout:
    """Tests for rollout cost accumulation."""

    def test_should_cost_nothing_when_starting_at_target_with_zero_control(self, identifier: RbfIdentifier) -> None:
        # Act
        states, cost = rollout(4.0, np.zeros(5), identifier, 4.0, UNIT_WEIGHTS)

        # Assert
        np.testing.assert_array_equal(states, np.full(6, 4.0))
        assert cost == 0.0

    def test_should_add_stage_and_terminal_error_when_horizon_is_one(self, identifier: RbfIdentifier) -> None:
        # Act
        _, cost = rollout(0.0, np.zeros(1), identifier, 1.0, UNIT_WEIGHTS)

        # Assert
        assert cost == 2.0

    def test_should_propagate_through_identifier_when_control_is_applied(self, identifier: RbfIdentifier) -> None:
        # Act
        states, cost = rollout(0.0, np.array([0.5]), identifier, 1.0, UNIT_WEIGHTS)

        # Assert
        assert states[1] == pytest.approx(1.0)
        assert cost == pytest.approx(0.25)

    def test_should_hold_scalar_target_when_building_desired_window(self) -> None:
        np.testing.assert_array_equal(desired_window(2.5, 3), [2.5, 2.5, 2.5])

    def test_should_pad_with_last_point_when_preview_is_shorter_than_horizon(self) -> None:
        np.testing.assert_array_equal(desired_window(np.array([1.0, 2.0]), 4), [1.0, 2.0, 2.0, 2.0])

    def test_should_truncate_preview_when_longer_than_horizon(self) -> None:
        np.testing.assert_array_equal(desired_window(np.arange(10.0), 3), [0.0, 1.0, 2.0])

    def test_should_charge_each_step_against_its_own_target_when_previewing(
        self, identifier: RbfIdentifier
    ) -> None:
        # Act
        _, cost = rollout(0.0, np.zeros(3), identifier, np.array([1.0, 2.0]), UNIT_WEIGHTS)

        # Assert
        assert cost == pytest.approx(1.0 + 4.0 + 4.0 + 4.0)

    def test_should_land_on_map_position_when_nominal_map_explains_the_plant(self) -> None:
        # Arrange
        mapped = dataclasses.replace(_constant_identifier(0.0), nominal=GroundTruthMap(DOF_PITCH))
        controls = np.array([0.1, -0.2, 0.0])

        # Act
        states, _ = rollout(3.0, controls, mapped, 0.0, UNIT_WEIGHTS)

        # Assert
        expected = ground_truth(np.array([0.1, -0.2]), DOF_PITCH)
        np.testing.assert_allclose(states[1:3], expected, atol=1e-12)
        assert states[3] == states[2]

    def test_should_score_diverged_cost_when_rollout_blows_up(self) -> None:
        # Arrange
        exploding = _constant_identifier(1e200)

        # Act
        _, cost = rollout(0.0, np.full(4, 1.0), exploding, 0.0, UNIT_WEIGHTS)

        # Assert
        assert cost == DIVERGED_COST

    def test_should_raise_non_finite_propagation_when_state_is_nan(self, identifier: RbfIdentifier) -> None:
        with pytest.raises(NonFinitePropagation):
            rollout(float("nan"), np.zeros(3), identifier, 0.0, UNIT_WEIGHTS)


class TestWeights:
    """Tests for control_weights and optimal_control."""

    def test_should_weight_equally_when_costs_are_equal(self) -> None:
        np.testing.assert_array_equal(control_weights(np.full(4, 3.0), 0.01), np.ones(4))

    def test_should_decay_by_e_when_cost_gap_equals_temperature(self) -> None:
        np.testing.assert_allclose(control_weights(np.array([0.0, 0.5]), 0.5), [1.0, np.exp(-1.0)])

    def test_should_keep_normalized_weights_when_costs_are_shifted(self) -> None:
        # Arrange
        costs = np.array([0.3, 1.2, 0.9])

        # Act
        base = control_weights(costs, 0.7)
        shifted = control_weights(costs + 100.0, 0.7)

        # Assert
        np.testing.assert_allclose(base / base.sum(), shifted / shifted.sum(), rtol=1e-12)

    def test_should_return_shared_row_when_all_samples_coincide(self) -> None:
        # Arrange
        row = np.array([0.1, -0.2, 0.3])

        # Act
        control = optimal_control(np.tile(row, (5, 1)), np.array([1.0, 0.2, 0.0, 0.5, 0.1]))

        # Assert
        np.testing.assert_array_equal(control, row)

    def test_should_average_rows_when_weights_are_uniform(self) -> None:
        # Act
        control = optimal_control(np.array([[0.0, 1.0], [2.0, 3.0]]), np.ones(2))

        # Assert
        np.testing.assert_allclose(control, [1.0, 2.0])

    def test_should_raise_degenerate_weights_when_weights_sum_to_zero(self) -> None:
        with pytest.raises(DegenerateWeights):
            optimal_control(np.zeros((2, 3)), np.zeros(2))


class TestMppiController:
    """Tests for MppiController."""

    def test_should_evaluate_identically_when_sequential_or_parallel(
        self, cfg: MppiConfig, identifier: RbfIdentifier
    ) -> None:
        # Arrange
        samples = sample_controls(np.zeros(cfg.horizon), cfg, make_generator(TEST_SEED))
        sequential = MppiController(dataclasses.replace(cfg, rollout_mode=ROLLOUT_SEQUENTIAL), seed=TEST_SEED)
        parallel = MppiController(dataclasses.replace(cfg, rollout_mode=ROLLOUT_PARALLEL), seed=TEST_SEED)
        vectorized = MppiController(cfg, seed=TEST_SEED)

        # Act
        first = sequential.evaluate(1.0, samples, identifier, 3.0)
        second = parallel.evaluate(1.0, samples, identifier, 3.0)
        third = vectorized.evaluate(1.0, samples, identifier, 3.0)

        # Assert
        np.testing.assert_array_equal(first.costs, second.costs)
        np.testing.assert_array_equal(first.states, second.states)
        np.testing.assert_allclose(third.costs, first.costs, rtol=1e-12)

    def test_should_plan_identically_when_seed_and_step_repeat(
        self, cfg: MppiConfig, identifier: RbfIdentifier
    ) -> None:
        # Act
        first = MppiController(cfg, seed=TEST_SEED).plan(0.0, 1.0, identifier, step=3)
        second = MppiController(cfg, seed=TEST_SEED).plan(0.0, 1.0, identifier, step=3)

        # Assert
        np.testing.assert_array_equal(first, second)

    def test_should_warm_start_from_shifted_plan_when_planning(
        self, cfg: MppiConfig, identifier: RbfIdentifier
    ) -> None:
        # Arrange
        controller = MppiController(cfg, seed=TEST_SEED)

        # Act
        sequence = controller.plan(0.0, 1.0, identifier, step=0)

        # Assert
        np.testing.assert_array_equal(controller.nominal, shift_sequence(sequence))
        assert controller.last_batch is not None
        assert controller.last_batch.costs.shape == (cfg.num_samples,)

    def test_should_push_toward_target_when_target_is_above_state(
        self, cfg: MppiConfig, identifier: RbfIdentifier
    ) -> None:
        # Arrange
        controller = MppiController(dataclasses.replace(cfg, horizon=1), seed=TEST_SEED)

        # Act
        sequence = controller.plan(0.0, 1.0, identifier, step=0)

        # Assert
        assert sequence[0] > 0.0

    def test_should_restore_zero_nominal_when_reset(self, cfg: MppiConfig, identifier: RbfIdentifier) -> None:
        # Arrange
        controller = MppiController(cfg, seed=TEST_SEED)
        controller.plan(0.0, 1.0, identifier, step=0)

        # Act
        controller.reset()

        # Assert
        np.testing.assert_array_equal(controller.nominal, np.zeros(cfg.horizon))
        assert controller.last_batch is None


class TestTrack:
    """Closed-loop MPPI tracking on the disturbance-free plant."""

    @pytest.fixture
    def plant(self) -> SnakePlant:
        maps = {dof: GroundTruthMap(dof) for dof in DOFS}
        return SnakePlant.create(maps, DisturbanceConfig.disturbance_free(), TEST_SEED, "settle", 0)

    @pytest.fixture
    def identifiers(self) -> Dict[str, RbfIdentifier]:
        samples = np.column_stack([np.linspace(-40.0, 40.0, 60), np.linspace(-1.0, 1.0, 60)])
        basis = init_centers(samples, 6, seed=TEST_SEED)
        return {dof: make_identifier(basis, seed=TEST_SEED, nominal=GroundTruthMap(dof)) for dof in DOFS}

    def test_should_settle_on_constant_reference_when_tracking(
        self, plant: SnakePlant, identifiers: Dict[str, RbfIdentifier]
    ) -> None:
        # Arrange
        reference = np.full((100, 2), 5.0)

        # Act
        tracking_log = track(plant, identifiers, reference, MppiConfig(), seed=TEST_SEED)

        # Assert
        for dof in DOFS:
            tail = tracking_log.series("measured", dof)[50:]
            assert np.all(np.isfinite(tail))
            assert abs(np.mean(tail) - 5.0) < 0.5
            assert np.sqrt(np.mean((tail - 5.0) ** 2)) < 1.5

    def test_should_stay_near_rest_when_one_step_horizon_starts_on_target(
        self, plant: SnakePlant, identifiers: Dict[str, RbfIdentifier]
    ) -> None:
        # Arrange
        cfg = MppiConfig(horizon=1)

        # Act
        tracking_log = track(plant, identifiers, np.zeros((1, 2)), cfg, seed=TEST_SEED)

        # Assert
        for dof in DOFS:
            assert abs(tracking_log.series("control", dof)[0]) <= 3.0 * cfg.control_noise_std
            assert abs(tracking_log.series("measured", dof)[0]) < 1.0
