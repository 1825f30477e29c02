# -*- coding: utf-8 -*-
"""
Unit tests for seed derivation and random streams.
"""

import numpy as np

from snake_tracking.rng import derive_seed, make_generator, sklearn_seed, splitmix64, stream


class TestSeeds:
    """Tests for splitmix64, derive_seed and sklearn_seed."""

    def test_should_match_reference_output_when_state_is_zero(self) -> None:
        assert splitmix64(0) == 0xE220A8397B1DCDAF

    def test_should_derive_same_seed_when_labels_repeat(self) -> None:
        assert derive_seed(42, "plant", "star", 3, "pitch") == derive_seed(42, "plant", "star", 3, "pitch")

    def test_should_derive_distinct_seeds_when_any_label_differs(self) -> None:
        # Act
        seeds = {
            derive_seed(42, "plant", "star", 3, "pitch"),
            derive_seed(42, "plant", "star", 3, "yaw"),
            derive_seed(42, "plant", "star", 4, "pitch"),
            derive_seed(43, "plant", "star", 3, "pitch"),
            derive_seed(42, "star", "plant", 3, "pitch"),
        }

        # Assert
        assert len(seeds) == 5

    def test_should_stay_within_64_bits_when_master_is_negative(self) -> None:
        assert 0 <= derive_seed(-1, "mppi") < 2**64

    def test_should_fold_into_32_bits_when_passing_seed_to_scikit_learn(self) -> None:
        # Act
        folded = sklearn_seed(derive_seed(7, "centers"))

        # Assert
        assert 0 <= folded < 2**32
        assert sklearn_seed(5) == 5


class TestGenerators:
    """Tests for make_generator and stream."""

    def test_should_draw_identical_values_when_seed_is_repeated(self) -> None:
        np.testing.assert_array_equal(make_generator(9).standard_normal(8), make_generator(9).standard_normal(8))

    def test_should_match_derived_generator_when_using_stream_shorthand(self) -> None:
        # Act
        first = stream(3, "excite", 1).uniform(size=4)
        second = make_generator(derive_seed(3, "excite", 1)).uniform(size=4)

        # Assert
        np.testing.assert_array_equal(first, second)

    def test_should_draw_different_values_when_labels_differ(self) -> None:
        assert stream(3, "pitch").standard_normal() != stream(3, "yaw").standard_normal()
