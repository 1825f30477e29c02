# -*- coding: utf-8 -*-
"""
Simulated snake robot: x_{k+1} = x_k + f(x_k, u_k) u_k + load(x_k) + w_k, z_k = H x_k + v_k.

The incremental form is reconstructed from a position map (GMR or the analytic
ground truth) so that one step with control u lands on position(u).
"""
import logging
from typing import Dict, Mapping

import numpy as np

from .constants import (
    CONTROL_EPSILON_RAD,
    DOFS,
    GROUND_TRUTH_A_DEG,
    GROUND_TRUTH_B,
    GROUND_TRUTH_C_DEG_PER_RAD,
    STATE_CLAMP_DEG,
)
from .exceptions import NonFiniteControl
from .gmm_gmr import gmr_condition, gmr_curve, gmr_slope, ground_truth
from .interfaces import PositionMap
from .models import DisturbanceConfig, GmmModel, PlantState
from .rng import stream

log = logging.getLogger(__name__)


class GmrPositionMap(PositionMap):
    """Position map given by the conditional mean of a fitted GMM."""

    def __init__(self, model: GmmModel):
        self.model = model

    def position(self, u: float) -> float:
        mean, _ = gmr_condition(self.model, u)
        return mean

    def slope(self, u: float) -> float:
        return gmr_slope(self.model, u)

    def positions(self, us: np.ndarray) -> np.ndarray:
        us = np.asarray(us, dtype=float)
        mean, _ = gmr_curve(self.model, us.ravel())
        return mean.reshape(us.shape)


class GroundTruthMap(PositionMap):
    """Analytic generator g(u) = A tanh(B u) + C u of one DoF."""

    def __init__(self, dof: str):
        self.dof = dof

    def position(self, u: float) -> float:
        return float(ground_truth(u, self.dof))

    def slope(self, u: float) -> float:
        b = GROUND_TRUTH_B[self.dof]
        return float(GROUND_TRUTH_A_DEG * b / np.cosh(b * u) ** 2 + GROUND_TRUTH_C_DEG_PER_RAD)

    def positions(self, us: np.ndarray) -> np.ndarray:
        return np.asarray(ground_truth(us, self.dof), dtype=float)


def true_increment(x: float, u: float, position_map: PositionMap) -> float:
    """
    f(x, u) such that x + f u = position(u).

    Below |u| < CONTROL_EPSILON_RAD the quotient is replaced by its u -> 0 limit, the map slope.
    """
    if abs(u) < CONTROL_EPSILON_RAD:
        return position_map.slope(u)
    return (position_map.position(u) - x) / u


def map_displacements(xs: np.ndarray, us: np.ndarray, positions: np.ndarray, position_map: PositionMap) -> np.ndarray:
    """
    Batched true_increment(x, u) * u, given position(u) for every u.

    Away from u = 0 this is position(u) - x; the few entries below
    CONTROL_EPSILON_RAD use the slope limit like the scalar version.
    """
    displacement = np.asarray(positions, dtype=float) - xs
    small = np.abs(us) < CONTROL_EPSILON_RAD
    if np.any(small):
        displacement[small] = np.array([position_map.slope(u) for u in us[small]]) * us[small]
    return displacement


def environmental_load(x: float, cfg: DisturbanceConfig) -> float:
    """gain * x * sin(frequency * x), x in deg, sine argument taken as rad."""
    return cfg.load_gain * x * np.sin(cfg.load_frequency * x)


def step(
    state: PlantState, u: float, rng: np.random.Generator, cfg: DisturbanceConfig, position_map: PositionMap
) -> PlantState:
    """
    Advances one DoF by one control step.

    One standard normal is drawn from `rng` every call, so the stream stays
    aligned whatever the noise scale.

    Raises:
        NonFiniteControl: If u is NaN or infinite.
    """
    if not np.isfinite(u):
        raise NonFiniteControl(f"Control {u!r} is not finite")
    x = state.x
    noise_std = cfg.process_scale * abs(x)
    w = noise_std * rng.standard_normal()
    x_next = x + true_increment(x, u, position_map) * u + environmental_load(x, cfg) + w
    return PlantState(x=float(np.clip(x_next, -STATE_CLAMP_DEG, STATE_CLAMP_DEG)), u_prev=float(u))


def observe(state: PlantState, rng: np.random.Generator, cfg: DisturbanceConfig) -> float:
    """Measurement z = H x + v, v ~ N(0, measurement_noise_std^2)."""
    v = cfg.measurement_noise_std * rng.standard_normal()
    return float(cfg.observation_gain * state.x + v)


class DofPlant:
    """One decoupled DoF: its state, position map and its own process and measurement streams."""

    def __init__(
        self,
        position_map: PositionMap,
        cfg: DisturbanceConfig,
        process_rng: np.random.Generator,
        measurement_rng: np.random.Generator,
    ):
        if not isinstance(position_map, PositionMap):
            raise TypeError("position_map must be an instance of PositionMap")
        self.position_map = position_map
        self.cfg = cfg
        self.process_rng = process_rng
        self.measurement_rng = measurement_rng
        self.state = PlantState(x=position_map.position(0.0), u_prev=0.0)

    def apply(self, u: float) -> PlantState:
        self.state = step(self.state, u, self.process_rng, self.cfg, self.position_map)
        return self.state

    def measure(self) -> float:
        return observe(self.state, self.measurement_rng, self.cfg)


class SnakePlant:
    """The pitch and yaw plants; stepping one DoF never touches the other."""

    def __init__(self, dofs: Mapping[str, DofPlant]):
        self.dofs: Dict[str, DofPlant] = dict(dofs)

    @classmethod
    def create(
        cls,
        position_maps: Mapping[str, PositionMap],
        cfg: DisturbanceConfig,
        master_seed: int,
        trajectory: str,
        repeat: int,
    ) -> "SnakePlant":
        """Builds both DoFs with streams keyed on (trajectory, repeat, dof)."""
        dofs = {
            dof: DofPlant(
                position_maps[dof],
                cfg,
                process_rng=stream(master_seed, "plant-process", trajectory, repeat, dof),
                measurement_rng=stream(master_seed, "plant-measurement", trajectory, repeat, dof),
            )
            for dof in DOFS
        }
        log.debug(f"Plant created for trajectory={trajectory} repeat={repeat}")
        return cls(dofs)

    def apply(self, dof: str, u: float) -> PlantState:
        return self.dofs[dof].apply(u)

    def measure(self, dof: str) -> float:
        return self.dofs[dof].measure()

    def state(self, dof: str) -> PlantState:
        return self.dofs[dof].state
