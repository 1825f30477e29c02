# -*- coding: utf-8 -*-
"""
Model predictive path integral control on the RBF-estimated dynamics.

Each control step samples M perturbed control sequences around a nominal
sequence, rolls them out through x+ = x + f_hat(x, u) u over the horizon,
weights them by exp(-(J - min J) / lambda) and returns the weighted average.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .constants import (
    CONTROLLER_MPPI,
    DIVERGED_COST,
    DOFS,
    OUTLIER_GATE_SIGMAS,
    ROLLOUT_PARALLEL,
    ROLLOUT_SEQUENTIAL,
    SAMPLING_RANDOM_WALK,
    SNAPSHOT_EVERY,
)
from .exceptions import DegenerateWeights, NonFinitePropagation
from .identifier import basis_matrix
from .interfaces import Controller
from .models import CostWeights, MppiConfig, RbfIdentifier, RolloutBatch, TrackingLog
from .plant_sim import SnakePlant, map_displacements
from .rng import derive_seed, make_generator
from .tracking_service import TrackingService

log = logging.getLogger(__name__)


def shift_sequence(sequence: np.ndarray) -> np.ndarray:
    """Receding-horizon warm start: drop the first element and repeat the last."""
    sequence = np.asarray(sequence, dtype=float)
    return np.append(sequence[1:], sequence[-1])


def sample_controls(nominal: np.ndarray, cfg: MppiConfig, rng: np.random.Generator) -> np.ndarray:
    """
    Draws the (M, H) matrix of sampled control sequences, clipped to the control bounds.

    Row i is nominal + sigma_u * eps_i with eps_i the i-th block of H standard
    normals from `rng`. In random-walk mode the draws are accumulated along the
    horizon, so consecutive sampled controls differ by sigma_u * N(0, 1).
    """
    nominal = np.asarray(nominal, dtype=float)
    noise = rng.standard_normal((cfg.num_samples, nominal.shape[0]))
    if cfg.sampling == SAMPLING_RANDOM_WALK:
        noise = np.cumsum(noise, axis=1)
    samples = nominal[None, :] + cfg.control_noise_std * noise
    return np.clip(samples, cfg.control_bounds[0], cfg.control_bounds[1])


def desired_window(x_desired: Union[float, np.ndarray], horizon: int) -> np.ndarray:
    """Per-step targets over the horizon: a scalar is held, a shorter preview is padded with its last point."""
    targets = np.atleast_1d(np.asarray(x_desired, dtype=float))
    if targets.shape[0] >= horizon:
        return targets[:horizon]
    return np.concatenate([targets, np.full(horizon - targets.shape[0], targets[-1])])


def rollout_batch(
    x0: float,
    controls: np.ndarray,
    identifier: RbfIdentifier,
    x_desired: Union[float, np.ndarray],
    weights: CostWeights,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Propagates B control sequences through the identifier and accumulates their path costs.

    The stage cost uses the post-step state: J = sum_k [Q (x_{k+1} - x_d,k)^2 + R u_k^2]
    + Q_H (x_H - x_d,H-1)^2, with x_d,k from desired_window. A nominal map on the
    identifier contributes its displacement, evaluated for the whole batch up
    front. Costs of diverging rollouts come back non-finite.

    Returns:
        States of shape (B, H+1) and raw costs of shape (B,).
    """
    controls = np.atleast_2d(np.asarray(controls, dtype=float))
    n_batch, horizon = controls.shape
    targets = desired_window(x_desired, horizon)
    nominal = identifier.nominal
    positions = nominal.positions(controls) if nominal is not None else None
    states = np.empty((n_batch, horizon + 1))
    states[:, 0] = x0
    costs = np.zeros(n_batch)
    x = states[:, 0].copy()
    error = x - targets[0]
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(horizon):
            u = controls[:, k]
            increment = (basis_matrix(x, u, identifier.basis) @ identifier.weights) * u
            if nominal is not None:
                increment = increment + map_displacements(x, u, positions[:, k], nominal)
            x = x + increment
            states[:, k + 1] = x
            error = x - targets[k]
            costs = costs + (weights.stage_state_weight * error * error + weights.control_weight * u * u)
        costs = costs + weights.terminal_weight * error * error
    return states, costs


def _bounded_costs(raw_costs: np.ndarray) -> np.ndarray:
    return np.where(np.isfinite(raw_costs), raw_costs, DIVERGED_COST)


def rollout(
    x0: float,
    controls: np.ndarray,
    identifier: RbfIdentifier,
    x_desired: Union[float, np.ndarray],
    weights: CostWeights,
) -> Tuple[np.ndarray, float]:
    """
    Rolls out a single control sequence; a diverging rollout is scored DIVERGED_COST.

    Raises:
        NonFinitePropagation: If the initial or desired state is not finite.
    """
    if not (np.isfinite(x0) and np.all(np.isfinite(x_desired))):
        raise NonFinitePropagation(f"Cannot roll out from x0={x0!r} towards x_desired={x_desired!r}")
    states, raw = rollout_batch(x0, np.asarray(controls, dtype=float)[None, :], identifier, x_desired, weights)
    return states[0], float(_bounded_costs(raw)[0])


def control_weights(costs: np.ndarray, temperature: float) -> np.ndarray:
    """rho_i = exp(-(J_i - min J) / lambda); the shift leaves normalized weights unchanged."""
    costs = np.asarray(costs, dtype=float)
    return np.exp(-(costs - costs.min()) / temperature)


def optimal_control(samples: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """
    Column-wise weighted average sum_i rho_i u_i / sum_i rho_i of the sampled sequences.

    Evaluated as u_0 + sum_i w_i (u_i - u_0) with normalized w, which returns
    the shared row exactly when all samples coincide.

    Raises:
        DegenerateWeights: If the weights do not sum to a positive finite value.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    weights = np.asarray(weights, dtype=float)
    total = float(np.sum(weights))
    if not (np.isfinite(total) and total > 0):
        raise DegenerateWeights(f"Control weights sum to {total!r}")
    normalized = weights / total
    base = samples[0]
    return base + normalized @ (samples - base[None, :])


class MppiController(Controller):
    """MPPI for one DoF with a shift-left warm start; the initial nominal sequence is all zeros."""

    tag = CONTROLLER_MPPI

    def __init__(self, cfg: MppiConfig, seed: int):
        cfg.validate()
        self.cfg = cfg
        self.seed = seed
        self._nominal = np.zeros(cfg.horizon)
        self.last_batch: Optional[RolloutBatch] = None

    @property
    def nominal(self) -> np.ndarray:
        return self._nominal.copy()

    def reset(self) -> None:
        self._nominal = np.zeros(self.cfg.horizon)
        self.last_batch = None

    def evaluate(
        self, x_current: float, samples: np.ndarray, identifier: RbfIdentifier, x_desired: Union[float, np.ndarray]
    ) -> RolloutBatch:
        """Rolls out every sampled row against one identifier snapshot, in the configured mode."""
        weights = self.cfg.cost_weights
        if self.cfg.rollout_mode == ROLLOUT_SEQUENTIAL:
            results = [rollout(x_current, row, identifier, x_desired, weights) for row in samples]
        elif self.cfg.rollout_mode == ROLLOUT_PARALLEL:
            with ThreadPoolExecutor(max_workers=self.cfg.rollout_workers) as pool:
                results = list(pool.map(lambda row: rollout(x_current, row, identifier, x_desired, weights), samples))
        else:
            if not (np.isfinite(x_current) and np.all(np.isfinite(x_desired))):
                raise NonFinitePropagation(f"Cannot roll out from x0={x_current!r} towards {x_desired!r}")
            states, raw = rollout_batch(x_current, samples, identifier, x_desired, weights)
            return RolloutBatch(controls=samples, states=states, costs=_bounded_costs(raw))
        states = np.stack([result[0] for result in results])
        costs = np.array([result[1] for result in results])
        return RolloutBatch(controls=samples, states=states, costs=costs)

    def plan(
        self, x_current: float, x_desired: Union[float, np.ndarray], identifier: RbfIdentifier, step: int
    ) -> np.ndarray:
        rng = make_generator(derive_seed(self.seed, step))
        samples = sample_controls(self._nominal, self.cfg, rng)
        batch = self.evaluate(x_current, samples, identifier, x_desired)
        rho = control_weights(batch.costs, self.cfg.temperature)
        sequence = optimal_control(samples, rho)
        self._nominal = shift_sequence(sequence)
        self.last_batch = batch
        return sequence


def track(
    plant: SnakePlant,
    identifiers: Dict[str, RbfIdentifier],
    reference: np.ndarray,
    cfg: MppiConfig,
    seed: int,
    trajectory: str = "",
    repeat: int = 0,
    outlier_gate: Optional[float] = OUTLIER_GATE_SIGMAS,
    snapshot_every: int = SNAPSHOT_EVERY,
    preview: bool = True,
) -> TrackingLog:
    """
    Tracks a (T, 2) pitch/yaw reference with one MPPI controller per DoF.

    Each DoF's sampling stream is keyed on (seed, dof, step index).
    """
    controllers = {dof: MppiController(cfg, seed=derive_seed(seed, dof)) for dof in DOFS}
    service = TrackingService(
        plant=plant,
        identifiers=identifiers,
        controllers=controllers,
        outlier_gate=outlier_gate,
        snapshot_every=snapshot_every,
        preview=preview,
    )
    return service.track(reference, controller=CONTROLLER_MPPI, trajectory=trajectory, repeat=repeat, seed=seed)
