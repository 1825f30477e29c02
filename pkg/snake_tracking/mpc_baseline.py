# -*- coding: utf-8 -*-
"""
Conventional nonlinear MPC baseline: deterministic single-shooting gradient descent.

Minimizes the same finite-horizon cost as MPPI over the H-length control
sequence. Gradients are central finite differences evaluated as one batch of
2H perturbed rollouts; steps are projected onto the control bounds and
accepted by Armijo backtracking.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .constants import CONTROLLER_MPC, DOFS, MPC_ARMIJO_C, MPC_MIN_STEP, OUTLIER_GATE_SIGMAS, SNAPSHOT_EVERY
from .exceptions import NonFiniteCost
from .interfaces import Controller
from .models import MpcConfig, RbfIdentifier, TrackingLog
from .mppi_controller import rollout_batch, shift_sequence
from .plant_sim import SnakePlant
from .tracking_service import TrackingService

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MpcSolution:
    """
    Result of one solver call.

    Attributes:
        controls: Best control sequence found, length H (rad).
        cost: Its cost.
        iterations: Gradient iterations performed.
        converged: False when the iteration budget ran out first.
        cost_trace: Cost after the initial guess and after every accepted step.
        step_length: Step length the next solve can start from.
    """

    controls: np.ndarray
    cost: float
    iterations: int
    converged: bool
    cost_trace: Tuple[float, ...]
    step_length: float = 1.0


def sequence_cost(
    x0: float, controls: np.ndarray, identifier: RbfIdentifier, x_desired: Union[float, np.ndarray], cfg: MpcConfig
) -> float:
    """Deterministic path cost of one control sequence (no noise)."""
    _, costs = rollout_batch(x0, np.asarray(controls, dtype=float)[None, :], identifier, x_desired, cfg.cost_weights)
    return float(costs[0])


def finite_difference_gradient(
    x0: float, controls: np.ndarray, identifier: RbfIdentifier, x_desired: Union[float, np.ndarray], cfg: MpcConfig
) -> np.ndarray:
    """Central differences (J(u + h e_i) - J(u - h e_i)) / 2h, all 2H rollouts in one batch."""
    controls = np.asarray(controls, dtype=float)
    h = cfg.gradient_step
    offsets = h * np.eye(controls.shape[0])
    perturbed = np.vstack([controls[None, :] + offsets, controls[None, :] - offsets])
    _, costs = rollout_batch(x0, perturbed, identifier, x_desired, cfg.cost_weights)
    horizon = controls.shape[0]
    return (costs[:horizon] - costs[horizon:]) / (2.0 * h)


def optimize(
    x0: float,
    x_desired: Union[float, np.ndarray],
    identifier: RbfIdentifier,
    cfg: MpcConfig,
    initial: Optional[np.ndarray] = None,
    initial_step: float = 1.0,
) -> MpcSolution:
    """
    Projected gradient descent with Armijo backtracking.

    The step length starts at `initial_step`, carries over between iterations
    and is doubled after each accepted step. Stops when the projected gradient norm drops below
    convergence_tol, when no step length down to MPC_MIN_STEP decreases the
    cost, or when max_solver_iters is reached (best-so-far is returned).

    Raises:
        NonFiniteCost: If the inputs, the current cost or its gradient are not finite.
    """
    if not (np.isfinite(x0) and np.all(np.isfinite(x_desired))):
        raise NonFiniteCost(f"Cannot optimize from x0={x0!r} towards x_desired={x_desired!r}")
    lower, upper = cfg.control_bounds
    controls = np.zeros(cfg.horizon) if initial is None else np.asarray(initial, dtype=float).copy()
    controls = np.clip(controls, lower, upper)

    cost = sequence_cost(x0, controls, identifier, x_desired, cfg)
    if not np.isfinite(cost):
        raise NonFiniteCost(f"Initial MPC cost is {cost!r} from x0={x0!r}")
    trace = [cost]
    step_length = initial_step
    converged = False
    iterations = 0

    for iterations in range(1, cfg.max_solver_iters + 1):
        gradient = finite_difference_gradient(x0, controls, identifier, x_desired, cfg)
        if not np.all(np.isfinite(gradient)):
            raise NonFiniteCost(f"Finite-difference gradient is not finite at iteration {iterations}")
        projected = controls - np.clip(controls - gradient, lower, upper)
        if np.linalg.norm(projected) < cfg.convergence_tol:
            converged = True
            break

        accepted = False
        while step_length >= MPC_MIN_STEP:
            candidate = np.clip(controls - step_length * gradient, lower, upper)
            candidate_cost = sequence_cost(x0, candidate, identifier, x_desired, cfg)
            sufficient = cost + MPC_ARMIJO_C * float(gradient @ (candidate - controls))
            if np.isfinite(candidate_cost) and candidate_cost <= sufficient:
                controls, cost = candidate, candidate_cost
                trace.append(cost)
                step_length *= 2.0
                accepted = True
                break
            step_length *= 0.5
        if not accepted:
            converged = True
            break
    else:
        log.debug(f"MPC solver exhausted {cfg.max_solver_iters} iterations at cost {cost:.6g}")

    return MpcSolution(
        controls=controls,
        cost=cost,
        iterations=iterations,
        converged=converged,
        cost_trace=tuple(trace),
        step_length=step_length if step_length >= MPC_MIN_STEP else 1.0,
    )


def solve(
    x0: float,
    x_desired: Union[float, np.ndarray],
    identifier: RbfIdentifier,
    cfg: MpcConfig,
    initial: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Returns the optimized control sequence of length H."""
    return optimize(x0, x_desired, identifier, cfg, initial=initial).controls


class MpcController(Controller):
    """
    Gradient-based MPC for one DoF, warm-started from its shifted previous solution.

    The line-search step length also carries over from one control step to the next.
    """

    tag = CONTROLLER_MPC

    def __init__(self, cfg: MpcConfig):
        cfg.validate()
        self.cfg = cfg
        self._warm_start = np.zeros(cfg.horizon)
        self._step_length = 1.0
        self.last_solution: Optional[MpcSolution] = None

    def reset(self) -> None:
        self._warm_start = np.zeros(self.cfg.horizon)
        self._step_length = 1.0
        self.last_solution = None

    def plan(
        self, x_current: float, x_desired: Union[float, np.ndarray], identifier: RbfIdentifier, step: int
    ) -> np.ndarray:
        solution = optimize(
            x_current, x_desired, identifier, self.cfg, initial=self._warm_start, initial_step=self._step_length
        )
        self._warm_start = shift_sequence(solution.controls)
        self._step_length = solution.step_length
        self.last_solution = solution
        return solution.controls


def track_mpc(
    plant: SnakePlant,
    identifiers: Dict[str, RbfIdentifier],
    reference: np.ndarray,
    cfg: MpcConfig,
    seed: int = 0,
    trajectory: str = "",
    repeat: int = 0,
    outlier_gate: Optional[float] = OUTLIER_GATE_SIGMAS,
    snapshot_every: int = SNAPSHOT_EVERY,
    preview: bool = True,
) -> TrackingLog:
    """Tracks a (T, 2) pitch/yaw reference with one MPC per DoF; `seed` is only recorded in the log."""
    controllers = {dof: MpcController(cfg) for dof in DOFS}
    service = TrackingService(
        plant=plant,
        identifiers=identifiers,
        controllers=controllers,
        outlier_gate=outlier_gate,
        snapshot_every=snapshot_every,
        preview=preview,
    )
    return service.track(reference, controller=CONTROLLER_MPC, trajectory=trajectory, repeat=repeat, seed=seed)
