# -*- coding: utf-8 -*-
"""
Contains the TrackingService that runs the closed tracking loop shared by MPPI and MPC.
"""
import logging
import time
from typing import Dict, Mapping, Optional

import numpy as np

from .constants import DOFS, OUTLIER_GATE_SIGMAS, SNAPSHOT_EVERY
from .exceptions import DimensionMismatch
from .identifier import basis_vector, ekf_update, innovation_target, nominal_increment, predict_f
from .interfaces import Controller
from .models import IdentifierSnapshot, RbfIdentifier, StepRecord, TrackingLog
from .plant_sim import SnakePlant

log = logging.getLogger(__name__)


class TrackingService:
    """
    Orchestrates one tracking run: plan, apply, measure and adapt, for every reference point.

    Uses dependency injection for the plant, the per-DoF identifiers and the
    per-DoF controllers. Pitch and yaw are independent scalar problems sharing
    only the step index. With `preview` set, controllers receive the remaining
    reference points of their DoF instead of only the next one.
    """

    def __init__(
        self,
        plant: SnakePlant,
        identifiers: Mapping[str, RbfIdentifier],
        controllers: Mapping[str, Controller],
        outlier_gate: Optional[float] = OUTLIER_GATE_SIGMAS,
        snapshot_every: int = SNAPSHOT_EVERY,
        preview: bool = True,
    ):
        """Initialize service with dependencies."""
        if not isinstance(plant, SnakePlant):
            raise TypeError("plant must be an instance of SnakePlant")
        for dof in DOFS:
            if not isinstance(identifiers.get(dof), RbfIdentifier):
                raise TypeError(f"identifiers[{dof!r}] must be an instance of RbfIdentifier")
            if not isinstance(controllers.get(dof), Controller):
                raise TypeError(f"controllers[{dof!r}] must be an instance of Controller")

        self.plant = plant
        self.identifiers: Dict[str, RbfIdentifier] = dict(identifiers)
        self.controllers: Dict[str, Controller] = dict(controllers)
        self.outlier_gate = outlier_gate
        self.snapshot_every = snapshot_every
        self.preview = preview

    def track(
        self, reference: np.ndarray, controller: str, trajectory: str = "", repeat: int = 0, seed: int = 0
    ) -> TrackingLog:
        """
        Tracks every point of a reference sequentially.

        Per step: snapshot identifiers -> plan each DoF (timed) -> apply the
        first control -> measure -> EKF update -> next reference point. A
        controller never sees an EKF update made during its own step.

        Args:
            reference: Array of shape (T, 2), columns (pitch, yaw) in deg.
            controller: Controller tag recorded in the log.
            trajectory: Trajectory tag recorded in the log.
            repeat: Repeat index recorded in the log.
            seed: Seed recorded in the log.

        Returns:
            A TrackingLog with T records.
        """
        reference = np.asarray(reference, dtype=float)
        if reference.ndim != 2 or reference.shape[1] != len(DOFS) or reference.shape[0] < 1:
            raise DimensionMismatch(f"Reference must have shape (T >= 1, {len(DOFS)}), got {reference.shape}")

        tracking_log = TrackingLog(controller=controller, trajectory=trajectory, repeat=repeat, seed=seed)
        measured = {dof: self.plant.measure(dof) for dof in DOFS}
        log.info(f"Tracking {trajectory or 'reference'} ({len(reference)} points) with {controller}, repeat {repeat}")

        for j in range(reference.shape[0]):
            desired = {dof: float(reference[j, col]) for col, dof in enumerate(DOFS)}
            snapshot = dict(self.identifiers)

            controls: Dict[str, float] = {}
            elapsed_ns = 0
            for dof in DOFS:
                target = reference[j:, DOFS.index(dof)] if self.preview else desired[dof]
                start = time.perf_counter_ns()
                sequence = self.controllers[dof].plan(measured[dof], target, snapshot[dof], j)
                elapsed_ns += time.perf_counter_ns() - start
                controls[dof] = float(sequence[0])

            innovations: Dict[str, float] = {}
            for dof in DOFS:
                self.plant.apply(dof, controls[dof])
                next_measurement = self.plant.measure(dof)
                innovations[dof] = self._adapt(dof, measured[dof], next_measurement, controls[dof])
                measured[dof] = next_measurement

            tracking_log.records.append(
                StepRecord(
                    step=j,
                    reference=desired,
                    measured=dict(measured),
                    control=controls,
                    innovation=innovations,
                    wall_time_ns=max(int(elapsed_ns), 1),
                )
            )
            if self.snapshot_every > 0 and (j + 1) % self.snapshot_every == 0:
                for dof in DOFS:
                    tracking_log.snapshots.append(IdentifierSnapshot(step=j, dof=dof, identifier=self.identifiers[dof]))

        return tracking_log

    # --- Private Helper Methods ---

    def _adapt(self, dof: str, x: float, x_next: float, u: float) -> float:
        """
        EKF-updates one DoF's identifier; returns the prediction error, NaN when skipped.

        The weights are fitted to what the nominal increment leaves unexplained.
        """
        z = innovation_target(x_next, x, u)
        if z is None:
            log.debug(f"{dof}: |u|={abs(u):.2e} below the division gate, EKF update skipped")
            return float("nan")
        identifier = self.identifiers[dof]
        residual = z - nominal_increment(identifier, x, u)
        phi = basis_vector(x, u, identifier.basis)
        error = residual - predict_f(phi, identifier.weights)
        self.identifiers[dof] = ekf_update(identifier, phi, residual, gate=self.outlier_gate)
        return float(error)
