# -*- coding: utf-8 -*-
"""
Domain models and data structures used throughout the toolkit.
"""
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, Optional, Tuple

import numpy as np

from .constants import (
    CONTROL_BOUND_RAD,
    CONTROL_WEIGHT,
    DEFAULT_AMPLITUDE_MAJOR_DEG,
    DEFAULT_AMPLITUDE_MINOR_DEG,
    DEFAULT_TRAJECTORY_POINTS,
    LOAD_FREQUENCY,
    LOAD_GAIN,
    MEASUREMENT_NOISE_STD_DEG,
    MPC_CONVERGENCE_TOL,
    MPC_GRADIENT_STEP,
    MPC_MAX_SOLVER_ITERS,
    MPPI_CONTROL_NOISE_STD,
    MPPI_HORIZON,
    MPPI_NUM_SAMPLES,
    MPPI_SEED,
    MPPI_TEMPERATURE,
    OBSERVATION_GAIN,
    PROCESS_SCALE,
    ROLLOUT_MODES,
    ROLLOUT_VECTORIZED,
    SAMPLING_MODES,
    SAMPLING_NOMINAL,
    STAGE_STATE_WEIGHT,
    TERMINAL_WEIGHT,
    TRAJECTORY_KINDS,
)
from .exceptions import ConfigInvalid

if TYPE_CHECKING:  # pragma: no cover
    from .interfaces import PositionMap

# --- Mixture model ---


@dataclass(frozen=True)
class GaussianComponent:
    """
    One weighted Gaussian over the joint (u, x) space.

    Attributes:
        prior: Mixing probability pi_k in (0, 1].
        mean: Mean vector mu_k, inputs first then outputs (rad, deg).
        covariance: Symmetric positive definite matrix Sigma_k.
    """

    prior: float
    mean: np.ndarray
    covariance: np.ndarray


@dataclass(frozen=True)
class GmmModel:
    """
    A fitted Gaussian mixture over joint input/output space.

    Attributes:
        components: The K mixture components.
        dim_in: Number of leading input dimensions.
        dim_out: Number of trailing output dimensions.
        n_iter: EM iterations performed (0 for hand-built models).
        converged: Whether EM stopped on the tolerance rather than max_iter.
        log_likelihood_trace: Log-likelihood after each EM iteration.
    """

    components: Tuple[GaussianComponent, ...]
    dim_in: int = 1
    dim_out: int = 1
    n_iter: int = 0
    converged: bool = False
    log_likelihood_trace: Tuple[float, ...] = ()

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.dim_in + self.dim_out

    @property
    def priors(self) -> np.ndarray:
        return np.array([c.prior for c in self.components], dtype=float)

    @property
    def means(self) -> np.ndarray:
        return np.stack([np.asarray(c.mean, dtype=float) for c in self.components])

    @property
    def covariances(self) -> np.ndarray:
        return np.stack([np.asarray(c.covariance, dtype=float) for c in self.components])


@dataclass(frozen=True)
class Dataset:
    """(motor angle rad, bend angle deg) samples stored as an (n, 2) array: column 0 is u, column 1 is x."""

    samples: np.ndarray

    @classmethod
    def from_pairs(cls, pairs: List[Tuple[float, float]]) -> "Dataset":
        return cls(samples=np.asarray(pairs, dtype=float).reshape(-1, 2))

    @property
    def u(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def x(self) -> np.ndarray:
        return self.samples[:, 1]

    def __len__(self) -> int:
        return int(self.samples.shape[0])


# --- Plant ---


@dataclass(frozen=True)
class PlantState:
    """Bend angle x (deg) of one DoF and the last applied motor angle (rad)."""

    x: float
    u_prev: float = 0.0


@dataclass(frozen=True)
class DisturbanceConfig:
    """
    Synthetic disturbance settings of the simulated plant.

    Attributes:
        process_scale: Multiplier on |x| giving the process-noise std.
        load_gain: Gain of the environmental load term gain * x * sin(freq * x).
        load_frequency: Frequency of the load term.
        measurement_noise_std: Std of the additive measurement noise (deg).
        observation_gain: Sensor gain H of z = H x + v.
    """

    process_scale: float = PROCESS_SCALE
    load_gain: float = LOAD_GAIN
    load_frequency: float = LOAD_FREQUENCY
    measurement_noise_std: float = MEASUREMENT_NOISE_STD_DEG
    observation_gain: float = OBSERVATION_GAIN

    @classmethod
    def disturbance_free(cls) -> "DisturbanceConfig":
        """Returns a config with every disturbance switched off and a unit sensor."""
        return cls(
            process_scale=0.0, load_gain=0.0, load_frequency=0.0, measurement_noise_std=0.0, observation_gain=1.0
        )

    def validate(self, path: str = "plant") -> None:
        for name in ("process_scale", "load_gain", "load_frequency", "measurement_noise_std", "observation_gain"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ConfigInvalid(f"{path}.{name}", f"must be a non-negative finite number, got {value!r}")


# --- Identifier ---


@dataclass(frozen=True)
class RbfBasis:
    """N Gaussian basis functions over (x deg, u rad): centers (N, 2) and widths (N,)."""

    centers: np.ndarray
    widths: np.ndarray

    @property
    def size(self) -> int:
        return int(self.centers.shape[0])


@dataclass(frozen=True)
class RbfIdentifier:
    """
    RBF approximation of f(x, u) together with its EKF state.

    Instances are immutable; ekf_update returns a new identifier, so any
    reference held by a controller is a frozen snapshot.

    With `nominal` set, f_hat = f_nominal(x, u) + phi^T w: the known part of the
    dynamics comes from that position map and the weights only learn the rest.
    """

    basis: RbfBasis
    weights: np.ndarray
    covariance: np.ndarray
    process_noise: np.ndarray
    measurement_noise: float
    nominal: Optional["PositionMap"] = None


@dataclass(frozen=True)
class IdentifierSnapshot:
    """Identifier state of one DoF captured at a tracking step."""

    step: int
    dof: str
    identifier: RbfIdentifier


# --- Controllers ---


@dataclass(frozen=True)
class CostWeights:
    """Quadratic weights of the finite-horizon tracking cost shared by MPPI and MPC."""

    stage_state_weight: float = STAGE_STATE_WEIGHT
    control_weight: float = CONTROL_WEIGHT
    terminal_weight: float = TERMINAL_WEIGHT


def _check_cost_weights(path: str, q: float, r: float, q_h: float) -> None:
    if q < 0:
        raise ConfigInvalid(f"{path}.stage_state_weight", "must be >= 0")
    if r <= 0:
        raise ConfigInvalid(f"{path}.control_weight", "must be > 0")
    if q_h <= 0:
        raise ConfigInvalid(f"{path}.terminal_weight", "must be > 0")


def _check_bounds(path: str, bounds: Tuple[float, float]) -> None:
    if len(bounds) != 2 or not bounds[0] < bounds[1]:
        raise ConfigInvalid(f"{path}.control_bounds", f"must be [u_min, u_max] with u_min < u_max, got {bounds!r}")


@dataclass(frozen=True)
class MppiConfig:
    """
    Hyperparameters of the MPPI controller.

    Attributes:
        num_samples: M sampled control sequences per step.
        horizon: H steps per sequence.
        temperature: lambda of the exponential weights.
        control_noise_std: sigma_u, std of the control perturbation (rad).
        stage_state_weight: Q.
        control_weight: R.
        terminal_weight: Q_H.
        control_bounds: (u_min, u_max) in rad.
        seed: Seed of the sampling streams.
        sampling: "nominal" perturbs the nominal sequence, "random_walk" accumulates noise along the horizon.
        rollout_mode: "vectorized", "sequential" or "parallel".
        rollout_workers: Thread count for the parallel rollout mode.
    """

    num_samples: int = MPPI_NUM_SAMPLES
    horizon: int = MPPI_HORIZON
    temperature: float = MPPI_TEMPERATURE
    control_noise_std: float = MPPI_CONTROL_NOISE_STD
    stage_state_weight: float = STAGE_STATE_WEIGHT
    control_weight: float = CONTROL_WEIGHT
    terminal_weight: float = TERMINAL_WEIGHT
    control_bounds: Tuple[float, float] = (-CONTROL_BOUND_RAD, CONTROL_BOUND_RAD)
    seed: int = MPPI_SEED
    sampling: str = SAMPLING_NOMINAL
    rollout_mode: str = ROLLOUT_VECTORIZED
    rollout_workers: int = 4

    @property
    def cost_weights(self) -> CostWeights:
        return CostWeights(self.stage_state_weight, self.control_weight, self.terminal_weight)

    def validate(self, path: str = "mppi") -> None:
        if self.num_samples < 1:
            raise ConfigInvalid(f"{path}.num_samples", "must be >= 1")
        if self.horizon < 1:
            raise ConfigInvalid(f"{path}.horizon", "must be >= 1")
        if not self.temperature > 0:
            raise ConfigInvalid(f"{path}.temperature", "must be > 0")
        if self.control_noise_std < 0:
            raise ConfigInvalid(f"{path}.control_noise_std", "must be >= 0")
        _check_cost_weights(path, self.stage_state_weight, self.control_weight, self.terminal_weight)
        _check_bounds(path, self.control_bounds)
        if self.sampling not in SAMPLING_MODES:
            raise ConfigInvalid(f"{path}.sampling", f"must be one of {SAMPLING_MODES}")
        if self.rollout_mode not in ROLLOUT_MODES:
            raise ConfigInvalid(f"{path}.rollout_mode", f"must be one of {ROLLOUT_MODES}")
        if self.rollout_workers < 1:
            raise ConfigInvalid(f"{path}.rollout_workers", "must be >= 1")


@dataclass(frozen=True)
class RolloutBatch:
    """Sampled controls (M, H), predicted states (M, H+1) and path costs (M,) of one MPPI step."""

    controls: np.ndarray
    states: np.ndarray
    costs: np.ndarray


@dataclass(frozen=True)
class MpcConfig:
    """
    Horizon, cost weights and gradient-descent budget of the MPC baseline.

    The solver draws no random numbers; `seed` is only recorded in the run logs.
    """

    horizon: int = MPPI_HORIZON
    stage_state_weight: float = STAGE_STATE_WEIGHT
    control_weight: float = CONTROL_WEIGHT
    terminal_weight: float = TERMINAL_WEIGHT
    max_solver_iters: int = MPC_MAX_SOLVER_ITERS
    gradient_step: float = MPC_GRADIENT_STEP
    convergence_tol: float = MPC_CONVERGENCE_TOL
    control_bounds: Tuple[float, float] = (-CONTROL_BOUND_RAD, CONTROL_BOUND_RAD)
    seed: int = 0

    @property
    def cost_weights(self) -> CostWeights:
        return CostWeights(self.stage_state_weight, self.control_weight, self.terminal_weight)

    def validate(self, path: str = "mpc") -> None:
        if self.horizon < 1:
            raise ConfigInvalid(f"{path}.horizon", "must be >= 1")
        _check_cost_weights(path, self.stage_state_weight, self.control_weight, self.terminal_weight)
        if self.max_solver_iters < 1:
            raise ConfigInvalid(f"{path}.max_solver_iters", "must be >= 1")
        if not self.gradient_step > 0:
            raise ConfigInvalid(f"{path}.gradient_step", "must be > 0")
        if not self.convergence_tol > 0:
            raise ConfigInvalid(f"{path}.convergence_tol", "must be > 0")
        _check_bounds(path, self.control_bounds)


# --- Trajectories ---


@dataclass(frozen=True)
class TrajectorySpec:
    """One closed reference curve in (pitch, yaw) space, sampled at T points."""

    kind: str
    amplitude_major: float = DEFAULT_AMPLITUDE_MAJOR_DEG
    amplitude_minor: float = DEFAULT_AMPLITUDE_MINOR_DEG
    points: int = DEFAULT_TRAJECTORY_POINTS

    def validate(self, path: str = "trajectory") -> None:
        if self.kind not in TRAJECTORY_KINDS:
            raise ConfigInvalid(f"{path}.kind", f"must be one of {TRAJECTORY_KINDS}, got {self.kind!r}")
        if self.points < 2:
            raise ConfigInvalid(f"{path}.points", "must be >= 2")
        if not (self.amplitude_major > 0 and self.amplitude_minor > 0):
            raise ConfigInvalid(f"{path}.amplitude_major", "amplitudes must be > 0")


# --- Tracking results ---


@dataclass(frozen=True)
class StepRecord:
    """
    One control step of a tracking run. Per-DoF values are keyed by DoF name.

    Attributes:
        step: Step index j.
        reference: Desired bend angle per DoF (deg).
        measured: Measured bend angle after the step per DoF (deg).
        control: Applied motor angle per DoF (rad).
        innovation: EKF prediction error per DoF, NaN when the update was skipped.
        wall_time_ns: Controller wall time of the step, summed over DoFs.
    """

    step: int
    reference: Dict[str, float]
    measured: Dict[str, float]
    control: Dict[str, float]
    innovation: Dict[str, float]
    wall_time_ns: int


@dataclass
class TrackingLog:
    """Per-step record of one (controller, trajectory, repeat) run."""

    controller: str
    trajectory: str
    repeat: int
    seed: int
    records: List[StepRecord] = field(default_factory=list)
    snapshots: List[IdentifierSnapshot] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def series(self, attribute: str, dof: str) -> np.ndarray:
        """Returns one per-DoF column ('reference', 'measured', 'control', 'innovation') as an array."""
        return np.array([getattr(record, attribute)[dof] for record in self.records], dtype=float)

    @property
    def wall_times_ns(self) -> np.ndarray:
        return np.array([record.wall_time_ns for record in self.records], dtype=np.int64)


@dataclass(frozen=True)
class ComparisonRow:
    """Aggregated metrics of one (controller, trajectory) pair over repeats."""

    controller: str
    trajectory: str
    repeats: int
    rmse_pitch_mean: float
    rmse_pitch_std: float
    rmse_yaw_mean: float
    rmse_yaw_std: float
    mean_step_time_ns: float
    speedup: float
    time_p_value: float


@dataclass
class ComparisonReport:
    """Tracking accuracy and timing summary: one row per (controller, trajectory)."""

    rows: List[ComparisonRow] = field(default_factory=list)

    def row(self, controller: str, trajectory: str) -> Optional[ComparisonRow]:
        for candidate in self.rows:
            if candidate.controller == controller and candidate.trajectory == trajectory:
                return candidate
        return None
