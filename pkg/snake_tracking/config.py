# -*- coding: utf-8 -*-
"""
Configuration settings: logging setup and the experiment config file.

The experiment config is one JSON object with the sections plant, gmm,
identifier, mppi, mpc and trajectories plus a few top-level scalars. Every
key is optional; missing keys take the defaults from constants.py.
"""
import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Type, TypeVar, Union

from .constants import (
    DATASET_NOISE_STD_DEG,
    DATASET_SAMPLES,
    EXCITATION_STEP_STD_RAD,
    EXCITATION_STEPS,
    GMM_COMPONENTS,
    GMM_MAX_ITER,
    GMM_TOL,
    MASTER_SEED,
    OUTLIER_GATE_SIGMAS,
    P0_SCALE,
    Q0_SCALE,
    R0,
    RBF_BASIS_COUNT,
    REPEATS,
    SNAPSHOT_EVERY,
    TRAJECTORY_KINDS,
)
from .exceptions import ConfigInvalid, ExportException
from .models import DisturbanceConfig, MpcConfig, MppiConfig, TrajectorySpec

log = logging.getLogger(__name__)

T = TypeVar("T")


def setup_logging(level: int = logging.INFO) -> None:
    """Configures basic logging for the application."""
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


@dataclass(frozen=True)
class GmmConfig:
    """Dataset synthesis and EM settings of the surrogate plant fit."""

    n_components: int = GMM_COMPONENTS
    seed: int = 0
    max_iter: int = GMM_MAX_ITER
    tol: float = GMM_TOL
    samples: int = DATASET_SAMPLES
    noise_std: float = DATASET_NOISE_STD_DEG

    def validate(self, path: str = "gmm") -> None:
        if self.n_components < 1:
            raise ConfigInvalid(f"{path}.n_components", "must be >= 1")
        if self.max_iter < 1:
            raise ConfigInvalid(f"{path}.max_iter", "must be >= 1")
        if not self.tol > 0:
            raise ConfigInvalid(f"{path}.tol", "must be > 0")
        if self.samples < self.n_components:
            raise ConfigInvalid(f"{path}.samples", "must be >= n_components")
        if self.noise_std < 0:
            raise ConfigInvalid(f"{path}.noise_std", "must be >= 0")


@dataclass(frozen=True)
class IdentifierConfig:
    """
    RBF basis size, EKF initialisation and the excitation run used to place centers.

    With nominal_model set the identifier starts from the fitted surrogate map
    and the RBF weights learn only the disturbance it does not capture.
    """

    n_basis: int = RBF_BASIS_COUNT
    p0_scale: float = P0_SCALE
    q0_scale: float = Q0_SCALE
    r0: float = R0
    excitation_steps: int = EXCITATION_STEPS
    excitation_step_std: float = EXCITATION_STEP_STD_RAD
    outlier_gate: Optional[float] = OUTLIER_GATE_SIGMAS
    snapshot_every: int = SNAPSHOT_EVERY
    nominal_model: bool = True

    def validate(self, path: str = "identifier") -> None:
        if self.n_basis < 1:
            raise ConfigInvalid(f"{path}.n_basis", "must be >= 1")
        if not (self.p0_scale > 0 and self.q0_scale >= 0):
            raise ConfigInvalid(f"{path}.p0_scale", "p0_scale must be > 0 and q0_scale >= 0")
        if not self.r0 > 0:
            raise ConfigInvalid(f"{path}.r0", "must be > 0")
        if self.excitation_steps < self.n_basis:
            raise ConfigInvalid(f"{path}.excitation_steps", "must be >= n_basis")
        if self.outlier_gate is not None and not self.outlier_gate > 0:
            raise ConfigInvalid(f"{path}.outlier_gate", "must be > 0 or null")
        if self.snapshot_every < 0:
            raise ConfigInvalid(f"{path}.snapshot_every", "must be >= 0")


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Everything one comparison run needs.

    Attributes:
        workers: Threads used to run independent (trajectory, repeat, controller) jobs.
        serial_timing: Forces serial execution so per-step wall times are not perturbed.
        preview: Hands controllers the upcoming reference points instead of only the next one.
    """

    plant: DisturbanceConfig = field(default_factory=DisturbanceConfig)
    gmm: GmmConfig = field(default_factory=GmmConfig)
    identifier: IdentifierConfig = field(default_factory=IdentifierConfig)
    mppi: MppiConfig = field(default_factory=MppiConfig)
    mpc: MpcConfig = field(default_factory=MpcConfig)
    trajectories: Tuple[TrajectorySpec, ...] = tuple(TrajectorySpec(kind=kind) for kind in TRAJECTORY_KINDS)
    repeats: int = REPEATS
    master_seed: int = MASTER_SEED
    output_dir: str = "results"
    workers: int = 1
    serial_timing: bool = True
    preview: bool = True

    def validate(self) -> None:
        self.plant.validate("plant")
        self.gmm.validate("gmm")
        self.identifier.validate("identifier")
        self.mppi.validate("mppi")
        self.mpc.validate("mpc")
        if not self.trajectories:
            raise ConfigInvalid("trajectories", "must list at least one trajectory")
        for i, spec in enumerate(self.trajectories):
            spec.validate(f"trajectories[{i}]")
        if self.repeats < 1:
            raise ConfigInvalid("repeats", "must be >= 1")
        if self.workers < 1:
            raise ConfigInvalid("workers", "must be >= 1")

    def with_seed(self, master_seed: int) -> "ExperimentConfig":
        return dataclasses.replace(self, master_seed=master_seed)


# --- Parsing ---


def _check_value(path: str, value: Any, default: Any, nullable: bool = False) -> Any:
    """Coerces one JSON value to the type of the field default, rejecting mismatches."""
    if value is None and nullable:
        return None
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigInvalid(path, f"expected a boolean, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigInvalid(path, f"expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigInvalid(path, f"expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigInvalid(path, f"expected a string, got {value!r}")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, list) or len(value) != len(default):
            raise ConfigInvalid(path, f"expected a list of {len(default)} numbers, got {value!r}")
        return tuple(_check_value(f"{path}[{i}]", item, default[i]) for i, item in enumerate(value))
    raise ConfigInvalid(path, f"unsupported value {value!r}")  # pragma: no cover


def _build_section(cls: Type[T], data: Any, path: str) -> T:
    """Builds a flat frozen dataclass from a JSON object, starting from the class defaults."""
    if not isinstance(data, Mapping):
        raise ConfigInvalid(path, f"expected an object, got {type(data).__name__}")
    known = {f.name: f for f in dataclasses.fields(cls)}
    values: Dict[str, Any] = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigInvalid(f"{path}.{key}", "unknown field")
        default = known[key].default
        if default is dataclasses.MISSING:
            default = ""
        values[key] = _check_value(f"{path}.{key}", value, default, nullable=key in _NULLABLE)
    for name, spec in known.items():
        if spec.default is dataclasses.MISSING and spec.default_factory is dataclasses.MISSING and name not in values:
            raise ConfigInvalid(f"{path}.{name}", "is required")
    return cls(**values)


_NULLABLE = ("outlier_gate",)

_SECTIONS = {
    "plant": DisturbanceConfig,
    "gmm": GmmConfig,
    "identifier": IdentifierConfig,
    "mppi": MppiConfig,
    "mpc": MpcConfig,
}
_SCALARS = ("repeats", "master_seed", "output_dir", "workers", "serial_timing", "preview")


def parse_config(data: Any) -> ExperimentConfig:
    """
    Builds and validates an ExperimentConfig from a decoded JSON object.

    Raises:
        ConfigInvalid: On unknown keys, wrong types or invariant violations, naming the field path.
    """
    if not isinstance(data, Mapping):
        raise ConfigInvalid("$", "config must be a JSON object")
    defaults = ExperimentConfig()
    values: Dict[str, Any] = {}
    for key, value in data.items():
        if key in _SECTIONS:
            values[key] = _build_section(_SECTIONS[key], value, key)
        elif key == "trajectories":
            if not isinstance(value, list):
                raise ConfigInvalid("trajectories", "expected a list")
            values[key] = tuple(
                _build_section(TrajectorySpec, {"kind": item} if isinstance(item, str) else item, f"trajectories[{i}]")
                for i, item in enumerate(value)
            )
        elif key in _SCALARS:
            values[key] = _check_value(key, value, getattr(defaults, key))
        else:
            raise ConfigInvalid(key, "unknown field")
    config = ExperimentConfig(**values)
    config.validate()
    return config


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Reads and parses a JSON experiment config.

    Raises:
        ConfigInvalid: If the file is not valid JSON or fails validation.
        ExportException: If the file cannot be read.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        log.exception(f"Cannot read config file {path}")
        raise ExportException(f"Cannot read config file {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigInvalid("$", f"invalid JSON at line {e.lineno}: {e.msg}") from e
    config = parse_config(data)
    log.info(f"Loaded config {path}")
    return config


def config_to_dict(config: ExperimentConfig) -> Dict[str, Any]:
    """JSON-ready view of a config, the inverse of parse_config."""
    data = dataclasses.asdict(config)
    data["trajectories"] = [dataclasses.asdict(spec) for spec in config.trajectories]
    for section in ("mppi", "mpc"):
        data[section]["control_bounds"] = list(data[section]["control_bounds"])
    return data
