# -*- coding: utf-8 -*-
"""
Reference trajectories in (pitch, yaw) space, sampled at t_j = 2 pi j / T, counterclockwise from t = 0.
"""
import numpy as np

from .constants import (
    STAR_TIPS,
    TRAJ_INFINITY_HORIZONTAL,
    TRAJ_INFINITY_VERTICAL,
    TRAJ_OVAL_HORIZONTAL,
    TRAJ_OVAL_VERTICAL,
    TRAJECTORY_KINDS,
)
from .exceptions import UnknownKind
from .models import TrajectorySpec


def parameter_grid(points: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(points) / points


def _oval(t: np.ndarray, a: float, b: float) -> np.ndarray:
    """(yaw, pitch) = (a cos t, b sin t)."""
    return np.column_stack([a * np.cos(t), b * np.sin(t)])


def _gerono(t: np.ndarray, a: float, b: float) -> np.ndarray:
    """(yaw, pitch) = (a cos t, b sin t cos t)."""
    return np.column_stack([a * np.cos(t), b * np.sin(t) * np.cos(t)])


def star_radius(t: np.ndarray, outer: float, inner: float) -> np.ndarray:
    """
    Piecewise-linear polar radius: outer at the tips t = pi/2 + 2 pi k / 5, inner halfway between.
    """
    period = 2.0 * np.pi / STAR_TIPS
    phase = np.mod(t - np.pi / 2.0, period) / period
    return inner + (outer - inner) * np.abs(2.0 * phase - 1.0)


def _star(t: np.ndarray, outer: float, inner: float) -> np.ndarray:
    r = star_radius(t, outer, inner)
    return np.column_stack([r * np.cos(t), r * np.sin(t)])


def generate(spec: TrajectorySpec) -> np.ndarray:
    """
    Samples one reference curve.

    Vertical variants are the horizontal ones with the yaw and pitch axes swapped.

    Args:
        spec: Kind, major/minor amplitudes (deg) and point count T.

    Returns:
        Array of shape (T, 2), columns (pitch, yaw) in deg.

    Raises:
        UnknownKind: If spec.kind is not a known trajectory.
    """
    if spec.kind not in TRAJECTORY_KINDS:
        raise UnknownKind(f"Unknown trajectory kind {spec.kind!r}; expected one of {TRAJECTORY_KINDS}")
    spec.validate()
    t = parameter_grid(spec.points)
    major, minor = spec.amplitude_major, spec.amplitude_minor

    if spec.kind in (TRAJ_OVAL_HORIZONTAL, TRAJ_OVAL_VERTICAL):
        yaw_pitch = _oval(t, major, minor)
    elif spec.kind in (TRAJ_INFINITY_HORIZONTAL, TRAJ_INFINITY_VERTICAL):
        yaw_pitch = _gerono(t, major, minor)
    else:
        yaw_pitch = _star(t, major, minor)

    if spec.kind in (TRAJ_OVAL_VERTICAL, TRAJ_INFINITY_VERTICAL):
        # axis swap: horizontal yaw becomes pitch
        return np.ascontiguousarray(yaw_pitch)
    return np.ascontiguousarray(yaw_pitch[:, ::-1])
