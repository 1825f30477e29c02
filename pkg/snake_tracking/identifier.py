# -*- coding: utf-8 -*-
"""
Online RBF identifier of the unknown dynamics term f(x, u), with EKF weight updates.

The weight vector is treated as a random-walk state w_{k+1} = w_k + eta_k and
observed through z_k = (x_{k+1} - x_k) / u_k = phi_k^T w_k + nu_k, so the
observation Jacobian is the basis vector phi_k itself. When the identifier
carries a nominal position map, z_k is first reduced by the nominal increment
and the weights track only the residual.
"""
import dataclasses
import logging
from typing import Any, Dict, Optional

import numpy as np
from scipy.spatial.distance import pdist
from sklearn.cluster import KMeans

from .constants import (
    CONTROL_EPSILON_RAD,
    EXCITATION_STEP_STD_RAD,
    EXCITATION_STEPS,
    EXCITATION_U_LIMIT_RAD,
    FALLBACK_WIDTH,
    P0_SCALE,
    Q0_SCALE,
    R0,
    SCHEMA_VERSION,
)
from .exceptions import DimensionMismatch, NonFiniteInnovation, TooFewSamples
from .interfaces import PositionMap
from .models import DisturbanceConfig, PlantState, RbfBasis, RbfIdentifier
from .plant_sim import step, true_increment
from .rng import make_generator, sklearn_seed

log = logging.getLogger(__name__)


def excite(
    position_map: PositionMap,
    cfg: DisturbanceConfig,
    rng: np.random.Generator,
    steps: int = EXCITATION_STEPS,
    step_std: float = EXCITATION_STEP_STD_RAD,
    u_limit: float = EXCITATION_U_LIMIT_RAD,
) -> np.ndarray:
    """
    Drives a fresh plant with a seeded random walk in u and returns the visited (x, u) pairs.

    The walk covers the first half of the run; the second half replays it with
    the sign flipped, so the samples span both bending directions whatever
    side the walk drifts to.

    Returns:
        Array of shape (steps, 2): column 0 the state before the step (deg), column 1 the control (rad).
    """
    walk = np.empty((steps + 1) // 2)
    u = 0.0
    for k in range(walk.shape[0]):
        u = float(np.clip(u + step_std * rng.standard_normal(), -u_limit, u_limit))
        walk[k] = u
    controls = np.concatenate([walk, -walk])[:steps]

    state = PlantState(x=position_map.position(0.0), u_prev=0.0)
    samples = np.empty((steps, 2))
    for k, u in enumerate(controls):
        samples[k] = (state.x, u)
        state = step(state, float(u), rng, cfg, position_map)
    return samples


def init_centers(samples: Any, n_centers: int, seed: int) -> RbfBasis:
    """
    Places N centers by seeded k-means++ / Lloyd clustering of (x, u) samples.

    All widths equal d_max / sqrt(2N), d_max being the largest distance between
    two centers; a single center (or coincident centers) falls back to width 1.

    Raises:
        TooFewSamples: If there are fewer samples than centers.
    """
    points = np.asarray(samples, dtype=float).reshape(-1, 2)
    if n_centers < 1 or points.shape[0] < n_centers:
        raise TooFewSamples(f"Need at least {n_centers} samples for {n_centers} centers, got {points.shape[0]}")
    kmeans = KMeans(n_clusters=n_centers, init="k-means++", n_init=1, random_state=sklearn_seed(seed)).fit(points)
    centers = np.asarray(kmeans.cluster_centers_, dtype=float)
    d_max = float(pdist(centers).max()) if n_centers > 1 else 0.0
    width = d_max / np.sqrt(2.0 * n_centers) if d_max > 0 else FALLBACK_WIDTH
    return RbfBasis(centers=centers, widths=np.full(n_centers, width))


def basis_vector(x: float, u: float, basis: RbfBasis) -> np.ndarray:
    """phi_i = exp(-||[x, u] - c_i||^2 / (2 sigma_i^2)) for every center."""
    sq_dist = (x - basis.centers[:, 0]) ** 2 + (u - basis.centers[:, 1]) ** 2
    return np.exp(-sq_dist / (2.0 * basis.widths**2))


def basis_matrix(xs: np.ndarray, us: np.ndarray, basis: RbfBasis) -> np.ndarray:
    """Batched basis_vector: returns shape (B, N) for B state/control pairs."""
    sq_dist = (xs[:, None] - basis.centers[None, :, 0]) ** 2 + (us[:, None] - basis.centers[None, :, 1]) ** 2
    return np.exp(-sq_dist / (2.0 * basis.widths[None, :] ** 2))


def predict_f(phi: np.ndarray, weights: np.ndarray) -> float:
    """RBF estimate f_hat = phi^T w."""
    phi = np.asarray(phi, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if phi.shape != weights.shape:
        raise DimensionMismatch(f"Basis vector shape {phi.shape} does not match weights shape {weights.shape}")
    return float(phi @ weights)


def make_identifier(
    basis: RbfBasis,
    seed: int,
    p0_scale: float = P0_SCALE,
    q0_scale: float = Q0_SCALE,
    r0: float = R0,
    nominal: Optional[PositionMap] = None,
) -> RbfIdentifier:
    """Fresh identifier with w0 ~ N(0, I) (seeded), P0 = p0 I, Q' = q0 I, R' = r0 and an optional nominal map."""
    n = basis.size
    weights = make_generator(seed).standard_normal(n)
    return RbfIdentifier(
        basis=basis,
        weights=weights,
        covariance=p0_scale * np.eye(n),
        process_noise=q0_scale * np.eye(n),
        measurement_noise=float(r0),
        nominal=nominal,
    )


def nominal_increment(identifier: RbfIdentifier, x: float, u: float) -> float:
    """Known part of f(x, u) from the identifier's nominal map, 0 without one."""
    if identifier.nominal is None:
        return 0.0
    return true_increment(x, u, identifier.nominal)


def innovation_target(x_next: float, x: float, u: float) -> Optional[float]:
    """EKF target z = (x_next - x) / u, or None (skip this step's update) when |u| < CONTROL_EPSILON_RAD."""
    if abs(u) < CONTROL_EPSILON_RAD:
        return None
    return (x_next - x) / u


def ekf_update(
    identifier: RbfIdentifier, phi: np.ndarray, z: float, gate: Optional[float] = None
) -> RbfIdentifier:
    """
    One EKF step on the RBF weights.

    P- = P + Q'; K = P- phi / (phi^T P- phi + R'); w+ = w + K (z - phi^T w);
    P+ = (I - K phi^T) P-, symmetrized. With `gate` set, an innovation larger
    than gate * sqrt(phi^T P- phi + R') is rejected and the identifier is
    returned unchanged.

    Raises:
        NonFiniteInnovation: If z is NaN or infinite.
        DimensionMismatch: If phi does not match the weight vector.
    """
    if not np.isfinite(z):
        raise NonFiniteInnovation(f"EKF target {z!r} is not finite")
    phi = np.asarray(phi, dtype=float)
    if phi.shape != identifier.weights.shape:
        raise DimensionMismatch(f"Basis vector shape {phi.shape} does not match weights {identifier.weights.shape}")

    p_pred = identifier.covariance + identifier.process_noise
    p_phi = p_pred @ phi
    innovation_var = float(phi @ p_phi) + identifier.measurement_noise
    error = z - float(phi @ identifier.weights)
    if gate is not None and abs(error) > gate * np.sqrt(innovation_var):
        log.debug(f"EKF innovation {error:.4g} outside the {gate}-sigma gate; update skipped")
        return identifier

    gain = p_phi / innovation_var
    weights = identifier.weights + gain * error
    covariance = (np.eye(phi.shape[0]) - np.outer(gain, phi)) @ p_pred
    covariance = 0.5 * (covariance + covariance.T)
    return dataclasses.replace(identifier, weights=weights, covariance=covariance)


def identifier_to_dict(identifier: RbfIdentifier) -> Dict[str, Any]:
    """JSON-ready view of an identifier: centers, widths, weights and P (row-major)."""
    return {
        "schema": SCHEMA_VERSION,
        "centers": identifier.basis.centers.tolist(),
        "widths": identifier.basis.widths.tolist(),
        "weights": identifier.weights.tolist(),
        "covariance": identifier.covariance.ravel().tolist(),
        "measurement_noise": identifier.measurement_noise,
        "nominal": None if identifier.nominal is None else type(identifier.nominal).__name__,
    }
