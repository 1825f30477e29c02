# -*- coding: utf-8 -*-
"""
Gaussian mixture model fitted by EM over joint (motor angle, bend angle) samples,
and Gaussian mixture regression used as the plant's nominal position map.
"""
import logging
from typing import Any, Dict, Tuple

import numpy as np
import scipy.linalg
from scipy.special import logsumexp
from sklearn.cluster import KMeans

from .constants import (
    COVARIANCE_FLOOR,
    DATASET_NOISE_STD_DEG,
    DATASET_SAMPLES,
    DATASET_U_RANGE_RAD,
    GMM_MAX_ITER,
    GMM_TOL,
    GROUND_TRUTH_A_DEG,
    GROUND_TRUTH_B,
    GROUND_TRUTH_C_DEG_PER_RAD,
    MIN_COMPONENT_MASS,
    SCHEMA_VERSION,
)
from .exceptions import DegenerateComponent, DimensionMismatch, EmptyDataset, ModelFitException, SingularInputBlock
from .models import Dataset, GaussianComponent, GmmModel
from .rng import make_generator, sklearn_seed

log = logging.getLogger(__name__)

_LOG_2PI = np.log(2.0 * np.pi)


# --- Synthetic training data ---


def ground_truth(u: Any, dof: str) -> Any:
    """Ground-truth position map g(u) = A*tanh(B*u) + C*u (deg) of one DoF."""
    b = GROUND_TRUTH_B[dof]
    return GROUND_TRUTH_A_DEG * np.tanh(b * np.asarray(u, dtype=float)) + GROUND_TRUTH_C_DEG_PER_RAD * np.asarray(
        u, dtype=float
    )


def synthesize_dataset(
    dof: str, n_samples: int = DATASET_SAMPLES, noise_std: float = DATASET_NOISE_STD_DEG, seed: int = 0
) -> Dataset:
    """Draws u uniformly over the motor range and x = g(u) + N(0, noise_std^2)."""
    rng = make_generator(seed)
    u = rng.uniform(-DATASET_U_RANGE_RAD, DATASET_U_RANGE_RAD, size=n_samples)
    x = ground_truth(u, dof) + noise_std * rng.standard_normal(n_samples)
    return Dataset(samples=np.column_stack([u, x]))


# --- Covariance helpers ---


def floor_eigenvalues(covariance: np.ndarray, floor: float = COVARIANCE_FLOOR) -> np.ndarray:
    """Symmetrizes a covariance and raises eigenvalues below `floor` to `floor`; untouched otherwise."""
    sym = 0.5 * (covariance + covariance.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    if eigvals.min() >= floor:
        return sym
    floored = (eigvecs * np.maximum(eigvals, floor)) @ eigvecs.T
    return 0.5 * (floored + floored.T)


def _component_log_densities(points: np.ndarray, means: np.ndarray, covariances: np.ndarray) -> np.ndarray:
    """Returns the (n, K) matrix of log N(point; mu_k, Sigma_k)."""
    n, dim = points.shape
    out = np.empty((n, means.shape[0]))
    for k in range(means.shape[0]):
        try:
            chol = scipy.linalg.cholesky(covariances[k], lower=True)
        except np.linalg.LinAlgError as e:
            raise DegenerateComponent(f"Component {k} covariance is not positive definite") from e
        soln = scipy.linalg.solve_triangular(chol, (points - means[k]).T, lower=True)
        out[:, k] = -0.5 * dim * _LOG_2PI - np.sum(np.log(np.diag(chol))) - 0.5 * np.sum(soln**2, axis=0)
    return out


def _weighted_log_densities(model_priors: np.ndarray, means: np.ndarray, covs: np.ndarray, points: np.ndarray):
    return _component_log_densities(points, means, covs) + np.log(model_priors)[None, :]


def _check_points(model: GmmModel, data: Dataset) -> np.ndarray:
    points = np.asarray(data.samples, dtype=float)
    if points.ndim != 2 or points.shape[1] != model.dim:
        raise DimensionMismatch(f"Data has shape {points.shape}, model expects {model.dim} columns")
    return points


def log_likelihood(model: GmmModel, data: Dataset) -> float:
    """Sum over samples of log sum_k pi_k N(sample; mu_k, Sigma_k)."""
    points = _check_points(model, data)
    weighted = _weighted_log_densities(model.priors, model.means, model.covariances, points)
    return float(np.sum(logsumexp(weighted, axis=1)))


# --- EM ---


def _m_step(points: np.ndarray, resp: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    mass = resp.sum(axis=0)
    if np.any(mass < MIN_COMPONENT_MASS):
        k = int(np.argmin(mass))
        raise DegenerateComponent(
            f"Component {k} has responsibility mass {mass[k]:.3g}; too many components for {points.shape[0]} samples"
        )
    priors = mass / mass.sum()
    means = (resp.T @ points) / mass[:, None]
    covs = np.empty((resp.shape[1], points.shape[1], points.shape[1]))
    for k in range(resp.shape[1]):
        diff = points - means[k]
        covs[k] = floor_eigenvalues((resp[:, k, None] * diff).T @ diff / mass[k])
    return priors, means, covs


def _build_model(
    priors: np.ndarray,
    means: np.ndarray,
    covs: np.ndarray,
    n_iter: int,
    converged: bool,
    trace: Tuple[float, ...],
) -> GmmModel:
    dim = means.shape[1]
    components = tuple(
        GaussianComponent(prior=float(priors[k]), mean=means[k].copy(), covariance=covs[k].copy())
        for k in range(priors.shape[0])
    )
    return GmmModel(
        components=components,
        dim_in=dim - 1,
        dim_out=1,
        n_iter=n_iter,
        converged=converged,
        log_likelihood_trace=trace,
    )


def fit_em(
    data: Dataset,
    n_components: int,
    seed: int = 0,
    max_iter: int = GMM_MAX_ITER,
    tol: float = GMM_TOL,
) -> GmmModel:
    """
    Fits a K-component full-covariance GMM over the joint (u, x) samples by EM.

    Initialization is seeded k-means++ followed by Lloyd iterations; the first
    M-step uses the hard k-means assignment. EM stops once the mean per-sample
    log-likelihood changes by less than `tol` or after `max_iter` M-steps.

    Args:
        data: Joint samples, column 0 input u (rad), column 1 output x (deg).
        n_components: Number of mixture components K >= 1.
        seed: Seed of the k-means++ initialization.
        max_iter: Maximum number of EM iterations.
        tol: Threshold on the change of the log-likelihood divided by the sample count, > 0.

    Returns:
        The fitted GmmModel, with its per-iteration log-likelihood trace.

    Raises:
        EmptyDataset: If there are no samples or fewer samples than components.
        DegenerateComponent: If a component loses its responsibility mass.
    """
    points = np.asarray(data.samples, dtype=float)
    if points.size == 0:
        raise EmptyDataset("Cannot fit a mixture model to an empty dataset")
    if n_components < 1:
        raise ModelFitException(f"n_components must be >= 1, got {n_components}")
    if tol <= 0:
        raise ModelFitException(f"tol must be > 0, got {tol}")
    if points.shape[0] < n_components:
        raise EmptyDataset(f"Need at least {n_components} samples, got {points.shape[0]}")
    if not np.all(np.isfinite(points)):
        raise ModelFitException("Dataset contains non-finite values")

    kmeans = KMeans(n_clusters=n_components, init="k-means++", n_init=1, random_state=sklearn_seed(seed))
    labels = kmeans.fit_predict(points)
    resp = np.zeros((points.shape[0], n_components))
    resp[np.arange(points.shape[0]), labels] = 1.0
    priors, means, covs = _m_step(points, resp)

    weighted = _weighted_log_densities(priors, means, covs, points)
    row_norm = logsumexp(weighted, axis=1)
    ll = float(np.sum(row_norm))
    trace = [ll]
    converged = False
    n_iter = 0

    for n_iter in range(1, max_iter + 1):
        resp = np.exp(weighted - row_norm[:, None])
        priors, means, covs = _m_step(points, resp)
        weighted = _weighted_log_densities(priors, means, covs, points)
        row_norm = logsumexp(weighted, axis=1)
        new_ll = float(np.sum(row_norm))
        trace.append(new_ll)
        if abs(new_ll - ll) < tol * points.shape[0]:
            converged = True
            ll = new_ll
            break
        ll = new_ll

    log.info(
        f"EM fit K={n_components} on {points.shape[0]} samples: "
        f"{n_iter} iterations, LL={ll:.4f}, converged={converged}"
    )
    return _build_model(priors, means, covs, n_iter, converged, tuple(trace))


def responsibilities(model: GmmModel, data: Dataset) -> np.ndarray:
    """Posterior component probabilities of each sample, shape (n, K); rows sum to 1."""
    points = _check_points(model, data)
    weighted = _weighted_log_densities(model.priors, model.means, model.covariances, points)
    return np.exp(weighted - logsumexp(weighted, axis=1)[:, None])


# --- GMR ---


def _gmr_terms(model: GmmModel, us: np.ndarray):
    if model.dim_in != 1 or model.dim_out != 1:
        raise DimensionMismatch(f"GMR supports a scalar input/output map, got {model.dim_in}->{model.dim_out}")
    means = model.means
    covs = model.covariances
    mu_u, mu_x = means[:, 0], means[:, 1]
    s_uu, s_xu, s_xx = covs[:, 0, 0], covs[:, 1, 0], covs[:, 1, 1]
    # Slack for rounding in the eigenvalue-floor reconstruction.
    if np.any(s_uu < COVARIANCE_FLOOR * (1.0 - 1e-9)):
        raise SingularInputBlock(f"Input covariance block below floor {COVARIANCE_FLOOR}: min {s_uu.min():.3g}")

    du = us[:, None] - mu_u[None, :]
    log_marginal = np.log(model.priors)[None, :] - 0.5 * (_LOG_2PI + np.log(s_uu)[None, :] + du**2 / s_uu[None, :])
    h = np.exp(log_marginal - logsumexp(log_marginal, axis=1)[:, None])
    gain = s_xu / s_uu
    local_mean = mu_x[None, :] + gain[None, :] * du
    local_var = s_xx - s_xu**2 / s_uu
    return h, gain, local_mean, local_var, du, s_uu


def gmr_curve(model: GmmModel, us: Any) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized GMR: conditional means and variances of x for each u in `us`."""
    us = np.atleast_1d(np.asarray(us, dtype=float))
    h, _, local_mean, local_var, _, _ = _gmr_terms(model, us)
    mean = np.sum(h * local_mean, axis=1)
    variance = np.sum(h * (local_var[None, :] + local_mean**2), axis=1) - mean**2
    return mean, np.maximum(variance, 0.0)


def gmr_condition(model: GmmModel, u: float) -> Tuple[float, float]:
    """
    Conditional mean (deg) and variance (deg^2) of the bend angle given motor angle u (rad).

    The mean is sum_k h_k(u) (mu_x + S_xu/S_uu (u - mu_u)), where h_k are the
    input-marginal responsibilities.
    """
    mean, variance = gmr_curve(model, [u])
    return float(mean[0]), float(variance[0])


def gmr_slope(model: GmmModel, u: float) -> float:
    """Analytic derivative d mean / du of the GMR conditional mean at u."""
    h, gain, local_mean, _, du, s_uu = _gmr_terms(model, np.array([float(u)]))
    score = -du / s_uu[None, :]
    dh = h * (score - np.sum(h * score, axis=1)[:, None])
    return float(np.sum(h * gain[None, :]) + np.sum(dh * local_mean))


# --- Persistence ---


def model_to_dict(model: GmmModel) -> Dict[str, Any]:
    """Versioned JSON-ready document: priors, means and row-major covariances."""
    return {
        "schema": SCHEMA_VERSION,
        "dim_in": model.dim_in,
        "dim_out": model.dim_out,
        "n_iter": model.n_iter,
        "converged": model.converged,
        "components": [
            {
                "prior": float(c.prior),
                "mean": [float(v) for v in np.asarray(c.mean).ravel()],
                "covariance": [float(v) for v in np.asarray(c.covariance).ravel()],
            }
            for c in model.components
        ],
    }


def model_from_dict(document: Dict[str, Any]) -> GmmModel:
    """Inverse of model_to_dict."""
    if document.get("schema") != SCHEMA_VERSION:
        raise ModelFitException(f"Unsupported model schema {document.get('schema')!r}")
    dim = int(document["dim_in"]) + int(document["dim_out"])
    components = tuple(
        GaussianComponent(
            prior=float(c["prior"]),
            mean=np.asarray(c["mean"], dtype=float),
            covariance=np.asarray(c["covariance"], dtype=float).reshape(dim, dim),
        )
        for c in document["components"]
    )
    return GmmModel(
        components=components,
        dim_in=int(document["dim_in"]),
        dim_out=int(document["dim_out"]),
        n_iter=int(document.get("n_iter", 0)),
        converged=bool(document.get("converged", False)),
    )
