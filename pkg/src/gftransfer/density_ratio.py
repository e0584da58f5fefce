"""Least-squares density-ratio estimation r(y) = q_c(y) / q_h(y).

The model is a nonnegative linear combination of Gaussian kernels centered
on current-observation samples.  The weights solve a ridge-regularized
quadratic whose data matrices are empirical second moments of the kernel
features; the ridge parameter is picked by 5-fold cross validation on the
empirical squared-error objective.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import (
    DimensionMismatch,
    EmptySampleSet,
    NonPositiveLambda,
    SingularCovariance,
)

DEFAULT_LAMBDA_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)
DEFAULT_B_MAX = 100
DEFAULT_BANDWIDTH_SCALE = 0.5


@dataclass(frozen=True)
class KernelBasis:
    """Gaussian kernel features phi_l(y) = exp(-||y - c_l||^2 / (2 sigma^2))."""

    centers: np.ndarray
    bandwidth: float

    @property
    def b(self) -> int:
        return self.centers.shape[0]

    def features(self, y: np.ndarray) -> np.ndarray:
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if y.shape[1] != self.centers.shape[1]:
            raise DimensionMismatch(
                f"observation dim {y.shape[1]} != center dim {self.centers.shape[1]}"
            )
        sq = cdist(y, self.centers, "sqeuclidean")
        return np.exp(-sq / (2.0 * self.bandwidth**2))


@dataclass(frozen=True)
class DensityRatioModel:
    basis: KernelBasis
    theta: np.ndarray
    reg_lambda: float


def build_basis(
    y_current: np.ndarray,
    b_max: int = DEFAULT_B_MAX,
    rng=None,
    pooled: Optional[np.ndarray] = None,
    bandwidth_scale: float = DEFAULT_BANDWIDTH_SCALE,
) -> KernelBasis:
    """Centers drawn without replacement from the current samples; bandwidth
    is the median pairwise distance of the pooled samples (falls back to the
    centers, then to 1.0 when degenerate), scaled by bandwidth_scale.  The
    default 0.5 scaling sharpens the kernels enough to resolve the covariance
    shifts seen here, which the raw median consistently over-smooths."""
    y_current = np.atleast_2d(np.asarray(y_current, dtype=float))
    if y_current.shape[0] == 0:
        raise EmptySampleSet("no current samples for basis construction")
    rng = np.random.default_rng(rng)
    b = min(b_max, y_current.shape[0])
    picks = rng.choice(y_current.shape[0], size=b, replace=False)
    centers = y_current[picks]
    ref = np.atleast_2d(pooled) if pooled is not None else centers
    bandwidth = float(np.median(pdist(ref))) if ref.shape[0] > 1 else 0.0
    bandwidth *= float(bandwidth_scale)
    if bandwidth < 1e-12:
        bandwidth = 1.0
    return KernelBasis(centers=centers, bandwidth=bandwidth)


def _moments(phi_h: np.ndarray, phi_c: np.ndarray):
    h_mat = phi_h.T @ phi_h / phi_h.shape[0]
    h_vec = phi_c.mean(axis=0)
    return h_mat, h_vec


def _solve_theta(h_mat, h_vec, lam):
    return np.linalg.solve(h_mat + lam * np.eye(len(h_vec)), h_vec)


def fit_ratio(
    y_hist: np.ndarray,
    y_curr: np.ndarray,
    basis: KernelBasis,
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    cv_folds: int = 5,
) -> DensityRatioModel:
    """Ridge solve theta = (H + lam I)^{-1} h with lam picked by k-fold CV on
    the empirical objective (1/2) theta' H theta - h' theta."""
    y_hist = np.atleast_2d(np.asarray(y_hist, dtype=float))
    y_curr = np.atleast_2d(np.asarray(y_curr, dtype=float))
    if y_hist.shape[0] < 1 or y_curr.shape[0] < 1:
        raise EmptySampleSet("need at least one sample from each distribution")
    if any(lam <= 0 for lam in lambda_grid):
        raise NonPositiveLambda("all ridge parameters must be > 0")
    phi_h = basis.features(y_hist)
    phi_c = basis.features(y_curr)

    lambda_grid = list(lambda_grid)
    if len(lambda_grid) > 1:
        folds_h = np.array_split(np.arange(phi_h.shape[0]), cv_folds)
        folds_c = np.array_split(np.arange(phi_c.shape[0]), cv_folds)
        scores = np.zeros(len(lambda_grid))
        for fh, fc in zip(folds_h, folds_c):
            train_h = np.delete(phi_h, fh, axis=0)
            train_c = np.delete(phi_c, fc, axis=0)
            if train_h.shape[0] == 0 or train_c.shape[0] == 0:
                continue
            h_mat, h_vec = _moments(train_h, train_c)
            val_h, val_c = phi_h[fh], phi_c[fc]
            for j, lam in enumerate(lambda_grid):
                theta = _solve_theta(h_mat, h_vec, lam)
                r_h = val_h @ theta
                r_c = val_c @ theta
                scores[j] += 0.5 * np.mean(r_h**2) - np.mean(r_c)
        best = lambda_grid[int(np.argmin(scores))]
    else:
        best = lambda_grid[0]

    h_mat, h_vec = _moments(phi_h, phi_c)
    theta = _solve_theta(h_mat, h_vec, best)
    return DensityRatioModel(basis=basis, theta=theta, reg_lambda=float(best))


def eval_ratio(model: DensityRatioModel, y: np.ndarray) -> np.ndarray:
    """max(phi(y)' theta, 0); a density ratio is nonnegative by definition."""
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    values = np.maximum(model.basis.features(y) @ model.theta, 0.0)
    return float(values[0]) if single else values


def gaussian_ratio_oracle(cov_h, cov_c, mean_h, mean_c, y):
    """Exact density ratio of two multivariate normals, via log-densities.

    Test oracle for the linear-Gaussian observation model, where y is normal
    with covariance M Sigma M^T + sigma^2 I.
    """
    from scipy.stats import multivariate_normal

    cov_h = np.asarray(cov_h, dtype=float)
    cov_c = np.asarray(cov_c, dtype=float)
    try:
        log_h = multivariate_normal.logpdf(y, mean=mean_h, cov=cov_h)
        log_c = multivariate_normal.logpdf(y, mean=mean_c, cov=cov_c)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularCovariance(str(exc)) from exc
    return np.exp(log_c - log_h)
