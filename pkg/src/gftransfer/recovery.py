"""Observation model (node masking + Gaussian noise) and the LMMSE estimator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidProbability, SingularSystem

PINV_RTOL = 1e-10


@dataclass(frozen=True)
class ObservationModel:
    """Row-selection mask over node indices plus additive noise level."""

    observed_nodes: tuple
    noise_std: float = 0.0

    def __post_init__(self):
        if len(self.observed_nodes) < 1:
            raise DimensionMismatch("at least one node must be observed")
        if len(set(self.observed_nodes)) != len(self.observed_nodes):
            raise DimensionMismatch("observed_nodes must be distinct")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")

    @property
    def d(self) -> int:
        return len(self.observed_nodes)

    def selection(self, n: int) -> np.ndarray:
        """Dense d x N selection matrix."""
        m = np.zeros((self.d, n))
        m[np.arange(self.d), list(self.observed_nodes)] = 1.0
        return m


@dataclass(frozen=True)
class LinearEstimator:
    """Affine recovery map x_hat = gain @ y + offset."""

    gain: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        if not (np.all(np.isfinite(self.gain)) and np.all(np.isfinite(self.offset))):
            raise SingularSystem("estimator has non-finite entries")
        if self.gain.shape[0] != self.offset.shape[0]:
            raise DimensionMismatch("gain/offset shapes inconsistent")


def make_mask(n: int, missing_prob: float, rng=None, noise_std: float = 0.0) -> ObservationModel:
    """Each node missing independently with missing_prob; resampled until at
    least one node is observed."""
    if not 0.0 <= missing_prob < 1.0:
        raise InvalidProbability(f"missing_prob = {missing_prob}")
    rng = np.random.default_rng(rng)
    while True:
        observed = np.nonzero(rng.random(n) >= missing_prob)[0]
        if observed.size:
            return ObservationModel(tuple(int(i) for i in observed), noise_std)


def observe(m: ObservationModel, x: np.ndarray, rng=None) -> np.ndarray:
    """y = x restricted to the observed nodes plus N(0, sigma^2) noise.

    Accepts a single signal or a (K, N) batch.
    """
    rng = np.random.default_rng(rng)
    x = np.asarray(x, dtype=float)
    idx = list(m.observed_nodes)
    if max(idx) >= x.shape[-1]:
        raise DimensionMismatch("mask indexes beyond signal length")
    y = x[..., idx]
    if m.noise_std > 0:
        y = y + rng.normal(0.0, m.noise_std, size=y.shape)
    return y


def lmmse(
    cov: np.ndarray,
    mean: np.ndarray,
    m: ObservationModel,
    include_noise: bool = True,
) -> LinearEstimator:
    """Closed-form LMMSE gain Q = Sigma M^T (M Sigma M^T [+ sigma^2 I])^{-1}.

    include_noise=False drops the noise term from the inner matrix.  A
    pseudo-inverse (relative cutoff 1e-10) handles singular inner matrices.
    """
    cov = np.asarray(cov, dtype=float)
    mean = np.asarray(mean, dtype=float)
    n = cov.shape[0]
    if cov.shape != (n, n) or mean.shape != (n,):
        raise DimensionMismatch("cov must be N x N and mean length N")
    idx = list(m.observed_nodes)
    if max(idx) >= n:
        raise DimensionMismatch("mask indexes beyond covariance size")
    cross = cov[:, idx]
    inner = cov[np.ix_(idx, idx)]
    if include_noise and m.noise_std > 0:
        inner = inner + m.noise_std**2 * np.eye(len(idx))
    if not np.all(np.isfinite(inner)):
        raise SingularSystem("inner matrix has non-finite entries")
    gain = cross @ np.linalg.pinv(inner, rcond=PINV_RTOL, hermitian=True)
    offset = mean - gain @ mean[idx]
    return LinearEstimator(gain=gain, offset=offset)


def recover(est: LinearEstimator, y: np.ndarray) -> np.ndarray:
    """x_hat = Q y + b for a single observation or a (K, d) batch."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != est.gain.shape[1]:
        raise DimensionMismatch("observation length does not match gain")
    return y @ est.gain.T + est.offset


def mse(x_hat: np.ndarray, x: np.ndarray) -> float:
    """(1/N) ||x_hat - x||_2^2, averaged over the batch when 2-D."""
    x_hat = np.asarray(x_hat, dtype=float)
    x = np.asarray(x, dtype=float)
    if x_hat.shape != x.shape:
        raise DimensionMismatch(f"{x_hat.shape} vs {x.shape}")
    return float(np.mean((x_hat - x) ** 2))
