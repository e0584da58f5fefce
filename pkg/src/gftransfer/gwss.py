"""Stationary stochastic graph-signal models: PSDs, covariances, sampling."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, TextIO

import numpy as np

from .errors import DimensionMismatch, ZeroSpectrum
from .graphs import SpectralBasis, ZERO_EIG_TOL


@dataclass(frozen=True)
class GwssModel:
    """Gaussian stationary signal model: mean vector and PSD over a basis.

    The covariance is U diag(psd) U^T, so GFT coefficients are uncorrelated
    with variances given by the PSD.
    """

    basis: SpectralBasis
    mean: np.ndarray
    psd: np.ndarray

    def __post_init__(self):
        if len(self.mean) != self.basis.n or len(self.psd) != self.basis.n:
            raise DimensionMismatch("mean/psd length must equal basis size")
        if np.any(self.psd < 0) or not np.all(np.isfinite(self.psd)):
            raise ValueError("psd must be nonnegative and finite")


def psd_historical(basis: SpectralBasis) -> np.ndarray:
    """Low-pass PSD: entry i is 1 - lambda_i / lambda_max, values in [0, 1]."""
    lam_max = basis.eigenvalues[-1]
    if lam_max <= ZERO_EIG_TOL:
        raise ZeroSpectrum("edgeless graph has no spectral spread")
    return 1.0 - basis.eigenvalues / lam_max


def psd_current(basis: SpectralBasis) -> np.ndarray:
    """Reciprocal PSD: entry i is 1/lambda_i, with 0 on the Laplacian null
    space (eigenvalues below 1e-9), so DC components carry no variance."""
    lam = basis.eigenvalues
    psd = np.zeros_like(lam)
    positive = lam > ZERO_EIG_TOL
    psd[positive] = 1.0 / lam[positive]
    return psd


def covariance(model: GwssModel) -> np.ndarray:
    u = model.basis.eigenvectors
    return (u * model.psd) @ u.T


def sample(model: GwssModel, count: int, rng=None) -> np.ndarray:
    """Draw `count` i.i.d. signals, returned as a (count, N) array.

    Uses x = mu + U diag(sqrt(p)) z with z standard normal, which realizes
    the covariance exactly without factorizing it.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(rng)
    z = rng.standard_normal((count, model.basis.n))
    x = (z * np.sqrt(model.psd)) @ model.basis.eigenvectors.T
    return x + model.mean


def save_signals(fh: TextIO, node_ids, signals: np.ndarray) -> None:
    """CSV batch: header row of node IDs, one row per sample."""
    writer = csv.writer(fh)
    writer.writerow(node_ids)
    for row in np.atleast_2d(signals):
        writer.writerow([repr(float(v)) for v in row])


def load_signals(fh: TextIO):
    """Inverse of save_signals; returns (node_ids, (K, N) array)."""
    reader = csv.reader(fh)
    node_ids = tuple(int(t) for t in next(reader))
    rows = [[float(t) for t in row] for row in reader if row]
    return node_ids, np.array(rows)
