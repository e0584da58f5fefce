"""End-to-end estimator construction on a changed topology.

Two pipelines share the same tail (ARMA fit -> covariance -> LMMSE):

* baseline: fit the filter to the unweighted historical PSD on the
  historical eigenvalue grid and move the coefficients to the current graph;
* density-ratio weighted: reweight each historical sample by the estimated
  ratio of current to historical observation densities, estimate the PSD
  directly on the current basis, and fit there.

Neither pipeline ever touches current ground-truth signals; scenarios only
expose current observations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import density_ratio as dr
from .errors import DegenerateWeights, MappingMismatch
from .graphs import Graph, NodeMapping, SpectralBasis, spectral_decompose
from .recovery import LinearEstimator, ObservationModel, lmmse
from .spectral_fit import (
    ArmaFit,
    PsdEstimate,
    covariance_from_arma,
    fit_arma,
    nonparam_psd,
)


@dataclass(frozen=True)
class RatioConfig:
    b_max: int = dr.DEFAULT_B_MAX
    lambda_grid: Sequence[float] = dr.DEFAULT_LAMBDA_GRID
    cv_folds: int = 5


@dataclass(frozen=True)
class TransferScenario:
    """Everything a transfer pipeline may read for one recovery problem.

    Observation columns follow `observed_ids` order, restricted to the IDs
    present in the respective graph; the same per-ID mask decisions are
    shared between the historical and current sides.
    """

    graph_h: Graph
    graph_c: Graph
    basis_h: SpectralBasis
    basis_c: SpectralBasis
    mapping: NodeMapping
    observed_ids: tuple
    noise_std: float
    x_hist: np.ndarray
    y_hist: np.ndarray
    y_curr: np.ndarray

    def observed_in(self, graph: Graph) -> list:
        present = set(graph.node_ids)
        return [i for i in self.observed_ids if i in present]

    def mask_for(self, graph: Graph) -> ObservationModel:
        idx = tuple(graph.index_of(i) for i in self.observed_in(graph))
        return ObservationModel(observed_nodes=idx, noise_std=self.noise_std)


@dataclass(frozen=True)
class PipelineResult:
    estimator: LinearEstimator
    psd: PsdEstimate
    fit: ArmaFit
    diagnostics: dict = field(default_factory=dict)


def make_scenario(
    graph_h: Graph,
    graph_c: Graph,
    mapping: NodeMapping,
    observed_ids,
    noise_std: float,
    x_hist: np.ndarray,
    y_hist: np.ndarray,
    y_curr: np.ndarray,
) -> TransferScenario:
    return TransferScenario(
        graph_h=graph_h,
        graph_c=graph_c,
        basis_h=spectral_decompose(graph_h),
        basis_c=spectral_decompose(graph_c),
        mapping=mapping,
        observed_ids=tuple(observed_ids),
        noise_std=float(noise_std),
        x_hist=np.atleast_2d(np.asarray(x_hist, dtype=float)),
        y_hist=np.atleast_2d(np.asarray(y_hist, dtype=float)),
        y_curr=np.atleast_2d(np.asarray(y_curr, dtype=float)),
    )


def weighted_psd_nodechange(
    x_hist: np.ndarray,
    weights: np.ndarray,
    basis_c: SpectralBasis,
    mapping: NodeMapping,
) -> PsdEstimate:
    """Weighted PSD of historical signals analyzed on the current basis.

    Each signal is restricted to surviving nodes and projected through the
    corresponding eigenvector rows of the current graph, so the estimate has
    the current graph's length even when node sets differ.  With an identity
    mapping this is the plain weighted estimate on the current basis.
    """
    x_hist = np.atleast_2d(np.asarray(x_hist, dtype=float))
    kept = sorted(mapping.kept)
    if not kept:
        raise MappingMismatch("no shared nodes between graphs")
    try:
        hist_rows = [mapping.hist_index[i] for i in kept]
        curr_rows = [mapping.curr_index[i] for i in kept]
    except KeyError as exc:
        raise MappingMismatch(f"node {exc} missing from index maps") from exc
    if max(hist_rows) >= x_hist.shape[1] or max(curr_rows) >= basis_c.n:
        raise MappingMismatch("index maps exceed graph dimensions")
    spectra = x_hist[:, hist_rows] @ basis_c.eigenvectors[curr_rows, :]
    return nonparam_psd(spectra, basis_c, weights=weights, in_spectral_domain=True)


def baseline_transfer(
    scn: TransferScenario,
    arma_l: int = 5,
    arma_m: int = 2,
    reg_alpha=1e-6,
    reg_beta=1e-6,
    include_noise: bool = True,
    square_response: bool = True,
) -> PipelineResult:
    """Parameter-transfer estimator: filter fitted on the historical grid,
    covariance and LMMSE assembled on the current graph."""
    psd_est = nonparam_psd(scn.x_hist, scn.basis_h)
    fit = fit_arma(
        np.sqrt(psd_est.values),
        scn.basis_h.eigenvalues,
        arma_l=arma_l,
        arma_m=arma_m,
        reg_alpha=reg_alpha,
        reg_beta=reg_beta,
    )
    cov = covariance_from_arma(scn.basis_c, fit.params, square_response)
    mask = scn.mask_for(scn.graph_c)
    estimator = lmmse(cov, np.zeros(scn.basis_c.n), mask, include_noise)
    diagnostics = {
        "method": "armae",
        "solver_iterations": fit.iterations,
        "covariance_convention": "f^2" if square_response else "f",
        "include_noise": include_noise,
    }
    return PipelineResult(estimator=estimator, psd=psd_est, fit=fit, diagnostics=diagnostics)


def _shared_observation_columns(scn: TransferScenario):
    """Column indices of y_hist / y_curr for observed nodes present in both
    graphs; observations on removed or added nodes are not comparable."""
    obs_h = scn.observed_in(scn.graph_h)
    obs_c = scn.observed_in(scn.graph_c)
    shared = [i for i in obs_h if i in scn.mapping.kept and i in set(obs_c)]
    cols_h = [obs_h.index(i) for i in shared]
    cols_c = [obs_c.index(i) for i in shared]
    return cols_h, cols_c


def drw_transfer(
    scn: TransferScenario,
    arma_l: int = 5,
    arma_m: int = 2,
    reg_alpha=1e-6,
    reg_beta=1e-6,
    ratio_config: RatioConfig = RatioConfig(),
    rng=None,
    include_noise: bool = True,
    square_response: bool = True,
    weight_override: Optional[np.ndarray] = None,
) -> PipelineResult:
    """Density-ratio-weighted estimator fitted directly on the current grid.

    weight_override bypasses ratio estimation (testing hook).
    """
    if weight_override is not None:
        weights = np.asarray(weight_override, dtype=float)
        ratio_model = None
    else:
        cols_h, cols_c = _shared_observation_columns(scn)
        if not cols_h:
            raise MappingMismatch("no observed node is shared between graphs")
        y_h = scn.y_hist[:, cols_h]
        y_c = scn.y_curr[:, cols_c]
        basis = dr.build_basis(
            y_c, b_max=ratio_config.b_max, rng=rng, pooled=np.vstack([y_h, y_c])
        )
        ratio_model = dr.fit_ratio(
            y_h, y_c, basis, lambda_grid=ratio_config.lambda_grid,
            cv_folds=ratio_config.cv_folds,
        )
        weights = dr.eval_ratio(ratio_model, y_h)
    if np.all(weights < 1e-12):
        raise DegenerateWeights("all importance weights vanished")
    # Self-normalize so the weights average to one; the PSD estimate then
    # stays on the scale of the unweighted one even when the fitted ratio is
    # miscalibrated overall.  Uniform weights pass through unchanged.
    weights = weights / np.mean(weights)

    psd_est = weighted_psd_nodechange(scn.x_hist, weights, scn.basis_c, scn.mapping)
    fit = fit_arma(
        np.sqrt(psd_est.values),
        scn.basis_c.eigenvalues,
        arma_l=arma_l,
        arma_m=arma_m,
        reg_alpha=reg_alpha,
        reg_beta=reg_beta,
    )
    cov = covariance_from_arma(scn.basis_c, fit.params, square_response)
    mask = scn.mask_for(scn.graph_c)
    estimator = lmmse(cov, np.zeros(scn.basis_c.n), mask, include_noise)
    diagnostics = {
        "method": "armae-drw",
        "solver_iterations": fit.iterations,
        "covariance_convention": "f^2" if square_response else "f",
        "include_noise": include_noise,
        "weight_min": float(np.min(weights)),
        "weight_mean": float(np.mean(weights)),
        "weight_max": float(np.max(weights)),
        "selected_lambda": ratio_model.reg_lambda if ratio_model else None,
    }
    return PipelineResult(estimator=estimator, psd=psd_est, fit=fit, diagnostics=diagnostics)
