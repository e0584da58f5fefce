"""PSD estimation and constrained ARMA graph-filter fitting.

The ARMA fit minimizes

    || P (1 + Phi1 a) - Phi2 b ||^2 + a' Ra a + b' Rb b
    s.t.  1 + Phi1 a >= 0,  Phi2 b >= 0,

a convex QP in the stacked coefficients.  It is solved by a primal
active-set method: iterates stay feasible, the objective is monotone
nonincreasing, and termination is at exact KKT up to tolerance.  The
eigenvalue grid is rescaled to [0, 1] internally for conditioning; the
returned coefficients apply to the unscaled grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

import numpy as np
from scipy.linalg import null_space

from .errors import (
    EmptySampleSet,
    NegativeWeight,
    PoleOnGrid,
    SolverDiverged,
)
from .graphs import SpectralBasis

CONSTRAINT_SLACK = 1e-9
KKT_TOL = 1e-8
MAX_ITER = 10_000
STALL_LIMIT = 100


@dataclass(frozen=True)
class PsdEstimate:
    values: np.ndarray
    sample_count: int
    weighted: bool = False


@dataclass(frozen=True)
class ArmaParams:
    """Rational filter f(lam) = sum_l beta_l lam^l / (1 + sum_m alpha_m lam^m)."""

    beta: np.ndarray
    alpha: np.ndarray

    @property
    def orders(self):
        return len(self.beta) - 1, len(self.alpha)


@dataclass(frozen=True)
class ArmaFit:
    """Solver output: fitted parameters plus diagnostics."""

    params: ArmaParams
    objective: float
    iterations: int
    objective_history: np.ndarray
    kkt_residual: float


def nonparam_psd(
    signals: np.ndarray,
    basis: SpectralBasis,
    weights: Optional[np.ndarray] = None,
    in_spectral_domain: bool = False,
) -> PsdEstimate:
    """Average of (per-sample) squared GFT coefficients, optionally weighted.

    The weighted estimate is (1/K) sum_k w_k (U^T x_k)^2; unit weights
    reproduce the plain estimator bitwise.
    """
    signals = np.atleast_2d(np.asarray(signals, dtype=float))
    k = signals.shape[0]
    if k == 0:
        raise EmptySampleSet("no samples")
    if weights is None:
        weights = np.ones(k)
        weighted = False
    else:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (k,):
            raise EmptySampleSet("weights length must match sample count")
        if np.any(weights < 0):
            raise NegativeWeight("sample weights must be nonnegative")
        weighted = True
    spectra = signals if in_spectral_domain else signals @ basis.eigenvectors
    values = (weights @ spectra**2) / k
    return PsdEstimate(values=values, sample_count=k, weighted=weighted)


def vandermonde(eigenvalues: np.ndarray, arma_l: int, arma_m: int):
    """(Phi1, Phi2): columns lam..lam^M and 1..lam^L over the grid."""
    lam = np.asarray(eigenvalues, dtype=float)
    phi1 = np.column_stack([lam**m for m in range(1, arma_m + 1)])
    phi2 = np.column_stack([lam**l for l in range(arma_l + 1)])
    return phi1, phi2


def arma_eval(eigenvalues: np.ndarray, params: ArmaParams) -> np.ndarray:
    """Entrywise rational response on the grid; raises PoleOnGrid near poles."""
    lam = np.asarray(eigenvalues, dtype=float)
    arma_l, arma_m = params.orders
    num = np.polynomial.polynomial.polyval(lam, params.beta)
    den = 1.0 + np.polynomial.polynomial.polyval(
        lam, np.concatenate([[0.0], params.alpha])
    )
    if np.any(np.abs(den) < 1e-12):
        raise PoleOnGrid("denominator vanishes on the evaluation grid")
    return num / den


def _reg_matrix(reg, size: int, scale_powers: np.ndarray) -> np.ndarray:
    """Regularizer in scaled coordinates; `reg` is a ridge scalar or matrix."""
    d = np.diag(scale_powers)
    if np.isscalar(reg):
        r = float(reg) * np.eye(size)
    else:
        r = np.asarray(reg, dtype=float)
    return d @ r @ d


def fit_arma(
    target: np.ndarray,
    eigenvalues: np.ndarray,
    arma_l: int = 5,
    arma_m: int = 2,
    reg_alpha=1e-6,
    reg_beta=1e-6,
    max_iter: int = MAX_ITER,
    den_floor: float = 1e-3,
) -> ArmaFit:
    """Fit ARMA coefficients so the response tracks `target` (typically
    sqrt of a PSD estimate) on the eigenvalue grid.

    The denominator is constrained to stay >= den_floor on the grid (not
    just >= 0): the objective is indifferent to the denominator wherever the
    target vanishes and otherwise drives it to exact zero there, which would
    put a pole of the rational response on the grid.
    """
    target = np.asarray(target, dtype=float)
    lam = np.asarray(eigenvalues, dtype=float)
    if target.shape != lam.shape:
        raise EmptySampleSet("target and grid lengths differ")
    if np.any(target < 0):
        raise NegativeWeight("target must be nonnegative")

    scale = float(lam.max()) if lam.max() > 0 else 1.0
    lam_s = lam / scale
    phi1, phi2 = vandermonde(lam_s, arma_l, arma_m)
    n_a, n_b = arma_m, arma_l + 1

    # residual = B x + t with x = [alpha_scaled; beta_scaled]
    b_mat = np.hstack([target[:, None] * phi1, -phi2])
    alpha_pows = scale ** -np.arange(1, arma_m + 1)
    beta_pows = scale ** -np.arange(arma_l + 1)
    reg = np.zeros((n_a + n_b, n_a + n_b))
    reg[:n_a, :n_a] = _reg_matrix(reg_alpha, n_a, alpha_pows)
    reg[n_a:, n_a:] = _reg_matrix(reg_beta, n_b, beta_pows)

    hess = 2.0 * (b_mat.T @ b_mat + reg)
    hess += 1e-12 * max(1.0, np.trace(hess) / hess.shape[0]) * np.eye(hess.shape[0])
    lin = 2.0 * b_mat.T @ target
    const = float(target @ target)

    # constraints G x >= bounds
    g_mat = np.zeros((2 * len(lam), n_a + n_b))
    g_mat[: len(lam), :n_a] = phi1
    g_mat[len(lam) :, n_a:] = phi2
    bounds = np.concatenate([(den_floor - 1.0) * np.ones(len(lam)), np.zeros(len(lam))])

    def objective(x):
        r = b_mat @ x + target
        return float(r @ r + x @ reg @ x)

    x = np.zeros(n_a + n_b)
    x[n_a] = 1.0  # beta_0 = 1: strictly feasible start
    working: list[int] = []
    history = [objective(x)]
    kkt_residual = np.inf
    stall = 0
    it = 0
    for it in range(1, max_iter + 1):
        grad = hess @ x + lin
        if working:
            g_w = g_mat[working]
            z = null_space(g_w)
        else:
            g_w = np.zeros((0, n_a + n_b))
            z = np.eye(n_a + n_b)
        if z.shape[1] > 0:
            reduced = z.T @ hess @ z
            p = z @ np.linalg.solve(reduced, -(z.T @ grad))
        else:
            p = np.zeros(n_a + n_b)

        # p solves the working-set EQP, so the decrease it offers is p'Hp/2;
        # treat it as zero once that drops to rounding level.
        predicted_drop = 0.5 * float(p @ hess @ p)
        if predicted_drop <= 1e-14 * (1.0 + abs(history[-1])):
            if working:
                mu, *_ = np.linalg.lstsq(g_w.T, grad, rcond=None)
                kkt_residual = float(np.linalg.norm(grad - g_w.T @ mu))
                worst = int(np.argmin(mu))
                if mu[worst] >= -KKT_TOL * (1.0 + np.linalg.norm(grad)):
                    break
                working.pop(worst)
            else:
                kkt_residual = float(np.linalg.norm(grad))
                break
            history.append(objective(x))
            continue

        step = 1.0
        blocking = -1
        gp = g_mat @ p
        slack = g_mat @ x - bounds
        candidates = np.nonzero(gp < -1e-14)[0]
        for i in candidates:
            if i in working:
                continue
            ratio = slack[i] / (-gp[i])
            if ratio < step:
                step = ratio
                blocking = int(i)
        x = x + step * p
        if blocking >= 0:
            working.append(blocking)
        obj = objective(x)
        stall = stall + 1 if obj > history[-1] - 1e-15 else 0
        if stall >= STALL_LIMIT:
            raise SolverDiverged("objective stalled for 100 iterations")
        history.append(obj)
    else:
        if kkt_residual > KKT_TOL * (1.0 + abs(history[-1])):
            raise SolverDiverged("iteration cap reached before KKT convergence")

    alpha = x[:n_a] * alpha_pows
    beta = x[n_a:] * beta_pows
    params = ArmaParams(beta=beta, alpha=alpha)
    return ArmaFit(
        params=params,
        objective=history[-1],
        iterations=it,
        objective_history=np.array(history),
        kkt_residual=kkt_residual,
    )


def covariance_from_arma(
    basis: SpectralBasis, params: ArmaParams, square_response: bool = True
) -> np.ndarray:
    """Covariance U diag(f^2) U^T from the fitted response on the basis grid.

    The fit targets sqrt of the PSD, so the PSD is the squared response;
    square_response=False keeps diag(f) for comparison.
    """
    f = arma_eval(basis.eigenvalues, params)
    psd = f**2 if square_response else f
    u = basis.eigenvectors
    return (u * psd) @ u.T


def save_arma(fit: ArmaFit, fh: TextIO) -> None:
    """Structured text record: orders, coefficients, solver diagnostics."""
    arma_l, arma_m = fit.params.orders
    fh.write(f"orders {arma_l} {arma_m}\n")
    fh.write("beta " + " ".join(repr(float(v)) for v in fit.params.beta) + "\n")
    fh.write("alpha " + " ".join(repr(float(v)) for v in fit.params.alpha) + "\n")
    fh.write(f"objective {fit.objective!r}\n")
    fh.write(f"iterations {fit.iterations}\n")
    fh.write(f"kkt_residual {fit.kkt_residual!r}\n")


def load_arma(fh: TextIO) -> ArmaParams:
    fields = {}
    for line in fh:
        key, *rest = line.split()
        fields[key] = rest
    return ArmaParams(
        beta=np.array([float(v) for v in fields["beta"]]),
        alpha=np.array([float(v) for v in fields.get("alpha", [])]),
    )
