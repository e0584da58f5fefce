"""Least-squares density-ratio estimation against analytic Gaussian oracles."""

import numpy as np
import pytest

from gftransfer.density_ratio import (
    KernelBasis,
    build_basis,
    eval_ratio,
    fit_ratio,
    gaussian_ratio_oracle,
)
from gftransfer.errors import (
    DimensionMismatch,
    EmptySampleSet,
    NonPositiveLambda,
    SingularCovariance,
)


@pytest.fixture
def gaussian_shift(rng):
    """1-D N(0,1) historical vs N(0,2) current samples."""
    y_h = rng.normal(0.0, 1.0, (5000, 1))
    y_c = rng.normal(0.0, np.sqrt(2.0), (5000, 1))
    return y_h, y_c


class TestBuildBasis:
    def test_few_samples_all_centers(self, rng):
        y = rng.normal(size=(3, 2))
        basis = build_basis(y, b_max=100, rng=rng)
        assert basis.b == 3
        assert all(any(np.array_equal(c, s) for s in y) for c in basis.centers)

    def test_degenerate_bandwidth_fallback(self, rng):
        y = np.ones((10, 2))
        basis = build_basis(y, b_max=5, rng=rng)
        assert basis.bandwidth == 1.0

    def test_median_heuristic_scale(self, rng):
        y = rng.normal(size=(500, 2))
        basis = build_basis(y, b_max=50, rng=rng)
        from scipy.spatial.distance import pdist

        med = np.median(pdist(y))
        assert 0.5 * med <= basis.bandwidth <= 2.0 * med

    def test_empty_rejected(self, rng):
        with pytest.raises(EmptySampleSet):
            build_basis(np.zeros((0, 2)), b_max=10, rng=rng)

    def test_kernel_values_bounded(self, rng):
        y = rng.normal(size=(50, 3))
        basis = build_basis(y, b_max=10, rng=rng)
        phi = basis.features(y)
        assert np.all(phi > 0) and np.all(phi <= 1)


class TestFitRatio:
    def test_no_shift_mean_near_one(self, rng):
        y_h = rng.normal(size=(2000, 2))
        y_c = rng.normal(size=(2000, 2))
        basis = build_basis(y_c, b_max=100, rng=rng)
        model = fit_ratio(y_h, y_c, basis)
        r = eval_ratio(model, y_h)
        assert 0.8 < r.mean() < 1.2

    def test_ridge_limit_shrinks(self, rng, gaussian_shift):
        y_h, y_c = gaussian_shift
        basis = build_basis(y_c, b_max=50, rng=rng)
        model = fit_ratio(y_h, y_c, basis, lambda_grid=(1e6,))
        phi_c = basis.features(y_c)
        h_vec = phi_c.mean(axis=0)
        assert np.linalg.norm(model.theta) < 1e-3 * np.linalg.norm(h_vec)

    def test_importance_weighted_second_moment(self, rng, gaussian_shift):
        y_h, y_c = gaussian_shift
        basis = build_basis(y_c, b_max=100, rng=rng)
        model = fit_ratio(y_h, y_c, basis)
        r = eval_ratio(model, y_h)
        second = np.mean(r * y_h[:, 0] ** 2)
        assert abs(second - 2.0) / 2.0 < 0.15

    def test_gradient_optimality(self, rng, gaussian_shift):
        # theta solves (H + lam I) theta = h exactly
        y_h, y_c = gaussian_shift
        basis = build_basis(y_c, b_max=50, rng=rng)
        model = fit_ratio(y_h, y_c, basis)
        phi_h = basis.features(y_h)
        phi_c = basis.features(y_c)
        h_mat = phi_h.T @ phi_h / len(y_h)
        h_vec = phi_c.mean(axis=0)
        grad = (h_mat + model.reg_lambda * np.eye(basis.b)) @ model.theta - h_vec
        assert np.linalg.norm(grad) < 1e-8 * np.linalg.norm(h_vec)

    def test_nonpositive_lambda_rejected(self, rng, gaussian_shift):
        y_h, y_c = gaussian_shift
        basis = build_basis(y_c, b_max=20, rng=rng)
        with pytest.raises(NonPositiveLambda):
            fit_ratio(y_h, y_c, basis, lambda_grid=(0.0,))

    def test_dimension_mismatch(self, rng):
        basis = KernelBasis(centers=rng.normal(size=(5, 2)), bandwidth=1.0)
        with pytest.raises(DimensionMismatch):
            fit_ratio(rng.normal(size=(10, 3)), rng.normal(size=(10, 2)), basis)


class TestEvalRatio:
    def test_zero_theta(self, rng):
        basis = KernelBasis(centers=rng.normal(size=(4, 2)), bandwidth=1.0)
        model_cls = type(
            "M", (), {"basis": basis, "theta": np.zeros(4), "reg_lambda": 0.1}
        )
        assert np.all(eval_ratio(model_cls, rng.normal(size=(6, 2))) == 0.0)

    def test_kernel_at_own_center(self, rng):
        centers = rng.normal(size=(3, 2))
        basis = KernelBasis(centers=centers, bandwidth=1.0)
        theta = np.array([1.0, 0.0, 0.0])
        model = type("M", (), {"basis": basis, "theta": theta, "reg_lambda": 0.1})
        assert eval_ratio(model, centers[0:1])[0] == pytest.approx(1.0)

    def test_clipping_nonnegative(self, rng):
        basis = KernelBasis(centers=rng.normal(size=(4, 2)), bandwidth=1.0)
        theta = np.array([-5.0, -1.0, -2.0, -0.5])
        model = type("M", (), {"basis": basis, "theta": theta, "reg_lambda": 0.1})
        assert np.all(eval_ratio(model, rng.normal(size=(20, 2))) >= 0.0)

    def test_correlation_with_analytic_ratio(self, rng):
        # Linear-Gaussian observation pair: 5 observed nodes of a stationary
        # signal whose PSD switches between the two canonical shapes, plus
        # observation noise.  The analytic ratio is a quotient of normals.
        from gftransfer.graphs import gen_er, spectral_decompose
        from gftransfer.gwss import psd_current, psd_historical

        g = gen_er(20, 0.3, rng=rng)
        b = spectral_decompose(g)
        u = b.eigenvectors
        sel = np.eye(20)[rng.choice(20, 5, replace=False)]
        cov_h = sel @ u @ np.diag(psd_historical(b)) @ u.T @ sel.T + 0.1 * np.eye(5)
        cov_c = sel @ u @ np.diag(psd_current(b)) @ u.T @ sel.T + 0.1 * np.eye(5)
        y_h = rng.multivariate_normal(np.zeros(5), cov_h, 5000)
        y_c = rng.multivariate_normal(np.zeros(5), cov_c, 5000)
        basis = build_basis(y_c, b_max=100, rng=rng, pooled=np.vstack([y_h, y_c]))
        model = fit_ratio(y_h, y_c, basis)
        y_test = rng.multivariate_normal(np.zeros(5), cov_h, 3000)
        est = eval_ratio(model, y_test)
        true = gaussian_ratio_oracle(cov_h, cov_c, np.zeros(5), np.zeros(5), y_test)
        assert np.corrcoef(est, true)[0, 1] > 0.9


class TestGaussianRatioOracle:
    def test_identical_distributions(self, rng):
        cov = np.eye(3)
        y = rng.normal(size=(10, 3))
        np.testing.assert_allclose(
            gaussian_ratio_oracle(cov, cov, np.zeros(3), np.zeros(3), y), 1.0
        )

    def test_1d_normalizing_constants(self):
        val = gaussian_ratio_oracle(
            np.eye(1), 2.0 * np.eye(1), np.zeros(1), np.zeros(1), np.zeros((1, 1))
        )
        assert float(val) == pytest.approx(1.0 / np.sqrt(2.0))

    def test_matches_direct_quotient(self, rng):
        from scipy.stats import multivariate_normal

        a = rng.normal(size=(3, 3))
        b = rng.normal(size=(3, 3))
        cov_h = a @ a.T + 0.5 * np.eye(3)
        cov_c = b @ b.T + 0.5 * np.eye(3)
        y = rng.normal(size=(5, 3))
        oracle = gaussian_ratio_oracle(cov_h, cov_c, np.zeros(3), np.zeros(3), y)
        direct = multivariate_normal(np.zeros(3), cov_c).pdf(y) / multivariate_normal(
            np.zeros(3), cov_h
        ).pdf(y)
        np.testing.assert_allclose(oracle, direct, rtol=1e-10)

    def test_singular_covariance_rejected(self, rng):
        with pytest.raises(SingularCovariance):
            gaussian_ratio_oracle(
                np.zeros((2, 2)), np.eye(2), np.zeros(2), np.zeros(2), np.zeros((1, 2))
            )
