"""Tests for the covariance estimators."""

import numpy as np
import pytest

from ditherdoa.covariance import (
    OuterProductAccumulator,
    prefix_covariances,
    rect_covariance,
    sample_covariance,
    tri_covariance,
)
from ditherdoa.experiments import fit_loglog_slope
from ditherdoa.linalg import hermitian_eig
from ditherdoa.quantizers import QuantizedPair, rect_quantize_pair, tri_quantize
from ditherdoa.rng import RngStream, standard_normal


def streams(seed, k=0):
    return RngStream(seed, 2 * k), RngStream(seed, 2 * k + 1)


class TestRectCovariance:
    def test_single_pair_formula(self):
        q = np.array([1.0, -1.0])
        est = rect_covariance(QuantizedPair(q, q), lam=2.0)
        assert np.allclose(est.matrix, 4.0 * np.array([[1, -1], [-1, 1]]))
        assert est.n_samples == 1

    def test_exactly_hermitian(self):
        rng = np.random.default_rng(1)
        q = np.sign(rng.standard_normal((3, 50))) + 1j * np.sign(rng.standard_normal((3, 50)))
        qd = np.sign(rng.standard_normal((3, 50))) + 1j * np.sign(rng.standard_normal((3, 50)))
        est = rect_covariance(QuantizedPair(q, qd), lam=1.0)
        assert np.array_equal(est.matrix, est.matrix.conj().T)

    def test_unbiased_for_bounded_signal(self):
        n, lam = 100_000, 2.0
        x = np.array([1.2, -0.8, 0.5, 1.9])
        y = np.tile(x[:, None], (1, n))
        pair = rect_quantize_pair(y, lam, *streams(2))
        est = rect_covariance(pair, lam)
        assert np.max(np.abs(est.matrix - np.outer(x, x))) <= 5 * lam**2 / np.sqrt(n)

    def test_lambda_scaling(self):
        q = np.sign(np.random.default_rng(3).standard_normal((2, 20)))
        qd = np.sign(np.random.default_rng(4).standard_normal((2, 20)))
        pair = QuantizedPair(q, qd)
        one = rect_covariance(pair, 1.0).matrix
        scaled = rect_covariance(pair, 3.0).matrix
        assert np.allclose(scaled, 9.0 * one)

    def test_sqrt_n_consistency_rate(self):
        lam = 2.0
        x = np.array([1.0, -0.5, 0.3])
        grid = [100, 1_000, 10_000, 100_000]
        errs = []
        for i, n in enumerate(grid):
            trial_errs = []
            for t in range(5):
                pair = rect_quantize_pair(np.tile(x[:, None], (1, n)), lam, *streams(5, 10 * i + t))
                err = np.linalg.norm(rect_covariance(pair, lam).matrix - np.outer(x, x), 2)
                trial_errs.append(err)
            errs.append(np.median(trial_errs))
        slope, _ = fit_loglog_slope(grid, errs)
        assert -0.65 <= slope <= -0.35

    def test_empty_batch(self):
        with pytest.raises(ValueError):
            rect_covariance([], lam=1.0)


class TestTriCovariance:
    def test_single_snapshot_formula(self):
        mu = 0.5
        est = tri_covariance(np.array([mu, -mu]))
        assert np.allclose(est.matrix, mu**2 * np.array([[1, -1], [-1, 1]]))

    def test_pure_dither_diagonal(self):
        n, mu = 100_000, 1.0
        q = tri_quantize(np.zeros((4, n)), mu, *streams(6))
        est = tri_covariance(q)
        assert np.max(np.abs(np.diag(est.matrix) - mu**2)) <= 0.02 * mu**2

    def test_diagonal_inflation_real(self):
        # diagonal of E estimate = diag(x x*) + (mu^2 + nu^2) for real data
        n, mu, nu = 200_000, 0.8, 0.3
        x = np.array([0.4, -0.2, 0.6])
        e = nu * standard_normal(RngStream(50, 0), 3 * n).reshape(3, n)
        q = tri_quantize(x[:, None] + e, mu, *streams(7))
        est = tri_covariance(q)
        shift = np.mean(np.diag(est.matrix)) - np.mean(x**2)
        three_sigma = 3 * np.sqrt(2.0 / n) * (mu**2 + nu**2) * 2
        assert abs(shift - (mu**2 + nu**2)) <= three_sigma

    def test_diagonal_inflation_complex(self):
        # per-part noise variance nu^2 => complex diagonal shift 2 (mu^2 + nu^2)
        n, mu, nu = 200_000, 0.8, 0.3
        x = np.array([0.4 - 0.1j, 0.2 + 0.3j])
        g = standard_normal(RngStream(51, 0), 4 * n)
        e = nu * (g[: 2 * n] + 1j * g[2 * n :]).reshape(2, n)
        q = tri_quantize(x[:, None] + e, mu, *streams(8))
        est = tri_covariance(q)
        shift = np.mean(np.diag(est.matrix).real) - np.mean(np.abs(x) ** 2)
        three_sigma = 3 * np.sqrt(2.0 / n) * 2 * (mu**2 + nu**2) * 2
        assert abs(shift - 2 * (mu**2 + nu**2)) <= three_sigma

    def test_rank_one_eigenvector_preserved(self):
        n, mu = 100_000, 0.5
        v = np.array([0.6, 0.8])
        data = v[:, None] * np.sign(standard_normal(RngStream(52, 0), n))[None, :]
        q = tri_quantize(data, mu, *streams(9))
        est = tri_covariance(q)
        lead = hermitian_eig(est.matrix).eigenvectors[:, 0]
        assert abs(np.dot(lead, v)) >= 0.99

    def test_psd(self):
        rng = np.random.default_rng(10)
        q = rng.standard_normal((5, 40))
        w = hermitian_eig(tri_covariance(q).matrix).eigenvalues
        assert w[-1] >= -1e-10 * max(w[0], 1e-30)


class TestSampleCovariance:
    def test_identity(self):
        est = sample_covariance(np.eye(2))
        assert np.allclose(est.matrix, 0.5 * np.eye(2))

    def test_single_column(self):
        y = np.array([1.0, 2.0, -1.0])
        assert np.allclose(sample_covariance(y).matrix, np.outer(y, y))

    def test_psd_on_random_batches(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            p, n = rng.integers(1, 8), rng.integers(1, 20)
            y = rng.standard_normal((p, n)) + 1j * rng.standard_normal((p, n))
            w = hermitian_eig(sample_covariance(y).matrix).eigenvalues
            assert w[-1] >= -1e-10 * max(w[0], 1e-30)


class TestAccumulation:
    def test_partition_invariance(self):
        rng = np.random.default_rng(12)
        q = rng.standard_normal((4, 90))
        whole = OuterProductAccumulator(4, complex_field=False)
        whole.update(q)
        left = OuterProductAccumulator(4, complex_field=False)
        right = OuterProductAccumulator(4, complex_field=False)
        left.update(q[:, :37])
        right.update(q[:, 37:])
        left.merge(right)
        norm = np.linalg.norm(whole.sum, 2)
        assert np.max(np.abs(whole.sum - left.sum)) <= 1e-12 * norm
        assert left.count == whole.count == 90

    def test_prefix_matches_one_shot(self):
        rng = np.random.default_rng(13)
        q = rng.standard_normal((3, 100)) + 1j * rng.standard_normal((3, 100))
        qd = rng.standard_normal((3, 100)) + 1j * rng.standard_normal((3, 100))
        grid = [10, 40, 100]
        prefixes = list(prefix_covariances(q, grid, lam=1.5, columns_dot=qd))
        for n, est in zip(grid, prefixes):
            direct = rect_covariance(QuantizedPair(q[:, :n], qd[:, :n]), 1.5)
            assert np.max(np.abs(est.matrix - direct.matrix)) < 1e-12
            assert est.n_samples == n

    def test_prefix_grid_validation(self):
        q = np.zeros((2, 10))
        with pytest.raises(ValueError):
            list(prefix_covariances(q, [5, 5]))
        with pytest.raises(ValueError):
            list(prefix_covariances(q, [5, 20]))
