"""Tests for the scalar quantizers and bit accounting."""

import numpy as np
import pytest

from ditherdoa.quantizers import (
    QuantizedPair,
    QuantizerSpec,
    SnapshotBatch,
    bbit_resolution,
    bits_used,
    direct_round,
    quantize_batch,
    rect_quantize_pair,
    sign_complex,
    sign_real,
    tri_quantize,
    uniform_quantize,
)
from ditherdoa.rng import RngStream, standard_normal


def streams(seed, k=0):
    return RngStream(seed, 2 * k), RngStream(seed, 2 * k + 1)


class TestSign:
    def test_zero_maps_up(self):
        assert np.array_equal(sign_real(np.array([-0.1, 0.0, 2.0])), [-1.0, 1.0, 1.0])

    def test_all_positive(self):
        assert np.all(sign_real(np.abs(np.random.default_rng(0).standard_normal(50)) + 0.1) == 1)

    def test_idempotent(self):
        x = np.random.default_rng(1).standard_normal(100)
        assert np.array_equal(sign_real(sign_real(x)), sign_real(x))

    def test_complex_per_part(self):
        assert sign_complex(np.array([1 - 2j]))[0] == 1 - 1j
        assert sign_complex(np.array([0j]))[0] == 1 + 1j

    def test_complex_modulus(self):
        z = np.random.default_rng(2).standard_normal(64) * (1 + 1j)
        assert np.allclose(np.abs(sign_complex(z)) ** 2, 2.0)


class TestRectPair:
    def test_negligible_dither_limit(self):
        y = np.array([0.5, -0.3, 2.0, -1.0])
        pair = rect_quantize_pair(y, 1e-12, *streams(3))
        assert np.array_equal(pair.q, sign_real(y))
        assert np.array_equal(pair.q_dot, sign_real(y))

    def test_symmetric_dither_at_zero(self):
        pair = rect_quantize_pair(np.zeros(100_000), 1.0, *streams(4))
        assert abs(pair.q.mean()) < 0.02

    def test_unbiased_scalar_mean(self):
        # P(q = +1) = (lam + y) / (2 lam), so E[lam q] = y
        y, lam = 0.5, 1.0
        pair = rect_quantize_pair(np.full(1_000_000, y), lam, *streams(5))
        assert abs(lam * pair.q.mean() - y) < 0.01

    def test_pair_product_unbiased_real(self):
        y, lam = 0.8, 1.5
        pair = rect_quantize_pair(np.full(1_000_000, y), lam, *streams(6))
        prod = lam**2 * pair.q * pair.q_dot
        # 4 sigma Monte-Carlo corridor around y * y
        sigma = prod.std() / 1000
        assert abs(prod.mean() - y * y) < 4 * sigma

    def test_pair_product_unbiased_complex(self):
        y, lam = 0.3 - 0.4j, 1.0
        pair = rect_quantize_pair(np.full(1_000_000, y), lam, *streams(7))
        prod = lam**2 * pair.q * np.conj(pair.q_dot)
        sigma = np.sqrt(np.mean(np.abs(prod - prod.mean()) ** 2) / prod.size)
        assert abs(prod.mean() - y * np.conj(y)) < 4 * sigma

    def test_alphabet(self):
        yr = np.random.default_rng(8).standard_normal(500)
        pair = rect_quantize_pair(yr, 0.7, *streams(8))
        assert set(np.unique(pair.q)) <= {-1.0, 1.0}
        yc = yr * (0.5 + 1j)
        pc = rect_quantize_pair(yc, 0.7, *streams(9))
        assert np.allclose(np.abs(pc.q.real), 1) and np.allclose(np.abs(pc.q.imag), 1)

    def test_dither_freshness(self):
        y = np.full(1000, 0.2)
        s_a, s_b = streams(10)
        first = rect_quantize_pair(y, 1.0, s_a, s_b)
        second = rect_quantize_pair(y, 1.0, s_a, s_b)
        assert not np.array_equal(first.q, second.q)

    def test_bad_range(self):
        with pytest.raises(ValueError):
            rect_quantize_pair(np.zeros(3), -1.0, *streams(11))


class TestUniformQuantize:
    def test_defining_values(self):
        assert np.array_equal(
            uniform_quantize(np.array([0.0, 1.9, 2.0, -0.5]), 1.0), [1.0, 1.0, 3.0, -1.0]
        )

    def test_grid_shift(self):
        x = np.random.default_rng(12).uniform(-10, 10, 1000)
        mu = 0.3
        assert np.allclose(uniform_quantize(x + 2 * mu, mu), uniform_quantize(x, mu) + 2 * mu)

    def test_cell_geometry(self):
        x = np.random.default_rng(13).uniform(-50, 50, 100_000)
        mu = 0.8
        assert np.max(np.abs(uniform_quantize(x, mu) - x)) <= mu

    def test_odd_grid(self):
        x = np.random.default_rng(14).uniform(-5, 5, 1000)
        mu = 0.25
        k = uniform_quantize(x, mu) / mu
        assert np.allclose(np.abs(np.mod(k, 2)), 1.0)


class TestBbitResolution:
    def test_values(self):
        assert bbit_resolution(2.0, 2) == 1.0
        assert bbit_resolution(2.0, 4) == pytest.approx(2.0 / 14.0)

    def test_level_count_by_enumeration(self):
        lam, b = 1.0, 3
        mu = bbit_resolution(lam, b)
        x = np.linspace(-lam - 2 * mu + 1e-9, lam + 2 * mu - 1e-9, 20_001)
        levels = np.unique(uniform_quantize(x, mu))
        assert len(levels) == 2**b

    def test_too_few_bits(self):
        with pytest.raises(ValueError):
            bbit_resolution(1.0, 1)


class TestTriQuantize:
    def test_noise_mean_and_variance_noiseless(self):
        n, mu, x = 1_000_000, 1.0, 0.3
        q = tri_quantize(np.full(n, x), mu, *streams(15))
        xi = q - x
        assert abs(xi.mean()) <= 0.01 * mu
        assert abs(xi.var() - mu**2) <= 0.02 * mu**2

    def test_noise_variance_with_gaussian_noise(self):
        n, mu, nu, x = 1_000_000, 1.0, 0.5, 0.3
        s_a, s_b = streams(16)
        e = nu * standard_normal(RngStream(99, 0), n)
        q = tri_quantize(x + e, mu, s_a, s_b)
        xi = q - x
        assert abs(xi.var() - (mu**2 + nu**2)) <= 0.02 * (mu**2 + nu**2)

    def test_noise_decorrelation_4dim(self):
        n, mu = 1_000_000, 0.9
        x = np.array([0.1, -0.4, 0.7, 0.25])
        y = np.tile(x[:, None], (1, n))
        xi = tri_quantize(y, mu, *streams(17)) - x[:, None]
        corr = np.corrcoef(xi)
        off = corr[~np.eye(4, dtype=bool)]
        assert np.max(np.abs(off)) <= 4 / np.sqrt(n)

    def test_second_moment_signal_independent(self):
        n, mu = 400_000, 1.0
        variances = []
        for k, x in enumerate((0.0, 0.37, 0.99)):
            q = tri_quantize(np.full(n, x * mu), mu, *streams(18, k))
            variances.append((q - x * mu).var())
        # variance of a variance estimate is about 2 sigma^4 / n here
        three_sigma = 3 * np.sqrt(2.0 / n) * mu**2 * 2
        assert max(variances) - min(variances) <= 2 * three_sigma

    def test_complex_parts_quantized_independently(self):
        n, mu = 200_000, 0.5
        y = np.full(n, 0.2 - 0.3j)
        q = tri_quantize(y, mu, *streams(19))
        for part in (q.real, q.imag):
            k = part / mu
            assert np.allclose(np.abs(np.mod(k, 2)), 1.0)
        corr = np.corrcoef(q.real - 0.2, q.imag + 0.3)[0, 1]
        assert abs(corr) < 4 / np.sqrt(n)

    def test_saturation_at_finite_bits(self):
        lam, b = 1.0, 2
        mu = bbit_resolution(lam, b)
        q = tri_quantize(np.array([50.0, -50.0]), mu, *streams(20), bits=b)
        top = (2**b - 1) * mu
        assert np.array_equal(q, [top, -top])

    def test_complex_needs_two_streams(self):
        with pytest.raises(ValueError):
            tri_quantize(np.array([1 + 1j]), 0.5, streams(21)[0])


class TestDirectRound:
    def test_defining_values(self):
        assert direct_round(np.array([0.3]), 1.0, 1)[0] == 0.5
        assert direct_round(np.array([-0.3]), 1.0, 1)[0] == -0.5

    def test_endpoint(self):
        assert direct_round(np.array([1.0]), 1.0, 2)[0] == 0.75
        assert direct_round(np.array([2.0]), 2.0, 3)[0] == 2.0 - 2.0 / 8

    def test_max_error_on_grid(self):
        lam, b = 1.0, 2
        x = np.linspace(-lam, lam, 100_001)
        err = np.abs(direct_round(x, lam, b) - x)
        assert np.max(err) <= lam / 2**b + 1e-12
        assert np.max(err) >= lam / 2**b - 1e-3

    def test_clamps_out_of_range(self):
        lam, b = 1.0, 3
        q = direct_round(np.array([5.0, -5.0]), lam, b)
        assert q[0] == lam - lam / 2**b
        assert q[1] == -lam + lam / 2**b

    def test_complex_by_parts(self):
        z = np.array([0.3 - 0.3j])
        q = direct_round(z, 1.0, 1)
        assert q[0] == 0.5 - 0.5j


class TestBitsUsed:
    def test_rectangular_complex(self):
        # the pair of complex sign bits is a four-bit quantizer: 4 p n in total
        spec = QuantizerSpec("rect", 1.0, "complex")
        assert bits_used(spec, n=10, p=3) == 120

    def test_triangular_real(self):
        spec = QuantizerSpec("tri", 1.0, "real", bits=2)
        assert bits_used(spec, n=5, p=4) == 40

    def test_round_complex(self):
        spec = QuantizerSpec("round", 1.0, "complex", bits=4)
        assert bits_used(spec, n=2, p=2) == 32


class TestQuantizerSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            QuantizerSpec("tri", 1.0, "real", bits=1)
        with pytest.raises(ValueError):
            QuantizerSpec("rect", -1.0, "real")
        with pytest.raises(ValueError):
            QuantizerSpec("rect", 1.0, "real", bits=3)

    def test_token_round_trip(self):
        for token in ("rect", "tri:2", "round:4"):
            spec = QuantizerSpec.from_token(token, 2.0, "complex")
            assert spec.to_token() == token

    def test_labels(self):
        assert QuantizerSpec("tri", 2.0, "real", bits=4).label() == "tri-b4"
        assert QuantizerSpec("rect", 2.0, "real").label() == "rect"

    def test_mu(self):
        assert QuantizerSpec("tri", 2.0, "real", bits=2).mu == 1.0


class TestQuantizeBatch:
    def test_rect_batch_carries_pair(self):
        y = np.random.default_rng(22).standard_normal((4, 10))
        batch = SnapshotBatch(y, "real")
        spec = QuantizerSpec("rect", 2.0, "real")
        out = quantize_batch(batch, spec, *streams(23))
        assert out.scheme == spec and out.data_dot is not None
        assert set(np.unique(out.data)) <= {-1.0, 1.0}

    def test_field_mismatch(self):
        batch = SnapshotBatch(np.zeros((2, 3)), "real")
        with pytest.raises(Exception):
            quantize_batch(batch, QuantizerSpec("rect", 1.0, "complex"), *streams(24))

    def test_pair_shape_check(self):
        with pytest.raises(Exception):
            QuantizedPair(np.ones((2, 3)), np.ones((2, 4)))
