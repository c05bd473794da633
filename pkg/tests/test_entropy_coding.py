"""Tests for the Laplace-box probability model and the range coder."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svhm.entropy_model import (
    Bitstream,
    LaplaceParamField,
    PROB_FLOOR,
    SCALE_FLOOR,
    ShapeMismatchError,
    SymbolBoundError,
    box_probability,
    dequantize,
    estimate_rate,
    laplace_cdf,
    quantize,
)
from svhm.range_coder import CorruptStreamError, SupportError, range_decode, range_encode


def oracle_box_probability(k, mu, b):
    """Independent recomputation from the Laplace CDF definition."""
    b = max(b, SCALE_FLOOR)

    def cdf(x):
        z = (x - mu) / b
        return 0.5 * math.exp(z) if z < 0 else 1.0 - 0.5 * math.exp(-z)

    return max(cdf(k + 0.5) - cdf(k - 0.5), PROB_FLOOR)


# ---------------------------------------------------------------------------
# Probability model
# ---------------------------------------------------------------------------

class TestBoxProbability:
    def test_scalar_returns_float(self):
        p = box_probability(0, 0.0, 1.0)
        assert isinstance(p, float)
        assert p == pytest.approx(1.0 - math.exp(-0.5), abs=1e-12)

    def test_matches_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            k = int(rng.integers(-30, 31))
            mu = float(rng.uniform(-20, 20))
            b = float(rng.uniform(0.001, 30.0))
            assert box_probability(k, mu, b) == pytest.approx(
                oracle_box_probability(k, mu, b), rel=1e-12)

    def test_symmetry_about_mu(self):
        assert box_probability(3, 5.0, 2.0) == pytest.approx(
            box_probability(7, 5.0, 2.0), rel=1e-12)

    def test_scale_floor(self):
        assert box_probability(0, 0.0, 1e-9) == box_probability(0, 0.0, SCALE_FLOOR)

    def test_probability_floor(self):
        assert box_probability(1000, 0.0, 0.1) == PROB_FLOOR

    def test_mass_sums_near_one(self):
        ks = np.arange(-200, 201)
        total = float(np.sum(box_probability(ks, 0.3, 4.0)))
        # floors add a little mass; never less than 1
        assert 1.0 <= total <= 1.0 + 401 * PROB_FLOOR

    def test_vectorized_broadcast(self):
        ks = np.arange(-2, 3)
        mus = np.zeros(5)
        out = box_probability(ks, mus, 1.5)
        assert out.shape == (5,)
        assert out[2] == max(out)

    def test_cdf_midpoint(self):
        assert float(laplace_cdf(2.0, 2.0, 3.0)) == pytest.approx(0.5, abs=1e-12)


class TestQuantize:
    def test_round_half_away_from_zero(self):
        x = np.array([-2.5, -1.5, -0.5, -0.49, 0.0, 0.49, 0.5, 1.5, 2.5])
        assert np.array_equal(quantize(x), [-3, -2, -1, 0, 0, 0, 1, 2, 3])

    def test_dtype_integer(self):
        assert quantize(np.array([1.2])).dtype == np.int64

    def test_bound_violation_names_index(self):
        with pytest.raises(SymbolBoundError, match=r"symbol 7 at index \(1, 0\)"):
            quantize(np.array([[1.0, 2.0], [7.4, 0.0]]), max_symbol=5)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            quantize(np.array([np.nan]))

    def test_dequantize_roundtrip(self):
        s = np.array([[-3, 0, 5]], dtype=np.int64)
        assert np.array_equal(quantize(dequantize(s)), s)

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
    def test_quantize_within_half(self, xs):
        x = np.array(xs)
        s = quantize(x)
        assert np.all(np.abs(s - x) <= 0.5 + 1e-9)


class TestEstimateRate:
    def test_direct_summation_oracle(self):
        rng = np.random.default_rng(13)
        mu = rng.uniform(-5, 5, (6, 7))
        scale = rng.uniform(0.05, 8.0, (6, 7))
        symbols = quantize(rng.uniform(-10, 10, (6, 7)))
        expected = sum(
            -math.log2(oracle_box_probability(int(symbols[i, j]), mu[i, j], scale[i, j]))
            for i in range(6) for j in range(7)
        )
        field = LaplaceParamField(mu, scale)
        assert estimate_rate(symbols, field) == pytest.approx(expected, rel=1e-12)

    def test_empty_plane(self):
        field = LaplaceParamField(np.zeros((0,)), np.full((0,), 1.0))
        assert estimate_rate(np.zeros((0,), dtype=np.int64), field) == 0.0

    def test_shape_mismatch(self):
        field = LaplaceParamField(np.zeros((2, 2)), np.ones((2, 2)))
        with pytest.raises(ShapeMismatchError):
            estimate_rate(np.zeros((3, 2), dtype=np.int64), field)

    def test_worst_case_symbol_cost(self):
        field = LaplaceParamField(np.zeros(1), np.full(1, 0.04))
        rate = estimate_rate(np.array([60]), field)
        assert rate <= 16.0 + 1e-9


class TestLaplaceParamField:
    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            LaplaceParamField(np.zeros((2, 3)), np.ones((3, 2)))

    def test_scale_below_floor_rejected(self):
        with pytest.raises(ValueError):
            LaplaceParamField(np.zeros(3), np.full(3, 0.01))

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            LaplaceParamField(np.array([np.inf]), np.array([1.0]))


class TestBitstream:
    def test_wire_roundtrip(self):
        bs = Bitstream(b"\xde\xad\xbe", 20)
        again = Bitstream.from_bytes(bs.to_bytes())
        assert again.data == bs.data and again.bit_length == bs.bit_length

    def test_header_is_little_endian_bit_count(self):
        assert Bitstream(b"\x00" * 2, 13).to_bytes()[:4] == (13).to_bytes(4, "little")

    def test_short_buffer_rejected(self):
        with pytest.raises(ValueError):
            Bitstream.from_bytes(b"\x01\x02")

    def test_overlong_declared_length_rejected(self):
        with pytest.raises(ValueError):
            Bitstream.from_bytes((9).to_bytes(4, "little") + b"\xff")

    def test_bit_length_exceeding_payload_rejected(self):
        with pytest.raises(ValueError):
            Bitstream(b"\x00", 9)


# ---------------------------------------------------------------------------
# Range coder
# ---------------------------------------------------------------------------

def random_case(rng, shape, mu_span=20.0, scale_hi=10.0):
    mu = rng.uniform(-mu_span, mu_span, shape)
    scale = rng.uniform(0.04, scale_hi, shape)
    symbols = quantize(mu + rng.laplace(0.0, 1.0, shape) * scale)
    symbols = np.clip(symbols, np.ceil(mu - 64), np.floor(mu + 64))
    return symbols.astype(np.int64), LaplaceParamField(mu, scale)


class TestRangeCoder:
    def test_exact_roundtrip_2d(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            symbols, field = random_case(rng, (8, 11))
            out = range_decode(range_encode(symbols, field), field)
            assert np.array_equal(out, symbols)

    def test_exact_roundtrip_3d(self):
        rng = np.random.default_rng(1)
        symbols, field = random_case(rng, (3, 4, 5))
        out = range_decode(range_encode(symbols, field), field)
        assert out.shape == (3, 4, 5)
        assert np.array_equal(out, symbols)

    def test_empty_plane(self):
        field = LaplaceParamField(np.zeros((0,)), np.full((0,), 1.0))
        bs = range_encode(np.zeros((0,), dtype=np.int64), field)
        assert np.array_equal(range_decode(bs, field), np.zeros((0,), dtype=np.int64))

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        symbols, field = random_case(rng, (6, 6))
        assert range_encode(symbols, field).to_bytes() == range_encode(symbols, field).to_bytes()

    def test_support_error_message(self):
        field = LaplaceParamField(np.zeros(3), np.ones(3))
        with pytest.raises(SupportError, match=r"symbol 65 at flat index 1 outside mu \+/- 64"):
            range_encode(np.array([0, 65, 0]), field)

    def test_wider_half_width_accepts(self):
        field = LaplaceParamField(np.zeros(3), np.full(3, 4.0))
        symbols = np.array([0, 500, -120])
        bs = range_encode(symbols, field, half_width=1024)
        assert np.array_equal(range_decode(bs, field, half_width=1024), symbols)

    def test_corruption_detected(self):
        rng = np.random.default_rng(3)
        symbols, field = random_case(rng, (16, 16))
        bs = range_encode(symbols, field)
        for pos in (0, len(bs.data) // 2, len(bs.data) - 1):
            bad = bytearray(bs.data)
            bad[pos] ^= 0x41
            with pytest.raises(CorruptStreamError):
                range_decode(Bitstream(bytes(bad), bs.bit_length), field)

    def test_truncation_detected(self):
        rng = np.random.default_rng(4)
        symbols, field = random_case(rng, (16, 16))
        bs = range_encode(symbols, field)
        # wire-level truncation is caught while parsing the header
        with pytest.raises(ValueError):
            Bitstream.from_bytes(bs.to_bytes()[:-3])
        # a consistently shortened payload is caught by the checksum
        shortened = Bitstream(bs.data[:-3], 8 * (len(bs.data) - 3))
        with pytest.raises(CorruptStreamError):
            range_decode(shortened, field)

    def test_shape_mismatch(self):
        field = LaplaceParamField(np.zeros((2, 2)), np.ones((2, 2)))
        bs = range_encode(np.zeros((2, 2), dtype=np.int64), field)
        with pytest.raises(ShapeMismatchError):
            range_decode(bs, field, shape=(4, 1))

    def test_rate_close_to_estimate(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            symbols, field = random_case(rng, (12, 12))
            bs = range_encode(symbols, field)
            est = estimate_rate(symbols, field)
            assert bs.bit_length <= est * 1.01 + 64.0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 40))
    def test_roundtrip_property(self, seed, n):
        rng = np.random.default_rng(seed)
        symbols, field = random_case(rng, (n,), mu_span=8.0, scale_hi=5.0)
        bs = range_encode(symbols, field)
        assert np.array_equal(range_decode(bs, field), symbols)
        assert bs.bit_length <= estimate_rate(symbols, field) * 1.01 + 64.0
