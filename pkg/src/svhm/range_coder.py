"""Bit-exact byte-oriented range coder driven by the Laplace box model.

64-bit low / 64-bit range, byte renormalization at 2^56, carry propagation
into the output buffer.  Symbol frequencies come from a deterministic integer
CDF (precision 2^20, ceiling-biased so quantized probabilities never fall
below the model probability), making streams byte-identical across runs and
platforms.  A 16-bit checksum symbol is coded after the payload so truncated
or corrupted streams are rejected instead of silently misdecoding.
"""

from __future__ import annotations

from bisect import bisect_right

import numpy as np

from .entropy_model import (
    PROB_FLOOR,
    SCALE_FLOOR,
    SUPPORT_HALF_WIDTH,
    Bitstream,
    LaplaceParamField,
    ShapeMismatchError,
    box_probability,
)

_MASK64 = (1 << 64) - 1
_RENORM = 1 << 56
_CDF_PRECISION = 1 << 20
_CHECK_TOTAL = 1 << 16


class SupportError(ValueError):
    """A symbol lies outside the coder's declared support window."""


class CorruptStreamError(ValueError):
    """The stream is truncated, damaged, or was coded with other parameters."""


class RangeEncoder:
    def __init__(self):
        self.low = 0
        self.range = _MASK64
        self.out = bytearray()

    def encode(self, cum_low: int, freq: int, total: int) -> None:
        r = self.range // total
        self.low += cum_low * r
        if self.low > _MASK64:
            self._carry()
            self.low &= _MASK64
        self.range = r * freq
        while self.range < _RENORM:
            self.out.append((self.low >> 56) & 0xFF)
            self.low = (self.low << 8) & _MASK64
            self.range <<= 8

    def _carry(self) -> None:
        i = len(self.out) - 1
        while i >= 0 and self.out[i] == 0xFF:
            self.out[i] = 0
            i -= 1
        if i >= 0:
            self.out[i] += 1

    def finish(self) -> bytes:
        # Emit the fewest top bytes of some value in [low, low + range);
        # the decoder zero-pads, so trailing zero bytes are free.
        for k in range(9):
            shift = 64 - 8 * k
            if shift == 0:
                v = self.low
            else:
                step = 1 << shift
                v = ((self.low + step - 1) // step) * step
            if v < self.low + self.range:
                if v > _MASK64:
                    self._carry()
                    v &= _MASK64
                for j in range(k):
                    self.out.append((v >> (56 - 8 * j)) & 0xFF)
                break
        return bytes(self.out)


class RangeDecoder:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 8
        self.range = _MASK64
        code = 0
        for i in range(8):
            code = (code << 8) | (data[i] if i < len(data) else 0)
        self.code = code

    def decode_target(self, total: int) -> int:
        self._r = self.range // total
        t = self.code // self._r
        if t >= total:
            raise CorruptStreamError("decoded target outside the coded total")
        return t

    def consume(self, cum_low: int, freq: int) -> None:
        r = self._r
        self.code -= cum_low * r
        self.range = r * freq
        while self.range < _RENORM:
            nxt = self.data[self.pos] if self.pos < len(self.data) else 0
            self.pos += 1
            self.code = ((self.code << 8) | nxt) & _MASK64
            self.range <<= 8


def _cdf_tables(params: LaplaceParamField, half_width: int):
    """Integer CDFs for every unique (mu, scale) pair in the field.

    Returns (pair_index_per_position, bases, cum_rows, totals) where cum_rows
    is a list of python lists (length 2*half_width + 2, leading 0).
    """
    mus = params.mu.ravel()
    scales = np.maximum(params.scale.ravel(), SCALE_FLOOR)
    pairs = np.stack([mus, scales], axis=1)
    uniq, inv = np.unique(pairs, axis=0, return_inverse=True)
    inv = inv.ravel()

    width = 2 * half_width + 1
    n_uniq = uniq.shape[0]
    bases = np.empty(n_uniq, dtype=np.int64)
    cum_rows = []
    totals = []
    chunk = max(1, (1 << 22) // max(width, 1))
    offsets = np.arange(width, dtype=np.float64)
    for lo in range(0, n_uniq, chunk):
        hi = min(lo + chunk, n_uniq)
        mu_c = uniq[lo:hi, 0][:, None]
        b_c = uniq[lo:hi, 1][:, None]
        base_c = (np.sign(mu_c) * np.floor(np.abs(mu_c) + 0.5)).astype(np.int64) - half_width
        ks = base_c.astype(np.float64) + offsets[None, :]
        probs = box_probability(ks, mu_c, b_c)
        counts = np.ceil(probs * _CDF_PRECISION).astype(np.int64)
        cums = np.zeros((hi - lo, width + 1), dtype=np.int64)
        np.cumsum(counts, axis=1, out=cums[:, 1:])
        bases[lo:hi] = base_c[:, 0]
        for row in cums.tolist():
            cum_rows.append(row)
            totals.append(row[-1])
    return inv, bases.tolist(), cum_rows, totals


def _check_value(symbols: np.ndarray) -> int:
    if symbols.size == 0:
        return 0
    weights = np.arange(1, symbols.size + 1, dtype=np.int64) * np.int64(2654435761)
    return int(np.sum(symbols.astype(np.int64) * weights, dtype=np.int64)) & 0xFFFF


def range_encode(
    symbols: np.ndarray,
    params: LaplaceParamField,
    half_width: int = SUPPORT_HALF_WIDTH,
) -> Bitstream:
    """Encode an integer symbol plane; decoder needs the identical params."""
    symbols = np.asarray(symbols, dtype=np.int64)
    if symbols.shape != params.mu.shape:
        raise ShapeMismatchError(
            f"symbol plane {symbols.shape} vs parameter field {params.mu.shape}"
        )
    flat = symbols.ravel()
    if flat.size and np.any(np.abs(flat - params.mu.ravel()) > half_width):
        bad = int(np.argmax(np.abs(flat - params.mu.ravel()) > half_width))
        raise SupportError(
            f"symbol {int(flat[bad])} at flat index {bad} outside mu +/- {half_width}"
        )

    enc = RangeEncoder()
    if flat.size:
        inv, bases, cum_rows, totals = _cdf_tables(params, half_width)
        syms = flat.tolist()
        inv_l = inv.tolist()
        encode = enc.encode
        for i, s in enumerate(syms):
            u = inv_l[i]
            row = cum_rows[u]
            j = s - bases[u]
            encode(row[j], row[j + 1] - row[j], totals[u])
    chk = _check_value(flat)
    enc.encode(chk, 1, _CHECK_TOTAL)
    payload = enc.finish()
    return Bitstream(payload, 8 * len(payload))


def range_decode(
    bs: Bitstream,
    params: LaplaceParamField,
    shape: tuple[int, int] | None = None,
    half_width: int = SUPPORT_HALF_WIDTH,
) -> np.ndarray:
    """Inverse of :func:`range_encode`; exact or raises CorruptStreamError."""
    if shape is None:
        shape = params.mu.shape
    if tuple(shape) != params.mu.shape:
        raise ShapeMismatchError("requested shape does not match parameter field")
    if bs.bit_length > 8 * len(bs.data):
        raise CorruptStreamError("bitstream shorter than its declared bit length")

    n = int(np.prod(shape)) if shape else 0
    dec = RangeDecoder(bs.data[: (bs.bit_length + 7) // 8])
    out = [0] * n
    if n:
        inv, bases, cum_rows, totals = _cdf_tables(params, half_width)
        inv_l = inv.tolist()
        for i in range(n):
            u = inv_l[i]
            row = cum_rows[u]
            t = dec.decode_target(totals[u])
            j = bisect_right(row, t) - 1
            dec.consume(row[j], row[j + 1] - row[j])
            out[i] = bases[u] + j
    symbols = np.array(out, dtype=np.int64).reshape(shape)
    t = dec.decode_target(_CHECK_TOTAL)
    dec.consume(t, 1)
    if t != _check_value(symbols.ravel()):
        raise CorruptStreamError("checksum mismatch: stream truncated or corrupted")
    return symbols
