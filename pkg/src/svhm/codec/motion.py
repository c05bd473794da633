"""Block-matching motion estimation and block-copy compensation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import Frame


@dataclass
class FlowField:
    """Per-block integer displacements, in pixels."""

    dx: np.ndarray
    dy: np.ndarray
    block: int
    search: int

    def __post_init__(self):
        self.dx = np.asarray(self.dx, dtype=np.int64)
        self.dy = np.asarray(self.dy, dtype=np.int64)
        if self.dx.shape != self.dy.shape:
            raise ValueError("dx/dy shapes differ")
        if np.any(np.abs(self.dx) > self.search) or np.any(np.abs(self.dy) > self.search):
            raise ValueError("displacement exceeds search range")

    @classmethod
    def zero(cls, height: int, width: int, block: int, search: int) -> "FlowField":
        nby = -(-height // block)
        nbx = -(-width // block)
        z = np.zeros((nby, nbx), dtype=np.int64)
        return cls(z, z.copy(), block, search)

    def magnitude(self) -> np.ndarray:
        return np.sqrt(self.dx.astype(np.float64) ** 2 + self.dy.astype(np.float64) ** 2)


def _block_sums(err: np.ndarray, block: int) -> np.ndarray:
    h, w = err.shape
    ph = (-h) % block
    pw = (-w) % block
    if ph or pw:
        err = np.pad(err, ((0, ph), (0, pw)), mode="constant")
    H, W = err.shape
    return err.reshape(H // block, block, W // block, block).sum(axis=(1, 3))


def _shift_clamped(plane: np.ndarray, dy: int, dx: int) -> np.ndarray:
    h, w = plane.shape
    iy = np.clip(np.arange(h) + dy, 0, h - 1)
    ix = np.clip(np.arange(w) + dx, 0, w - 1)
    return plane[iy][:, ix]


def estimate_motion(cur: Frame, ref: Frame, block: int = 16, search: int = 8) -> FlowField:
    """Full-search SAD over luma; deterministic tie-breaking.

    Ties go to the smallest |dx| + |dy|, then to the earliest candidate in
    raster order (dy outer, dx inner, each from -search to +search).
    """
    if (cur.height, cur.width) != (ref.height, ref.width):
        raise ValueError("frames differ in size")
    cl = cur.luma()
    rl = ref.luma()
    nby = -(-cur.height // block)
    nbx = -(-cur.width // block)

    best_sad = np.full((nby, nbx), np.inf)
    best_cost = np.full((nby, nbx), np.inf)
    best_dx = np.zeros((nby, nbx), dtype=np.int64)
    best_dy = np.zeros((nby, nbx), dtype=np.int64)
    for dy in range(-search, search + 1):
        for dx in range(-search, search + 1):
            sad = _block_sums(np.abs(cl - _shift_clamped(rl, dy, dx)), block)
            cost2 = abs(dx) + abs(dy)
            better = (sad < best_sad) | ((sad == best_sad) & (cost2 < best_cost))
            best_sad = np.where(better, sad, best_sad)
            best_cost = np.where(better, cost2, best_cost)
            best_dx = np.where(better, dx, best_dx)
            best_dy = np.where(better, dy, best_dy)
    return FlowField(best_dx, best_dy, block, search)


def compensate(ref: Frame, flow: FlowField) -> Frame:
    """Block-copy warp with edge clamping."""
    h, w = ref.height, ref.width
    dy_map = np.repeat(np.repeat(flow.dy, flow.block, 0), flow.block, 1)[:h, :w]
    dx_map = np.repeat(np.repeat(flow.dx, flow.block, 0), flow.block, 1)[:h, :w]
    src_y = np.clip(np.arange(h)[:, None] + dy_map, 0, h - 1)
    src_x = np.clip(np.arange(w)[None, :] + dx_map, 0, w - 1)
    return Frame(
        ref.r[src_y, src_x], ref.g[src_y, src_x], ref.b[src_y, src_x], ref.index
    )


def predict_motion(flow_buffer: list[FlowField], height: int, width: int,
                   block: int, search: int) -> FlowField:
    """Previous decoded flow if available, else the zero field."""
    if flow_buffer:
        return flow_buffer[-1]
    return FlowField.zero(height, width, block, search)
