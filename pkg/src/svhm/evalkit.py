"""Quality metrics, BD-Rate, and break-even analysis for layered codecs.

Covers RGB PSNR, five-scale MS-SSIM, Bjontegaard delta rate between RD
curves, the relative-efficiency factors comparing a layered codec against a
single-layer reference, and the break-even fraction of human-viewing time at
which the layered system stops saving bits.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.ndimage import correlate1d

from .codec.frames import Frame

PSNR_INF = float("inf")

# canonical five-scale weights and window for MS-SSIM
_MSSSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
_C1 = (0.01 * 255.0) ** 2
_C2 = (0.03 * 255.0) ** 2


class CurveError(ValueError):
    pass


class OverlapError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Frame metrics
# ---------------------------------------------------------------------------

def psnr_rgb(a: Frame, b: Frame) -> float:
    """Peak signal-to-noise ratio with MSE pooled over all three channels."""
    if (a.height, a.width) != (b.height, b.width):
        raise ValueError("frames differ in size")
    mse = np.mean([(pa - pb) ** 2 for pa, pb in zip(a.planes(), b.planes())])
    if mse == 0.0:
        return PSNR_INF
    return 10.0 * math.log10(255.0 ** 2 / mse)


def _gaussian_window(taps: int = 11, sigma: float = 1.5) -> np.ndarray:
    x = np.arange(taps) - (taps - 1) / 2.0
    w = np.exp(-0.5 * (x / sigma) ** 2)
    return w / w.sum()


def _ssim_components(x: np.ndarray, y: np.ndarray, win: np.ndarray):
    def blur(p):
        return correlate1d(correlate1d(p, win, axis=0, mode="reflect"),
                           win, axis=1, mode="reflect")

    mx, my = blur(x), blur(y)
    sxx = blur(x * x) - mx * mx
    syy = blur(y * y) - my * my
    sxy = blur(x * y) - mx * my
    lum = (2 * mx * my + _C1) / (mx * mx + my * my + _C1)
    cs = (2 * sxy + _C2) / (sxx + syy + _C2)
    return lum, cs


def _downsample_mean(p: np.ndarray) -> np.ndarray:
    h, w = p.shape
    p = p[: h - h % 2, : w - w % 2]
    return p.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))


def _msssim_channel(x: np.ndarray, y: np.ndarray, win: np.ndarray) -> float:
    score = 1.0
    for level, weight in enumerate(_MSSSIM_WEIGHTS):
        lum, cs = _ssim_components(x, y, win)
        if level == len(_MSSSIM_WEIGHTS) - 1:
            score *= float(np.mean(lum * cs)) ** weight
        else:
            score *= max(float(np.mean(cs)), 0.0) ** weight
            x = _downsample_mean(x)
            y = _downsample_mean(y)
    return score


def msssim_rgb(a: Frame, b: Frame) -> float:
    """Five-scale structural similarity averaged over RGB channels."""
    if (a.height, a.width) != (b.height, b.width):
        raise ValueError("frames differ in size")
    if min(a.height, a.width) < 144:
        raise ValueError(
            f"frame {a.width}x{a.height} too small for "
            f"{len(_MSSSIM_WEIGHTS)}-scale MS-SSIM (needs >= 176x144)")
    win = _gaussian_window()
    return float(np.mean([
        _msssim_channel(pa, pb, win) for pa, pb in zip(a.planes(), b.planes())
    ]))


# ---------------------------------------------------------------------------
# RD curves and BD-Rate
# ---------------------------------------------------------------------------

_OVERLAP_MIN = {"PSNR": 2.0, "mAP": 2.0, "MS-SSIM": 0.01}


@dataclass
class RDCurveTable:
    """One codec's operating points: (bpp, quality) under a named metric."""

    label: str
    metric: str
    points: list[tuple[float, float]]

    def __post_init__(self):
        # exact duplicates are harmless; collapse them before validation
        self.points = sorted(set(self.points), key=lambda p: p[1])
        if len(self.points) < 4:
            raise CurveError(f"{self.label}: need >= 4 RD points, got {len(self.points)}")
        bpps = [p[0] for p in self.points]
        quals = [p[1] for p in self.points]
        if any(b2 <= b1 for b1, b2 in zip(bpps, bpps[1:])):
            raise CurveError(f"{self.label}: bpp must be strictly increasing")
        if any(q2 <= q1 for q1, q2 in zip(quals, quals[1:])):
            raise CurveError(f"{self.label}: quality must be strictly increasing "
                             "(non-monotone RD curve)")
        if any(b <= 0 for b in bpps):
            raise CurveError(f"{self.label}: bpp must be positive")

    def quality_range(self) -> tuple[float, float]:
        return self.points[0][1], self.points[-1][1]

    def log_rate_interpolant(self) -> PchipInterpolator:
        quals = [p[1] for p in self.points]
        logr = [math.log10(p[0]) for p in self.points]
        return PchipInterpolator(quals, logr)


def read_rd_csv(path) -> list[RDCurveTable]:
    """CSV schema: label,metric,bpp,quality — grouped into curves."""
    groups: dict[tuple[str, str], list[tuple[float, float]]] = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            key = (row["label"], row["metric"])
            groups.setdefault(key, []).append((float(row["bpp"]), float(row["quality"])))
    return [RDCurveTable(lbl, met, sorted(pts, key=lambda p: p[1]))
            for (lbl, met), pts in groups.items()]


def write_rd_csv(path, curves: list[RDCurveTable]) -> None:
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["label", "metric", "bpp", "quality"])
        for c in curves:
            for bpp, qual in c.points:
                wr.writerow([c.label, c.metric, repr(bpp), repr(qual)])


def bd_rate(anchor: RDCurveTable, test: RDCurveTable) -> float:
    """Average bitrate difference (%) of test vs anchor at equal quality.

    log10(bpp) is interpolated over quality with a shape-preserving monotone
    cubic on each curve, the difference integrated over the common quality
    interval; negative means the test codec saves bits.
    """
    if anchor.metric != test.metric:
        raise OverlapError(f"metric mismatch: {anchor.metric} vs {test.metric}")
    lo = max(anchor.quality_range()[0], test.quality_range()[0])
    hi = min(anchor.quality_range()[1], test.quality_range()[1])
    need = _OVERLAP_MIN.get(anchor.metric, 2.0)
    if hi - lo < need:
        raise OverlapError(
            f"insufficient quality overlap for {anchor.metric}: anchor spans "
            f"{anchor.quality_range()}, test spans {test.quality_range()}, "
            f"common [{lo}, {hi}] < {need}")
    fa = anchor.log_rate_interpolant()
    ft = test.log_rate_interpolant()
    mean_diff = (ft.antiderivative()(hi) - ft.antiderivative()(lo)
                 - fa.antiderivative()(hi) + fa.antiderivative()(lo)) / (hi - lo)
    return 100.0 * (10.0 ** mean_diff - 1.0)


def relative_efficiency(bd_test: float, bd_reference: float) -> float:
    """Bits the test codec uses per bit of the reference, from BD-Rates
    measured against one common anchor."""
    return 1.0 + (bd_test - bd_reference) / 100.0


# ---------------------------------------------------------------------------
# Break-even analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BreakEvenResult:
    """phi = fraction of time human viewing can be requested before the
    layered system loses its bit advantage; regime flags the boundary cases."""

    phi: float
    regime: str          # interior | always | never | degenerate

    def cell(self) -> str:
        if self.regime == "interior":
            return f"{self.phi:.2f}"
        return self.regime


def break_even(a: float, b: float) -> BreakEvenResult:
    """Solve (1 - phi) * a + phi * b = 1 for the machine-bits factor a and
    human-bits factor b (both relative to the reference codec)."""
    if a <= 0 or b <= 0:
        raise ValueError("bit factors must be positive")
    if a == 1.0 and b == 1.0:
        return BreakEvenResult(1.0, "degenerate")
    if a <= 1.0 and b <= 1.0:
        return BreakEvenResult(1.0, "always")
    if a > 1.0 and b >= 1.0:
        return BreakEvenResult(0.0, "never")
    phi = (1.0 - a) / (b - a)
    return BreakEvenResult(min(max(phi, 0.0), 1.0), "interior")


@dataclass
class BDSummaryRow:
    dataset: str
    frames: int
    codec: str
    metric: str
    bd_rate: float


def read_bd_summary_csv(path) -> list[BDSummaryRow]:
    """CSV schema: dataset,frames,codec,metric,bd_rate."""
    rows = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            rows.append(BDSummaryRow(row["dataset"], int(row["frames"]),
                                     row["codec"], row["metric"],
                                     float(row["bd_rate"])))
    return rows


def _weighted_averages(rows: list[BDSummaryRow]) -> dict[tuple[str, str], float]:
    num: dict[tuple[str, str], float] = {}
    den: dict[tuple[str, str], float] = {}
    for r in rows:
        key = (r.codec, r.metric)
        num[key] = num.get(key, 0.0) + r.frames * r.bd_rate
        den[key] = den.get(key, 0.0) + r.frames
    return {k: num[k] / den[k] for k in num}


@dataclass
class BreakEvenReport:
    machine_factor: float
    human_factors: dict = field(default_factory=dict)   # (metric, regime) -> b
    cells: dict = field(default_factory=dict)           # (metric, regime) -> BreakEvenResult

    def to_dict(self) -> dict:
        return {
            "machine_factor": self.machine_factor,
            "human_factors": {f"{m}/{r}": v for (m, r), v in self.human_factors.items()},
            "break_even": {
                f"{m}/{r}": {"phi": c.phi, "regime": c.regime}
                for (m, r), c in self.cells.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        metrics = sorted({m for m, _ in self.cells})
        regimes = sorted({r for _, r in self.cells})
        widths = [max(len("metric"), *(len(m) for m in metrics))]
        widths += [max(len(r), 8) for r in regimes]
        lines = ["  ".join(["metric".ljust(widths[0])]
                           + [r.ljust(w) for r, w in zip(regimes, widths[1:])])]
        for m in metrics:
            row = [m.ljust(widths[0])]
            for r, w in zip(regimes, widths[1:]):
                cell = self.cells.get((m, r))
                row.append((cell.cell() if cell else "-").ljust(w))
            lines.append("  ".join(row))
        return "\n".join(lines)


def table_pipeline(rows: list[BDSummaryRow], reference: str = "vvenc",
                   machine_codec: str = "proposed-base",
                   machine_metric: str = "mAP",
                   human_codecs: tuple[str, ...] = ("proposed-enh",
                                                    "proposed-base+enh")) -> BreakEvenReport:
    """Frame-count-weighted dataset averages -> bit factors -> break-even
    cells, one per (human-quality metric, layered-codec regime)."""
    avg = _weighted_averages(rows)
    try:
        a = relative_efficiency(avg[(machine_codec, machine_metric)],
                                avg[(reference, machine_metric)])
    except KeyError as exc:
        raise ValueError(f"missing machine-task BD-Rate for {exc}") from exc
    report = BreakEvenReport(machine_factor=a)
    human_metrics = sorted({m for (_, m) in avg if m != machine_metric})
    for metric in human_metrics:
        for codec in human_codecs:
            if (codec, metric) not in avg or (reference, metric) not in avg:
                continue
            b = relative_efficiency(avg[(codec, metric)], avg[(reference, metric)])
            report.human_factors[(metric, codec)] = b
            report.cells[(metric, codec)] = break_even(a, b)
    if not report.cells:
        raise ValueError("no (human metric, codec) pair present in the summary")
    return report
