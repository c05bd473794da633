"""Finite-alphabet rate-distortion lab for conditional vs. residual coding.

Everything here is exact, discrete and numpy-based: entropies, mutual
informations, a slope-parameterized Blahut-Arimoto solver, and the
verification sweeps that compare conditional coding of the prediction
residual (given the predictor) against plain residual coding.

Slope convention: a point at slope ``s`` minimizes the Lagrangian
``distortion + s * rate_bits``.  ``s = 0`` is the lossless end (rate pays
nothing, distortion is driven to its minimum), ``s -> inf`` is the
zero-rate end.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

LOG_FLOOR = 1e-15
_LN2 = np.log(2.0)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITERS = 10_000


class DistributionError(ValueError):
    """Raised for vectors/matrices that fail normalization or sign checks."""


class ConvergenceError(RuntimeError):
    """Blahut-Arimoto failed to converge; carries the best iterate found."""

    def __init__(self, message: str, best: "RDPoint"):
        super().__init__(message)
        self.best = best


def _as_prob_vector(p, tol: float = 1e-9) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise DistributionError("probability vector must be 1-D and non-empty")
    if np.any(p < 0):
        raise DistributionError("probabilities must be non-negative")
    if abs(p.sum() - 1.0) > tol:
        raise DistributionError(f"probabilities sum to {p.sum()!r}, not 1")
    return p


def entropy(p) -> float:
    """Shannon entropy in bits, with 0*log(0) == 0."""
    p = _as_prob_vector(p)
    nz = p[p > 0]
    return float(max(0.0, -np.sum(nz * np.log2(nz))))


@dataclass
class DiscreteJointSource:
    """Joint pmf over two finite real-valued alphabets (X rows, Y columns)."""

    x_alphabet: np.ndarray
    y_alphabet: np.ndarray
    pmf: np.ndarray

    def __post_init__(self):
        self.x_alphabet = np.asarray(self.x_alphabet, dtype=np.float64)
        self.y_alphabet = np.asarray(self.y_alphabet, dtype=np.float64)
        self.pmf = np.asarray(self.pmf, dtype=np.float64)
        if self.pmf.shape != (self.x_alphabet.size, self.y_alphabet.size):
            raise DistributionError("pmf shape does not match alphabet sizes")
        for name, a in (("x", self.x_alphabet), ("y", self.y_alphabet)):
            if a.size == 0 or np.any(np.diff(a) <= 0):
                raise DistributionError(f"{name}_alphabet must be strictly ascending")
        if np.any(self.pmf < 0):
            raise DistributionError("joint pmf entries must be non-negative")
        if abs(self.pmf.sum() - 1.0) > 1e-12:
            raise DistributionError(f"joint pmf sums to {self.pmf.sum()!r}, not 1")

    def marginal_x(self) -> np.ndarray:
        return self.pmf.sum(axis=1)

    def marginal_y(self) -> np.ndarray:
        return self.pmf.sum(axis=0)


@dataclass
class DistortionMatrix:
    """Per-pair distortion d(source symbol, reconstruction symbol)."""

    values: np.ndarray
    reconstruction_alphabet: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.reconstruction_alphabet = np.asarray(
            self.reconstruction_alphabet, dtype=np.float64
        )
        if self.values.ndim != 2:
            raise DistributionError("distortion matrix must be 2-D")
        if self.values.shape[1] != self.reconstruction_alphabet.size:
            raise DistributionError("reconstruction alphabet size mismatch")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise DistributionError("distortions must be finite and non-negative")

    @classmethod
    def squared_error(cls, source_alphabet, reconstruction_alphabet=None):
        src = np.asarray(source_alphabet, dtype=np.float64)
        rec = src if reconstruction_alphabet is None else np.asarray(
            reconstruction_alphabet, dtype=np.float64
        )
        return cls((src[:, None] - rec[None, :]) ** 2, rec)

    @classmethod
    def hamming(cls, source_alphabet, reconstruction_alphabet=None):
        src = np.asarray(source_alphabet, dtype=np.float64)
        rec = src if reconstruction_alphabet is None else np.asarray(
            reconstruction_alphabet, dtype=np.float64
        )
        return cls((np.abs(src[:, None] - rec[None, :]) > 1e-12).astype(np.float64), rec)


@dataclass
class Channel:
    """Row-stochastic conditional pmf p(reconstruction | source)."""

    pmf: np.ndarray

    def __post_init__(self):
        self.pmf = np.asarray(self.pmf, dtype=np.float64)
        if self.pmf.ndim != 2:
            raise DistributionError("channel pmf must be 2-D")
        if np.any(self.pmf < 0):
            raise DistributionError("channel entries must be non-negative")
        if np.any(np.abs(self.pmf.sum(axis=1) - 1.0) > 1e-12):
            raise DistributionError("channel rows must each sum to 1")


@dataclass(frozen=True)
class RDPoint:
    rate: float        # bits per source symbol
    distortion: float  # expected distortion
    slope: float       # Lagrangian weight on rate


@dataclass
class MarkovChainSpec:
    """Source distribution plus the channel cascade X -> Y -> Xhat -> V."""

    p_x: np.ndarray
    channels: list = field(default_factory=list)

    def __post_init__(self):
        self.p_x = _as_prob_vector(self.p_x, tol=1e-9)
        self.channels = [c if isinstance(c, Channel) else Channel(c) for c in self.channels]
        n = self.p_x.size
        for c in self.channels:
            if c.pmf.shape[0] != n:
                raise DistributionError("channel dimensions do not compose")
            n = c.pmf.shape[1]


def conditional_entropy(j: DiscreteJointSource) -> float:
    """H(X|Y) in bits."""
    p_y = j.marginal_y()
    h = 0.0
    for k in range(p_y.size):
        if p_y[k] <= 0:
            continue
        h += p_y[k] * entropy(j.pmf[:, k] / p_y[k])
    return float(max(0.0, h))


def mutual_information_from_pmf(pmf: np.ndarray) -> float:
    """I between the row and column variables of a joint pmf, in bits."""
    pmf = np.asarray(pmf, dtype=np.float64)
    px = pmf.sum(axis=1)
    py = pmf.sum(axis=0)
    mask = pmf > 0
    outer = np.outer(px, py)
    mi = np.sum(pmf[mask] * np.log2(pmf[mask] / outer[mask]))
    return float(max(0.0, mi))


def mutual_information(j: DiscreteJointSource) -> float:
    return mutual_information_from_pmf(j.pmf)


def residual_alphabet(j: DiscreteJointSource) -> np.ndarray:
    """Sorted alphabet of Z = X - Y (colliding differences merged)."""
    diffs = np.round(j.x_alphabet[:, None] - j.y_alphabet[None, :], 9)
    return np.unique(diffs)


def residual_distribution(j: DiscreteJointSource) -> tuple[np.ndarray, np.ndarray]:
    """Distribution of Z = X - Y; returns (z_alphabet, probabilities)."""
    diffs = np.round(j.x_alphabet[:, None] - j.y_alphabet[None, :], 9)
    z_alpha, inverse = np.unique(diffs, return_inverse=True)
    probs = np.zeros(z_alpha.size)
    np.add.at(probs, inverse.reshape(diffs.shape).ravel(), j.pmf.ravel())
    return z_alpha, probs


@dataclass(frozen=True)
class LosslessBoundReport:
    h_cond: float
    h_res: float
    holds: bool


def verify_lossless_bound(j: DiscreteJointSource, tol: float = 1e-9) -> LosslessBoundReport:
    """Check H(X|Y) <= H(X - Y)."""
    h_cond = conditional_entropy(j)
    _, pz = residual_distribution(j)
    h_res = entropy(pz)
    return LosslessBoundReport(h_cond, h_res, h_cond <= h_res + tol)


def _min_distortion_point(p: np.ndarray, d: DistortionMatrix) -> RDPoint:
    # Deterministic channel: each source symbol maps to its min-distortion
    # reconstruction (first index on ties).  Rate is H of the image.
    choice = np.argmin(d.values, axis=1)
    active = p > 0
    dist = float(np.sum(p[active] * d.values[active, choice[active]]))
    image = np.zeros(d.values.shape[1])
    np.add.at(image, choice[active], p[active])
    return RDPoint(rate=entropy(image), distortion=dist, slope=0.0)


def blahut_arimoto(
    p,
    d: DistortionMatrix,
    slope: float,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> RDPoint:
    """Alternating minimization of ``distortion + slope * rate`` over channels.

    Returns a point on the lower convex envelope of R(D) for the given slope.
    Raises :class:`ConvergenceError` (carrying the best iterate) if the
    Lagrangian has not stabilized within ``max_iters`` iterations.
    """
    p = _as_prob_vector(p, tol=1e-9)
    if slope < 0:
        raise ValueError("slope must be non-negative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if d.values.shape[0] != p.size:
        raise DistributionError("distortion matrix row count != source alphabet size")
    if slope == 0:
        return _min_distortion_point(p, d)

    active = p > 0
    pa = p[active]
    rho = d.values[active, :]
    lam = _LN2 / slope  # nats-per-distortion multiplier for this slope

    n_rec = rho.shape[1]
    w = np.exp(np.maximum(-lam * rho, -745.0))  # Boltzmann kernel, underflow-safe
    q_y = np.full(n_rec, 1.0 / n_rec)

    # Fixed-point iteration on the reconstruction marginal.  Two stops:
    # successive values of the variational objective F = -sum p log(w @ q)
    # (the Lagrangian of the half-step channel, in nats) differing by < tol,
    # or Blahut's certified bound log(max_y T_y) on the gap to the optimum.
    converged = False
    prev_obj = np.inf
    for _ in range(max_iters):
        f = np.maximum(w @ q_y, 1e-300)   # per-source normalizers
        t = (pa / f) @ w                  # marginal update multipliers
        q_y = q_y * t
        obj = -float(pa @ np.log(f)) / lam
        if (prev_obj - obj < tol
                or np.log(max(float(t.max()), 1e-300)) / lam < tol):
            converged = True
            break
        prev_obj = obj

    f = np.maximum(w @ q_y, 1e-300)
    q_cond = (w / f[:, None]) * q_y[None, :]
    q_cond /= q_cond.sum(axis=1, keepdims=True)
    q_marg = pa @ q_cond
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(q_cond > 0, q_cond / np.maximum(q_marg[None, :], 1e-300), 1.0)
        info = np.where(q_cond > 0, q_cond * np.log(ratio), 0.0)
    rate = max(0.0, float(pa @ info.sum(axis=1)) / _LN2)
    distortion = float(np.sum(pa[:, None] * q_cond * rho))
    best = RDPoint(rate=rate, distortion=distortion, slope=slope)
    if converged:
        return best
    raise ConvergenceError(
        f"Blahut-Arimoto did not converge within {max_iters} iterations", best
    )


def lagrangian_cost(point: RDPoint) -> float:
    return point.distortion + point.slope * point.rate


def residual_rd(
    j: DiscreteJointSource,
    d: DistortionMatrix,
    slope: float,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> RDPoint:
    """R-D point for coding Z = X - Y unconditionally.

    ``d`` is supplied over the residual alphabet (rows ordered like
    :func:`residual_alphabet`); by shift invariance, the returned distortion
    equals the input-domain distortion.
    """
    _, pz = residual_distribution(j)
    return blahut_arimoto(pz, d, slope, tol=tol, max_iters=max_iters)


def conditional_rd(
    j: DiscreteJointSource,
    d: DistortionMatrix,
    slope: float,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> RDPoint:
    """R-D point for coding Z = X - Y conditioned on Y.

    At fixed slope the Lagrangian separates per y-context: each conditional
    distribution p(Z | Y = y) is solved at the same slope and the results are
    mixed with weights p(y).
    """
    z_alpha = residual_alphabet(j)
    if d.values.shape[0] != z_alpha.size:
        raise DistributionError("distortion matrix row count != residual alphabet size")
    p_y = j.marginal_y()
    diffs = np.round(j.x_alphabet[:, None] - j.y_alphabet[None, :], 9)
    idx = np.searchsorted(z_alpha, diffs)

    rate = 0.0
    distortion = 0.0
    for k in range(p_y.size):
        if p_y[k] <= 0:
            continue
        pz_given_y = np.zeros(z_alpha.size)
        np.add.at(pz_given_y, idx[:, k], j.pmf[:, k] / p_y[k])
        pt = blahut_arimoto(pz_given_y, d, slope, tol=tol, max_iters=max_iters)
        rate += p_y[k] * pt.rate
        distortion += p_y[k] * pt.distortion
    return RDPoint(rate=float(rate), distortion=float(distortion), slope=slope)


@dataclass(frozen=True)
class SlopeComparison:
    slope: float
    r_c: RDPoint
    r_r: RDPoint
    holds: bool
    margin: float  # residual cost minus conditional cost (>= -tol when holds)


def verify_rd_inequality(
    j: DiscreteJointSource,
    d: DistortionMatrix,
    slopes,
    tol: float = 1e-6,
    ba_tol: float = DEFAULT_TOL,
    ba_max_iters: int = DEFAULT_MAX_ITERS,
) -> list[SlopeComparison]:
    """Compare conditional vs. residual Lagrangian costs at matched slopes.

    The comparison is done on the convex envelope, cost = D + slope * R: the
    conditional minimization runs over a superset of channels, so its cost can
    never exceed the residual one.  ``ba_tol``/``ba_max_iters`` tune the inner
    solver; slopes near a support-shrinking transition converge slowly and may
    need more than the default iteration budget.
    """
    slopes = list(slopes)
    if not slopes:
        raise ValueError("at least one slope is required")
    out = []
    for s in slopes:
        pc = conditional_rd(j, d, s, tol=ba_tol, max_iters=ba_max_iters)
        pr = residual_rd(j, d, s, tol=ba_tol, max_iters=ba_max_iters)
        margin = lagrangian_cost(pr) - lagrangian_cost(pc)
        out.append(SlopeComparison(s, pc, pr, margin >= -tol, margin))
    return out


@dataclass(frozen=True)
class DPIReport:
    i_yxhat: float
    i_yv: float
    holds: bool


def verify_dpi(chain: MarkovChainSpec, tol: float = 1e-9) -> DPIReport:
    """Data-processing inequality I(Y; Xhat) >= I(Y; V) along the chain."""
    if len(chain.channels) != 3:
        raise DistributionError("chain needs exactly three channels (X->Y->Xhat->V)")
    a, b, c = (ch.pmf for ch in chain.channels)
    p_y = chain.p_x @ a
    joint_y_xhat = p_y[:, None] * b
    joint_y_v = p_y[:, None] * (b @ c)
    i_yxhat = mutual_information_from_pmf(joint_y_xhat)
    i_yv = mutual_information_from_pmf(joint_y_v)
    return DPIReport(i_yxhat, i_yv, i_yxhat >= i_yv - tol)


def random_joint(
    rng: np.random.Generator, max_x: int = 8, max_y: int = 4
) -> DiscreteJointSource:
    """Seeded random joint source with small integer alphabets."""
    nx = int(rng.integers(2, max_x + 1))
    ny = int(rng.integers(1, max_y + 1))
    x_alpha = np.sort(rng.choice(np.arange(-8, 9), size=nx, replace=False)).astype(float)
    y_alpha = np.sort(rng.choice(np.arange(-4, 5), size=ny, replace=False)).astype(float)
    pmf = rng.random((nx, ny)) + 1e-3
    pmf /= pmf.sum()
    # Renormalize exactly: push rounding residue onto the largest entry.
    residue = 1.0 - pmf.sum()
    pmf.flat[np.argmax(pmf)] += residue
    return DiscreteJointSource(x_alpha, y_alpha, pmf)


# ---------------------------------------------------------------------------
# Plain-text / CSV interfaces
# ---------------------------------------------------------------------------

def save_joint(path, j: DiscreteJointSource) -> None:
    """Text format: line 1 x-alphabet, line 2 y-alphabet, then pmf rows."""
    with open(path, "w") as f:
        f.write(" ".join(repr(float(v)) for v in j.x_alphabet) + "\n")
        f.write(" ".join(repr(float(v)) for v in j.y_alphabet) + "\n")
        for row in j.pmf:
            f.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_joint(path) -> DiscreteJointSource:
    with open(path) as f:
        lines = [ln for ln in (raw.strip() for raw in f) if ln]
    if len(lines) < 3:
        raise DistributionError(f"{path}: expected two alphabet lines plus pmf rows")
    x_alpha = np.array([float(t) for t in lines[0].split()])
    y_alpha = np.array([float(t) for t in lines[1].split()])
    pmf = np.array([[float(t) for t in ln.split()] for ln in lines[2:]])
    return DiscreteJointSource(x_alpha, y_alpha, pmf)


def save_distortion(path, d: DistortionMatrix) -> None:
    with open(path, "w") as f:
        f.write(" ".join(repr(float(v)) for v in d.reconstruction_alphabet) + "\n")
        for row in d.values:
            f.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_distortion(path) -> DistortionMatrix:
    with open(path) as f:
        lines = [ln for ln in (raw.strip() for raw in f) if ln]
    rec = np.array([float(t) for t in lines[0].split()])
    values = np.array([[float(t) for t in ln.split()] for ln in lines[1:]])
    return DistortionMatrix(values, rec)


def write_rd_csv(path, points) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["slope", "rate_bits", "distortion"])
        for pt in points:
            w.writerow([pt.slope, pt.rate, pt.distortion])
