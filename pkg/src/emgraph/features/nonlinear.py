"""Recurrence, entropy and fractal-dimension features of delay-embedded signals."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from ..errors import (
    DegenerateDataError,
    InsufficientDataError,
    ParameterError,
    UndefinedScalingError,
)


def delay_embedding(x, m: int, tau: int) -> np.ndarray:
    """Stack delay vectors (x[i], x[i+tau], ..., x[i+(m-1)tau]) as rows."""
    x = np.asarray(x, dtype=float)
    if m < 1 or tau < 1:
        raise ParameterError("embedding dimension and delay must be >= 1")
    count = x.size - (m - 1) * tau
    if count < 1:
        raise InsufficientDataError("series too short for the requested embedding")
    return np.stack([x[k * tau : k * tau + count] for k in range(m)], axis=1)


def recurrence_matrix(x, m: int, tau: int, eps: float) -> np.ndarray:
    """Boolean matrix R[i,j] = Euclidean distance of delay vectors i,j <= eps.

    Symmetric with a unit diagonal. Distances are computed exactly as a naive
    pairwise evaluation would, so threshold comparisons are reproducible.
    """
    if eps < 0:
        raise ParameterError("eps must be nonnegative")
    emb = delay_embedding(x, m, tau)
    if emb.shape[0] < 2:
        raise InsufficientDataError("need at least 2 delay vectors")
    diff = emb[:, None, :] - emb[None, :, :]
    dist = np.sqrt(np.sum(diff**2, axis=2))
    return dist <= eps


class RqaMeasures(NamedTuple):
    rec: float
    det: float


def rqa_measures(matrix: np.ndarray, l_min: int = 2) -> RqaMeasures:
    """Recurrence rate and determinism of a recurrence matrix.

    rec is the density of recurrence points off the main diagonal. det is the
    fraction of those points lying on diagonal line segments (maximal runs
    along any off-main diagonal) of length >= l_min. Empty ratios are 0.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ParameterError("recurrence matrix must be square")
    if not np.array_equal(matrix, matrix.T):
        raise ParameterError("recurrence matrix must be symmetric")
    if l_min < 2:
        raise ParameterError("l_min must be >= 2")
    n = matrix.shape[0]
    if n < l_min:
        raise InsufficientDataError("matrix smaller than l_min")

    off = matrix.astype(bool).copy()
    np.fill_diagonal(off, False)
    total = int(off.sum())
    denom = n * n - n
    rec = total / denom if denom > 0 else 0.0
    if total == 0:
        return RqaMeasures(rec=rec, det=0.0)

    det_points = _diagonal_line_points(off, l_min)
    return RqaMeasures(rec=rec, det=det_points / total)


def _diagonal_line_points(off: np.ndarray, l_min: int) -> int:
    """Points on maximal diagonal runs of length >= l_min (main diagonal excluded)."""
    n = off.shape[0]
    o = off.astype(np.int64)
    # run[i,j] = length of the run of ones ending at (i,j) along its diagonal
    run = np.zeros_like(o)
    run[0, :] = o[0, :]
    for i in range(1, n):
        run[i, 0] = o[i, 0]
        run[i, 1:] = o[i, 1:] * (run[i - 1, :-1] + 1)
    # a run ends where the next diagonal cell is absent or zero
    ends = off.copy()
    ends[:-1, :-1] &= ~off[1:, 1:]
    lengths = run[ends]
    return int(lengths[lengths >= l_min].sum())


class SampleEntropyResult(NamedTuple):
    value: float
    capped: bool


def sample_entropy(x, m: int = 2, r: float | None = None) -> SampleEntropyResult:
    """Sample entropy -ln(A/B) in nats.

    B counts ordered template pairs (i != j) of length m within Chebyshev
    distance r; A counts the same at length m+1, both over the first N-m
    start indices. When no m-template pair extends (A = 0) the value is
    capped at ln(B) + ln(N) and flagged instead of returning infinity.

    r defaults to 0.2 times the population SD of x.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < m + 2:
        raise InsufficientDataError("sample entropy needs at least m + 2 samples")
    if r is None:
        r = 0.2 * float(np.std(x))
    if r <= 0:
        raise DegenerateDataError("tolerance r must be positive (constant signal?)")

    b = _template_match_count(x, m, r)
    a = _template_match_count(x, m + 1, r, n_templates=n - m)
    if a > 0 and b > 0:
        return SampleEntropyResult(value=-math.log(a / b), capped=False)
    cap = math.log(b if b > 0 else 1) + math.log(n)
    return SampleEntropyResult(value=cap, capped=True)


def _template_match_count(x, m: int, r: float, n_templates: int | None = None) -> int:
    """Ordered pairs of length-m templates within Chebyshev distance r."""
    n = x.size
    if n_templates is None:
        n_templates = n - m
    emb = np.stack([x[k : k + n_templates] for k in range(m)], axis=1)
    within = np.ones((n_templates, n_templates), dtype=bool)
    for k in range(m):
        col = emb[:, k]
        within &= np.abs(col[:, None] - col[None, :]) <= r
    np.fill_diagonal(within, False)
    return int(within.sum())


def default_radii(x, n_radii: int = 12, lo_scale: float = 0.05, hi_scale: float = 2.0) -> np.ndarray:
    """Logarithmically spaced radii spanning lo_scale..hi_scale times the SD of x."""
    sd = float(np.std(np.asarray(x, dtype=float)))
    if sd <= 0:
        raise DegenerateDataError("cannot derive radii from a constant signal")
    return np.geomspace(lo_scale * sd, hi_scale * sd, n_radii)


def correlation_dimension(x, m: int = 3, radii: np.ndarray | None = None, tau: int = 1) -> float:
    """Grassberger-Procaccia scaling exponent of the correlation sum.

    C(r) is the fraction of delay-vector pairs closer than r; the dimension
    is the least-squares slope of log C(r) versus log r over radii where
    0 < C(r) < 1, clamped to [0, m]. A fully saturated correlation sum
    (all pairs coincide) returns 0.
    """
    x = np.asarray(x, dtype=float)
    if radii is None:
        radii = default_radii(x)
    radii = np.asarray(radii, dtype=float)
    if radii.size < 4:
        raise ParameterError("need at least 4 radii")
    if np.any(radii <= 0):
        raise ParameterError("radii must be positive")
    if float(np.max(radii)) / float(np.min(radii)) < 10.0:
        raise ParameterError("radii must span at least one decade")

    emb = delay_embedding(x, m, tau)
    n_vec = emb.shape[0]
    if n_vec < 50:
        raise InsufficientDataError("need at least 50 delay vectors")

    iu, ju = np.triu_indices(n_vec, k=1)
    dist = np.sqrt(np.sum((emb[iu] - emb[ju]) ** 2, axis=1))
    n_pairs = dist.size
    corr = np.array([np.count_nonzero(dist < r) / n_pairs for r in np.sort(radii)])

    usable = (corr > 0) & (corr < 1)
    if np.count_nonzero(usable) < 2:
        if np.all(corr == 1.0):
            return 0.0
        raise UndefinedScalingError(
            "correlation sum has fewer than 2 radii strictly between 0 and 1"
        )
    log_r = np.log(np.sort(radii)[usable])
    log_c = np.log(corr[usable])
    slope = np.polyfit(log_r, log_c, 1)[0]
    return float(np.clip(slope, 0.0, m))
