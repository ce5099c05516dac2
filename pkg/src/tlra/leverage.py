"""Exact and sketched row leverage scores of tall matrices.

The i-th leverage score of M is the largest squared share coordinate i can
take among unit vectors in the column span of M; scores lie in [0, 1] and sum
to the rank.  The sketched path follows the standard recipe: compress M with
a Gaussian map, take the R-factor of the compression, and estimate the row
norms of M @ R^-1 with a Gaussian probe, giving factor-2 accuracy per
coordinate with probability ~0.99 at the default sizes.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log2

import numpy as np

from .errors import ResourceLimitError
from .sketch import GaussianSketch

EXACT = "exact"
SKETCHED = "sketched"

DEFAULT_WIDTH_CEILING = 4096
ROW_FACTOR = 8
PROBE_FACTOR = 4


@dataclass(frozen=True)
class LeverageScores:
    scores: np.ndarray
    rank_estimate: float
    method: str
    approximation_factor: float
    fallback: bool = False


def exact_leverage(mat: np.ndarray, width_ceiling: int = DEFAULT_WIDTH_CEILING) -> LeverageScores:
    """Exact scores via a thin orthonormal basis of the column span."""
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {mat.shape}")
    if mat.shape[1] > width_ceiling:
        raise ResourceLimitError(f"width {mat.shape[1]} exceeds ceiling {width_ceiling}")
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        scores = np.zeros(mat.shape[0])
    else:
        tol = max(mat.shape) * np.finfo(np.float64).eps * s[0]
        rank = int(np.count_nonzero(s > tol))
        scores = np.minimum(np.sum(u[:, :rank] ** 2, axis=1), 1.0)
    return LeverageScores(
        scores=scores,
        rank_estimate=float(scores.sum()),
        method=EXACT,
        approximation_factor=1.0,
    )


def sketched_leverage(
    mat: np.ndarray,
    seed: int,
    row_factor: int = ROW_FACTOR,
    probe_factor: int = PROBE_FACTOR,
) -> LeverageScores:
    """Constant-factor score estimates in O(n t log n + poly(t)) time.

    The Gaussian compression uses min(row_factor * t * ceil(log2 n), n) rows
    (skipped entirely when that hits n, where compressing gains nothing) and
    the row-norm probe uses probe_factor * ceil(log2 n) columns.  A singular
    R-factor falls back to the exact path with the fallback flag set.
    """
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {mat.shape}")
    n, t = mat.shape
    if t >= n:
        # nothing to compress for wide or square inputs
        exact = exact_leverage(mat, width_ceiling=max(t, DEFAULT_WIDTH_CEILING))
        return LeverageScores(
            scores=exact.scores,
            rank_estimate=exact.rank_estimate,
            method=EXACT,
            approximation_factor=1.0,
            fallback=True,
        )
    logn = max(1, ceil(log2(max(n, 2))))

    rows = min(row_factor * t * logn, n)
    if rows >= n:
        compressed = mat
    else:
        sk = GaussianSketch(rows, n, _stream(seed, 0))
        compressed = sk.matrix @ mat

    r_factor = np.linalg.qr(compressed, mode="r")
    diag = np.abs(np.diag(r_factor))
    if diag.size == 0 or diag.min() <= max(compressed.shape) * np.finfo(np.float64).eps * diag.max():
        exact = exact_leverage(mat, width_ceiling=max(t, DEFAULT_WIDTH_CEILING))
        return LeverageScores(
            scores=exact.scores,
            rank_estimate=exact.rank_estimate,
            method=EXACT,
            approximation_factor=1.0,
            fallback=True,
        )

    # rows of M @ R^-1 have squared norms equal to the leverage scores
    whitened = np.linalg.solve(r_factor.T, mat.T).T
    probes = probe_factor * logn
    rng = np.random.default_rng(np.random.SeedSequence(entropy=_stream(seed, 1)))
    g = rng.standard_normal((t, probes)) / np.sqrt(probes)
    estimates = np.sum((whitened @ g) ** 2, axis=1)
    scores = np.clip(estimates, 0.0, 1.0)
    return LeverageScores(
        scores=scores,
        rank_estimate=float(scores.sum()),
        method=SKETCHED,
        approximation_factor=2.0,
    )


def threshold_support(ls: LeverageScores, tau: float) -> np.ndarray:
    """Indices with score >= tau, ascending."""
    if not (0.0 < tau <= 1.0):
        raise ValueError(f"threshold must be in (0, 1], got {tau}")
    return np.nonzero(ls.scores >= tau)[0]


def _stream(seed: int, tag: int) -> int:
    return (seed * 0x9E3779B97F4A7C15 + tag * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
