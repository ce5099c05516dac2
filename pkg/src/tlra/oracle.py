"""Brute-force reference implementations used as ground truth in tests.

Everything here materializes and uses exact dense linear algebra; nothing is
meant to be fast.  Desk-scale guards keep accidental huge inputs out.
"""

from __future__ import annotations

from itertools import product as iter_product

import numpy as np

from .errors import DimensionError, ResourceLimitError
from .transform import FactoredMatrix, ScalarTransform

DEFAULT_MAX_ENTRIES = 10_000_000

# relative singular-value cutoff for rank decisions
RANK_RTOL = 1e-10


def materialize(fm: FactoredMatrix, t: ScalarTransform, max_entries: int = DEFAULT_MAX_ENTRIES) -> np.ndarray:
    """Dense f(left @ right) as an n x d array."""
    if fm.n * fm.d > max_entries:
        raise ResourceLimitError(
            f"dense matrix would have {fm.n * fm.d} entries, ceiling is {max_entries}"
        )
    return t.apply(fm.left @ fm.right)


def best_rank_k_error(dense: np.ndarray, k: int) -> float:
    """Squared Frobenius error of the best rank-k approximation (SVD tail)."""
    dense = np.asarray(dense, dtype=np.float64)
    if not (0 <= k <= min(dense.shape)):
        raise DimensionError(f"k={k} out of range for shape {dense.shape}")
    sigma = np.linalg.svd(dense, compute_uv=False)
    return float(np.sum(sigma[k:] ** 2))


def eval_error(dense: np.ndarray, factors) -> float:
    """Exact squared Frobenius error between a dense matrix and a factor pair."""
    dense = np.asarray(dense, dtype=np.float64)
    approx = np.asarray(factors.left) @ np.asarray(factors.right)
    if approx.shape != dense.shape:
        raise DimensionError(f"shape mismatch: {approx.shape} vs {dense.shape}")
    return float(np.sum((dense - approx) ** 2))


def svd_rank(dense: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Numerical rank with a relative singular-value cutoff."""
    sigma = np.linalg.svd(np.asarray(dense, dtype=np.float64), compute_uv=False)
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    return int(np.count_nonzero(sigma > rtol * sigma[0]))


def svd_truncate(dense: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Best rank-k factorization (left n x k, right k x d) by exact SVD."""
    dense = np.asarray(dense, dtype=np.float64)
    u, s, vh = np.linalg.svd(dense, full_matrices=False)
    k = min(k, s.size)
    return u[:, :k] * s[:k], vh[:k]


def column_space_basis(dense: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the column space, via exact SVD."""
    dense = np.asarray(dense, dtype=np.float64)
    u, s, _ = np.linalg.svd(dense, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return u[:, :0]
    return u[:, s > rtol * s[0]]


def materialize_tensor_sketch(ts) -> np.ndarray:
    """Reconstruct the explicit m x r**p sketch matrix from the hash tables.

    Entry (row, flat(j1..jp)) is the product of the per-degree signs when the
    per-degree buckets sum to row modulo m, else zero.  Only usable when
    r**p is small; this is the ground truth for the FFT application path.
    """
    r = ts.dim
    width = r**ts.p
    if width * ts.m > DEFAULT_MAX_ENTRIES:
        raise ResourceLimitError(f"materialized sketch would have {width * ts.m} entries")
    mat = np.zeros((ts.m, width), dtype=np.float64)
    for flat, idx in enumerate(iter_product(range(r), repeat=ts.p)):
        row = sum(int(ts.buckets[t, j]) for t, j in enumerate(idx)) % ts.m
        sign = 1.0
        for t, j in enumerate(idx):
            sign *= float(ts.signs[t, j])
        mat[row, flat] = sign
    return mat
