"""Seeded random sketching operators.

Two families: dense Gaussian sketches (Johnson-Lindenstrauss style subspace
embeddings), and a tensor sketch that applies a CountSketch-like map to the
p-fold self-tensoring of a vector without ever materializing the r**p
coordinates, using one bucket/sign hash pair per degree and an FFT-domain
circular convolution.

Hashing uses a fixed 64-bit mix (splitmix64) so operators regenerate
bit-identically from their seeds on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .tensoring import TensoredFactor

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

LEFT = "left"
RIGHT = "right"


def splitmix64(x) -> np.ndarray:
    """The splitmix64 finalizer, vectorized over uint64 input (wrapping arithmetic)."""
    with np.errstate(over="ignore"):
        z = (np.asarray(x).astype(np.uint64) + _GAMMA) & _MASK64
        z = (z ^ (z >> np.uint64(30))) * _MIX1 & _MASK64
        z = (z ^ (z >> np.uint64(27))) * _MIX2 & _MASK64
        return z ^ (z >> np.uint64(31))


def _hash_lane(seed: int, lane: int, count: int) -> np.ndarray:
    """count deterministic 64-bit values for one (seed, lane) stream."""
    with np.errstate(over="ignore"):
        lane_seed = splitmix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ (np.uint64(lane) * _GAMMA & _MASK64))
        return splitmix64(lane_seed + np.arange(1, count + 1, dtype=np.uint64) * _GAMMA & _MASK64)


@dataclass(frozen=True)
class GaussianSketch:
    """Dense Gaussian sketch with i.i.d. N(0, 1/m) entries, m = number of rows.

    The matrix is generated eagerly from the seed and cached; regeneration
    from the same seed is bitwise identical.
    """

    m: int
    dim: int
    seed: int
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.m < 1 or self.dim < 1:
            raise DimensionError(f"sketch dims must be >= 1, got {self.m} x {self.dim}")
        rng = np.random.default_rng(np.random.SeedSequence(entropy=self.seed))
        mat = rng.standard_normal((self.m, self.dim)) / np.sqrt(self.m)
        object.__setattr__(self, "matrix", mat)

    @property
    def scale(self) -> float:
        return 1.0 / np.sqrt(self.m)


def gaussian_apply(sk: GaussianSketch, mat: np.ndarray, side: str = LEFT) -> np.ndarray:
    """S @ M (side="left", compressing rows) or M @ S.T (side="right", columns)."""
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2:
        raise DimensionError(f"expected 2-d input, got shape {mat.shape}")
    if side == LEFT:
        if mat.shape[0] != sk.dim:
            raise DimensionError(f"sketch dim {sk.dim} does not match {mat.shape[0]} rows")
        return sk.matrix @ mat
    if side == RIGHT:
        if mat.shape[1] != sk.dim:
            raise DimensionError(f"sketch dim {sk.dim} does not match {mat.shape[1]} columns")
        return mat @ sk.matrix.T
    raise ValueError(f"side must be {LEFT!r} or {RIGHT!r}, got {side!r}")


@dataclass(frozen=True)
class TensorSketchOp:
    """Linear sketch of p-fold self-tensored vectors into m coordinates.

    Per degree t there is a bucket hash h_t: [r] -> [m] and a sign hash
    s_t: [r] -> {-1, +1}.  The sketch of u (x) ... (x) u at coordinate b is
    the sum of prod_t s_t(j_t) u_{j_t} over tuples with sum_t h_t(j_t) = b
    mod m, which is computable as a circular convolution of the p per-degree
    CountSketches of u.
    """

    m: int
    p: int
    dim: int
    buckets: np.ndarray  # (p, dim) ints in [0, m)
    signs: np.ndarray  # (p, dim) entries in {-1.0, +1.0}

    @classmethod
    def make(cls, m: int, p: int, dim: int, seed: int) -> "TensorSketchOp":
        """Derive all hash tables deterministically from one 64-bit seed."""
        if m < 1 or p < 1 or dim < 1:
            raise DimensionError(f"bad sketch parameters m={m}, p={p}, dim={dim}")
        buckets = np.empty((p, dim), dtype=np.int64)
        signs = np.empty((p, dim), dtype=np.float64)
        for t in range(p):
            buckets[t] = (_hash_lane(seed, 2 * t, dim) % np.uint64(m)).astype(np.int64)
            signs[t] = 1.0 - 2.0 * (_hash_lane(seed, 2 * t + 1, dim) & np.uint64(1)).astype(np.float64)
        return cls(m=m, p=p, dim=dim, buckets=buckets, signs=signs)

    @classmethod
    def from_hashes(cls, m: int, buckets, signs) -> "TensorSketchOp":
        """Build an operator from explicit hash tables (mainly for tests)."""
        buckets = np.asarray(buckets, dtype=np.int64)
        signs = np.asarray(signs, dtype=np.float64)
        if buckets.ndim != 2 or buckets.shape != signs.shape:
            raise DimensionError("buckets and signs must be matching (p, dim) arrays")
        if buckets.min() < 0 or buckets.max() >= m:
            raise DimensionError(f"bucket values must lie in [0, {m})")
        if not np.all(np.abs(signs) == 1.0):
            raise ValueError("signs must be +-1")
        return cls(m=m, p=buckets.shape[0], dim=buckets.shape[1], buckets=buckets, signs=signs)


def _degree_countsketch(ts: TensorSketchOp, mat: np.ndarray, t: int) -> np.ndarray:
    """CountSketch of every row of mat under the degree-t hash pair."""
    out = np.zeros((mat.shape[0], ts.m), dtype=np.float64)
    for j in range(ts.dim):
        out[:, ts.buckets[t, j]] += ts.signs[t, j] * mat[:, j]
    return out


def tensorsketch_rows(ts: TensorSketchOp, mat: np.ndarray) -> np.ndarray:
    """Sketch the p-fold tensoring of every row of an n x r matrix, yielding n x m.

    Cost O(p * n * (r + m log m)); the r**p tensoring is never materialized.
    """
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[1] != ts.dim:
        raise DimensionError(f"expected shape (*, {ts.dim}), got {mat.shape}")
    if ts.p == 1:
        return _degree_countsketch(ts, mat, 0)
    spectrum = np.fft.fft(_degree_countsketch(ts, mat, 0), axis=1)
    for t in range(1, ts.p):
        spectrum *= np.fft.fft(_degree_countsketch(ts, mat, t), axis=1)
    return np.real(np.fft.ifft(spectrum, axis=1))


def tensorsketch_cols(ts: TensorSketchOp, mat: np.ndarray) -> np.ndarray:
    """Column version: sketch every column of an r x d matrix, yielding m x d."""
    return tensorsketch_rows(ts, np.asarray(mat, dtype=np.float64).T).T


def tensorsketch_apply_row(ts: TensorSketchOp, u: np.ndarray) -> np.ndarray:
    """Sketch of u (x) ... (x) u for a single length-r vector."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {u.shape}")
    return tensorsketch_rows(ts, u[None, :])[0]


def approx_matrix_product_check(rows_tf: TensoredFactor, cols_tf: TensoredFactor, ts: TensorSketchOp) -> float:
    """Frobenius error ratio of the sketched tensored product (diagnostic).

    Returns |sk(L) @ sk(R) - L'' @ R''|_F / (|L''|_F |R''|_F) where L'', R''
    are the materialized tensored factors and sk is the tensor sketch applied
    to the base factors.  The degenerate 0/0 case is reported as 0.
    """
    if rows_tf.p != ts.p or cols_tf.p != ts.p:
        raise DimensionError("tensor degrees of the factors and sketch differ")
    if rows_tf.base.shape[1] != ts.dim or cols_tf.base.shape[0] != ts.dim:
        raise DimensionError("base dimensions do not match the sketch")
    denom = float(np.linalg.norm(rows_tf.expanded) * np.linalg.norm(cols_tf.expanded))
    if denom == 0.0:
        return 0.0
    sk_left = tensorsketch_rows(ts, rows_tf.base)
    sk_right = tensorsketch_cols(ts, cols_tf.base)
    exact = rows_tf.expanded @ cols_tf.expanded
    num = float(np.linalg.norm(sk_left @ sk_right - exact))
    return num / denom
