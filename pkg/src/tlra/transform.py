"""Scalar entrywise transforms and the implicit transformed matrix.

The matrix of interest is f(L @ R) for factors L (n x r) and R (r x d) and a
scalar function f applied entrywise.  It is never materialized here; this
module provides exact entry access and matrix-vector products against it,
either by streaming dense rows or through the tensored linearization when f
is a pure power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ResourceLimitError, UnsupportedTransformError
from .tensoring import expand, tensored_matvec

POWER = "power"
ABS_POWER = "abs-power"
LOG1P_ABS = "log1p-abs"

_KINDS = (POWER, ABS_POWER, LOG1P_ABS)

MAX_IMPLICIT_DEGREE = 12
DEFAULT_BLOCK_SIZE = 256

DENSE = "dense"
IMPLICIT = "implicit"


@dataclass(frozen=True)
class ScalarTransform:
    """An entrywise scalar function: x**p, |x|**p, or log(1 + |x|).

    The degree p is ignored for the log transform.  Even powers and even
    absolute powers coincide; odd absolute powers and the log transform are
    even functions of x but are not pure powers, which is what separates the
    fast paths from the dense one.
    """

    kind: str
    p: int = 1

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind != LOG1P_ABS and (int(self.p) != self.p or self.p < 1):
            raise ValueError(f"degree must be a positive integer, got {self.p!r}")

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Apply the transform entrywise (vectorized)."""
        x = np.asarray(x, dtype=np.float64)
        if self.kind == POWER:
            return x**self.p
        if self.kind == ABS_POWER:
            return np.abs(x) ** self.p
        return np.log1p(np.abs(x))

    @property
    def parity(self) -> str:
        """"even" when f(-x) = f(x), "odd" when f(-x) = -f(x)."""
        if self.kind == POWER and self.p % 2 == 1:
            return "odd"
        return "even"

    @property
    def is_pure_power(self) -> bool:
        """True when f(x) = x**p exactly, i.e. the tensored linearization applies."""
        if self.kind == POWER:
            return True
        return self.kind == ABS_POWER and self.p % 2 == 0

    @property
    def is_kernel(self) -> bool:
        """True when f(M @ M.T) is positive semidefinite for every M."""
        return self.is_pure_power


def power(p: int) -> ScalarTransform:
    return ScalarTransform(POWER, p)


def abs_power(p: int) -> ScalarTransform:
    return ScalarTransform(ABS_POWER, p)


def log1p_abs() -> ScalarTransform:
    return ScalarTransform(LOG1P_ABS)


@dataclass(frozen=True)
class FactoredMatrix:
    """The factor pair (left, right) defining the implicit matrix f(left @ right)."""

    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        left = np.ascontiguousarray(self.left, dtype=np.float64)
        right = np.ascontiguousarray(self.right, dtype=np.float64)
        if left.ndim != 2 or right.ndim != 2:
            raise DimensionError("factors must be 2-d arrays")
        if left.shape[1] != right.shape[0]:
            raise DimensionError(
                f"inner dimensions differ: left is {left.shape}, right is {right.shape}"
            )
        if min(left.shape) < 1 or min(right.shape) < 1:
            raise DimensionError("all dimensions must be >= 1")
        if not (np.isfinite(left).all() and np.isfinite(right).all()):
            raise ValueError("factors must have finite entries")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def n(self) -> int:
        return self.left.shape[0]

    @property
    def d(self) -> int:
        return self.right.shape[1]

    @property
    def r(self) -> int:
        return self.left.shape[1]


def entry(fm: FactoredMatrix, t: ScalarTransform, i: int, j: int) -> float:
    """Exact entry f(<left_i, right_j>), computed in O(r)."""
    if not (0 <= i < fm.n):
        raise DimensionError(f"row index {i} out of range [0, {fm.n})")
    if not (0 <= j < fm.d):
        raise DimensionError(f"column index {j} out of range [0, {fm.d})")
    return float(t.apply(fm.left[i] @ fm.right[:, j]))


def transformed_matvec(
    fm: FactoredMatrix,
    t: ScalarTransform,
    z: np.ndarray,
    mode: str = DENSE,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> np.ndarray:
    """Compute f(left @ right) @ z without materializing the n x d matrix.

    Dense mode streams blocks of rows of the transformed matrix and works for
    every transform in O(n*d*r) time.  Implicit mode goes through the
    tensored factors in O((n+d) * r**p) time and exists only for pure powers
    (x**p, or |x|**p with even p).
    """
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (fm.d,):
        raise DimensionError(f"vector has shape {z.shape}, expected ({fm.d},)")
    if mode == DENSE:
        if block_size < 1:
            raise ValueError(f"block size must be >= 1, got {block_size}")
        out = np.empty(fm.n, dtype=np.float64)
        for start in range(0, fm.n, block_size):
            stop = min(start + block_size, fm.n)
            block = fm.left[start:stop] @ fm.right
            out[start:stop] = t.apply(block) @ z
        return out
    if mode == IMPLICIT:
        if not t.is_pure_power:
            raise UnsupportedTransformError(
                f"implicit matvec needs a pure power transform, got {t.kind}(p={t.p}); "
                "use dense mode"
            )
        if t.p > MAX_IMPLICIT_DEGREE:
            raise ResourceLimitError(
                f"implicit matvec capped at degree {MAX_IMPLICIT_DEGREE}, got {t.p}"
            )
        rows_tf = expand(fm.left, t.p, "rows")
        cols_tf = expand(fm.right, t.p, "cols")
        return tensored_matvec(rows_tf, cols_tf, z)
    raise ValueError(f"mode must be {DENSE!r} or {IMPLICIT!r}, got {mode!r}")
