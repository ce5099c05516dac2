"""Row/column self-tensoring (Khatri-Rao expansion) of matrix factors.

Expanding each row u of an n x r matrix into u (x) u (x) ... (x) u (p times)
turns the entrywise p-th power of a factored product into an ordinary product:
the inner product of two expanded rows equals the p-th power of the original
inner product.  The expanded width is exactly r**p.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ResourceLimitError

ROWS = "rows"
COLS = "cols"

DEFAULT_MEMORY_CEILING = 2 * 1024**3  # bytes of expanded storage
MEMORY_CEILING_ENV = "TLRA_MEMORY_CEILING"


def memory_ceiling() -> int:
    """Expansion budget in bytes; override with the TLRA_MEMORY_CEILING env var."""
    raw = os.environ.get(MEMORY_CEILING_ENV)
    if raw is None:
        return DEFAULT_MEMORY_CEILING
    try:
        value = int(raw)
    except ValueError as exc:
        raise ResourceLimitError(f"bad {MEMORY_CEILING_ENV} value: {raw!r}") from exc
    if value <= 0:
        raise ResourceLimitError(f"{MEMORY_CEILING_ENV} must be positive, got {value}")
    return value


@dataclass(frozen=True)
class TensoredFactor:
    """A materialized p-fold self-tensored factor.

    For orientation "rows" the expanded matrix is n x r**p and row i is
    base row i tensored with itself p times; for "cols" it is r**p x d with
    the analogous property per column.  Flat tensor index order is
    lexicographic: coordinate (j1, ..., jp) maps to sum(j_t * r**(p - t)).
    """

    base: np.ndarray
    p: int
    orientation: str
    expanded: np.ndarray

    @property
    def width(self) -> int:
        """Tensored dimension r**p."""
        return self.expanded.shape[1] if self.orientation == ROWS else self.expanded.shape[0]


def _check_expansion_budget(n_vectors: int, r: int, p: int, ceiling: int | None) -> None:
    limit = memory_ceiling() if ceiling is None else ceiling
    width = r**p
    needed = n_vectors * width * 8
    if needed > limit:
        raise ResourceLimitError(
            f"tensored factor would need {needed} bytes "
            f"({n_vectors} x {r}^{p}), ceiling is {limit}"
        )


def expand_rows_raw(base: np.ndarray, p: int) -> np.ndarray:
    """Expanded n x r**p array, rows tensored with themselves p times.

    Built by p-1 Kronecker accumulation passes over the rows.
    """
    acc = base
    for _ in range(p - 1):
        acc = (acc[:, :, None] * base[:, None, :]).reshape(base.shape[0], -1)
    return np.ascontiguousarray(acc, dtype=np.float64)


def expand(base: np.ndarray, p: int, orientation: str = ROWS, *, ceiling: int | None = None) -> TensoredFactor:
    """Materialize the p-fold self-tensored expansion of a factor.

    Raises ResourceLimitError when the expanded storage would exceed the
    memory ceiling (module default 2 GiB, env-overridable).
    """
    base = np.asarray(base, dtype=np.float64)
    if base.ndim != 2:
        raise DimensionError(f"expected 2-d factor, got shape {base.shape}")
    if p < 1:
        raise ValueError(f"tensor degree must be >= 1, got {p}")
    if orientation not in (ROWS, COLS):
        raise ValueError(f"orientation must be {ROWS!r} or {COLS!r}")
    work = base if orientation == ROWS else base.T
    _check_expansion_budget(work.shape[0], work.shape[1], p, ceiling)
    out = expand_rows_raw(np.ascontiguousarray(work), p)
    if orientation == COLS:
        out = np.ascontiguousarray(out.T)
    return TensoredFactor(base=base, p=p, orientation=orientation, expanded=out)


def expand_row(u: np.ndarray, p: int) -> np.ndarray:
    """Self-tensored expansion of a single vector, as a flat length r**p array."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {u.shape}")
    return expand_rows_raw(u[None, :], p)[0]


def tensored_matvec(rows_tf: TensoredFactor, cols_tf: TensoredFactor, z: np.ndarray) -> np.ndarray:
    """Product (expanded rows) @ (expanded cols) @ z without forming the n x d matrix.

    Equals the entrywise p-th power of base_rows @ base_cols applied to z.
    """
    if rows_tf.orientation != ROWS or cols_tf.orientation != COLS:
        raise DimensionError("tensored_matvec expects a rows-tensored and a cols-tensored factor")
    if rows_tf.p != cols_tf.p:
        raise DimensionError(f"tensor degrees differ: {rows_tf.p} vs {cols_tf.p}")
    if rows_tf.expanded.shape[1] != cols_tf.expanded.shape[0]:
        raise DimensionError(
            f"inner dimensions differ: {rows_tf.expanded.shape[1]} vs {cols_tf.expanded.shape[0]}"
        )
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (cols_tf.expanded.shape[1],):
        raise DimensionError(f"vector length {z.shape} does not match {cols_tf.expanded.shape[1]} columns")
    return rows_tf.expanded @ (cols_tf.expanded @ z)
