"""Deterministic instance generators for experiments and tests."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .reduction import OvpInstance
from .transform import FactoredMatrix

PLANT_DENSITY = 0.75
_MAX_FIXUP_ROUNDS = 200


def random_factors(n: int, d: int, r: int, seed: int, unit_norm: bool = False) -> FactoredMatrix:
    """Factor pair with entries uniform in [-1, 1].

    With unit_norm, rows of the left factor and columns of the right factor
    are scaled to unit Euclidean norm.
    """
    if min(n, d, r) < 1:
        raise ConfigError(f"dimensions must be positive, got n={n}, d={d}, r={r}")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=[seed & 0xFFFFFFFFFFFFFFFF, 0xFA]))
    left = rng.uniform(-1.0, 1.0, size=(n, r))
    right = rng.uniform(-1.0, 1.0, size=(r, d))
    if unit_norm:
        left /= np.linalg.norm(left, axis=1, keepdims=True)
        right /= np.linalg.norm(right, axis=0, keepdims=True)
    return FactoredMatrix(left=left, right=right)


def planted_ovp(n: int, d: int, s: int, q: int, seed: int, density: float = PLANT_DENSITY) -> OvpInstance:
    """Binary instance with exactly q orthogonal pairs, verified exhaustively.

    Planted pair t gets disjoint cyclic support windows (vector a on window
    t..t+s//2, vector b on the complement), which keeps distinct planted
    vectors non-orthogonal to each other; all remaining vectors are sampled
    at the given density and resampled until every non-planted pair has a
    positive dot product.
    """
    if min(n, d) < 1 or s < 2:
        raise ConfigError(f"need n, d >= 1 and s >= 2, got n={n}, d={d}, s={s}")
    if q < 0 or q > min(n, d, s):
        raise ConfigError(f"cannot plant {q} pairs with n={n}, d={d}, s={s}")
    if not (0.0 < density < 1.0):
        raise ConfigError(f"density must be in (0, 1), got {density}")

    rng = np.random.default_rng(np.random.SeedSequence(entropy=[seed & 0xFFFFFFFFFFFFFFFF, 0x0F]))
    half = s // 2

    def sample(count):
        return (rng.random((count, s)) < density).astype(np.int64)

    a = sample(n)
    b = sample(d)

    rows = rng.permutation(n)[:q]
    cols = rng.permutation(d)[:q]
    planted = []
    for t in range(q):
        window = (np.arange(half) + t) % s
        a[rows[t]] = 0
        a[rows[t], window] = 1
        b[cols[t]] = 0
        b[cols[t]] = 1 - np.isin(np.arange(s), window).astype(np.int64)
        planted.append((int(rows[t]), int(cols[t])))
    planted_set = set(planted)
    fixed_rows = set(int(i) for i in rows)
    fixed_cols = set(int(j) for j in cols)

    for _ in range(_MAX_FIXUP_ROUNDS):
        dots = a @ b.T
        bad = [
            (int(i), int(j))
            for i, j in zip(*np.nonzero(dots == 0))
            if (int(i), int(j)) not in planted_set
        ]
        if not bad:
            break
        for i, j in bad:
            if j not in fixed_cols:
                b[j] = sample(1)[0]
            elif i not in fixed_rows:
                a[i] = sample(1)[0]
            else:  # two planted vectors collide; window construction prevents this
                raise ConfigError("planted windows collided; use a larger s")
    else:
        raise ConfigError(f"could not remove accidental orthogonal pairs (s={s} too small?)")

    inst = OvpInstance(vectors_a=a, vectors_b=b, planted=tuple(planted))
    zeros = np.count_nonzero(inst.vectors_a @ inst.vectors_b.T == 0)
    if zeros != q:
        raise ConfigError(f"generator produced {zeros} orthogonal pairs, wanted {q}")
    return inst
