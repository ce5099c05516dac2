"""Shared on-disk matrix container and factor-pair serialization.

Binary layout: 4-byte magic "TLRA", one version byte, two unsigned 64-bit
little-endian dimensions (rows, cols), then rows*cols IEEE float64 values in
row-major order.  Small matrices can also be imported from CSV.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .lra import RankKFactors

MAGIC = b"TLRA"
VERSION = 1
_HEADER = struct.Struct("<4sBQQ")


def save_matrix(path, mat: np.ndarray) -> None:
    mat = np.ascontiguousarray(mat, dtype=np.float64)
    if mat.ndim != 2:
        raise ValueError(f"container holds 2-d matrices, got shape {mat.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, mat.shape[0], mat.shape[1]))
        fh.write(mat.astype("<f8").tobytes())


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, rows, cols = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        data = fh.read(rows * cols * 8)
        if len(data) != rows * cols * 8:
            raise ValueError(f"{path}: truncated payload")
    return np.frombuffer(data, dtype="<f8").reshape(rows, cols).copy()


def load_csv(path) -> np.ndarray:
    """CSV import for small matrices."""
    mat = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return np.ascontiguousarray(mat)


def save_factors(rk: RankKFactors, basepath) -> dict:
    """Write a factor pair as two containers plus a JSON metadata sidecar.

    Returns the metadata dict; files are <base>.left.mat, <base>.right.mat
    and <base>.json.
    """
    base = Path(basepath)
    save_matrix(base.with_suffix(base.suffix + ".left.mat"), rk.left)
    save_matrix(base.with_suffix(base.suffix + ".right.mat"), rk.right)
    meta = {
        "k": rk.k,
        "epsilon": rk.epsilon,
        "seed": rk.seed,
        "achievedError": rk.achieved_error,
        "degenerate": rk.degenerate,
    }
    base.with_suffix(base.suffix + ".json").write_text(json.dumps(meta, indent=2))
    return meta


def load_factors(basepath) -> RankKFactors:
    base = Path(basepath)
    left = load_matrix(base.with_suffix(base.suffix + ".left.mat"))
    right = load_matrix(base.with_suffix(base.suffix + ".right.mat"))
    meta = json.loads(base.with_suffix(base.suffix + ".json").read_text())
    return RankKFactors(
        left=left,
        right=right,
        k=int(meta["k"]),
        epsilon=meta.get("epsilon"),
        seed=meta.get("seed"),
        achieved_error=meta.get("achievedError"),
        degenerate=bool(meta.get("degenerate", False)),
    )
