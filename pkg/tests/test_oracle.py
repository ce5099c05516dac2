import numpy as np
import pytest

from tlra import FactoredMatrix, RankKFactors, abs_power, entry, log1p_abs, power, relative_lra
from tlra.errors import ResourceLimitError
from tlra.generate import random_factors
from tlra.oracle import (
    best_rank_k_error,
    eval_error,
    materialize,
    svd_rank,
    svd_truncate,
)


def test_materialize_examples():
    fm = FactoredMatrix(left=np.array([[2.0]]), right=np.array([[3.0]]))
    np.testing.assert_array_equal(materialize(fm, power(2)), [[36.0]])

    fm = FactoredMatrix(left=np.eye(3), right=np.eye(3))
    dense = materialize(fm, log1p_abs())
    np.testing.assert_allclose(np.diag(dense), np.log(2.0) * np.ones(3))
    assert np.all(dense[~np.eye(3, dtype=bool)] == 0.0)


def test_materialize_matches_entry():
    fm = random_factors(9, 7, 3, seed=1)
    for t in (power(2), abs_power(3), log1p_abs()):
        dense = materialize(fm, t)
        for i in range(9):
            for j in range(7):
                assert abs(dense[i, j] - entry(fm, t, i, j)) <= 1e-12


def test_materialize_ceiling():
    fm = random_factors(100, 100, 2, seed=0)
    with pytest.raises(ResourceLimitError):
        materialize(fm, power(2), max_entries=100)


def test_best_rank_k_examples():
    rank1 = np.outer(np.arange(1.0, 5.0), np.arange(1.0, 4.0))
    assert best_rank_k_error(rank1, 1) <= 1e-20

    diag = np.diag([3.0, 2.0, 1.0])
    assert abs(best_rank_k_error(diag, 1) - 5.0) <= 1e-12


def test_best_rank_k_lower_bounds_random_trials():
    rng = np.random.default_rng(3)
    dense = rng.standard_normal((12, 10))
    k = 3
    tail = best_rank_k_error(dense, k)
    best_trial = np.inf
    for _ in range(1000):
        basis, _ = np.linalg.qr(rng.standard_normal((12, k)))
        trial = np.sum((dense - basis @ (basis.T @ dense)) ** 2)
        best_trial = min(best_trial, trial)
    assert tail <= best_trial + 1e-9


def test_best_rank_k_nonincreasing():
    dense = np.random.default_rng(4).standard_normal((15, 9))
    errs = [best_rank_k_error(dense, k) for k in range(10)]
    assert all(errs[i] >= errs[i + 1] - 1e-12 for i in range(9))


def test_eval_error_examples():
    dense = np.random.default_rng(5).standard_normal((6, 5))
    left, right = svd_truncate(dense, 5)
    exact = RankKFactors(left=left, right=right, k=5)
    assert eval_error(dense, exact) <= 1e-18 * np.sum(dense**2) + 1e-20

    zero = RankKFactors(left=np.zeros((6, 2)), right=np.zeros((2, 5)), k=2)
    assert abs(eval_error(dense, zero) - np.sum(dense**2)) <= 1e-12


def test_eval_error_on_capturable_instance():
    fm = random_factors(16, 16, 2, seed=6)
    dense = materialize(fm, power(2))
    rk = relative_lra(fm, 2, 4, 0.5, seed=6)  # k = r^p captures everything
    assert eval_error(dense, rk) <= 1e-7 * np.sum(dense**2)


def test_svd_reconstruction():
    dense = np.random.default_rng(7).standard_normal((20, 12))
    u, s, vh = np.linalg.svd(dense, full_matrices=False)
    np.testing.assert_allclose(
        (u * s) @ vh, dense, atol=1e-8 * np.linalg.norm(dense)
    )
    assert svd_rank(dense) == 12
