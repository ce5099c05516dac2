import numpy as np
import pytest

from tlra import (
    FactoredMatrix,
    RankKFactors,
    UnsupportedTransformError,
    additive_lra,
    compute_L2,
    power,
    power_lra,
    projection_from_factors,
    relative_lra,
)
from tlra.generate import random_factors
from tlra.oracle import best_rank_k_error, eval_error, materialize, svd_rank


def test_full_tensor_rank_is_exact():
    for seed in range(5):
        fm = random_factors(32, 32, 2, seed=seed)
        rk = relative_lra(fm, 2, 4, 0.5, seed)  # k = r^p = 4
        assert rk.degenerate
        dense = materialize(fm, power(2))
        assert eval_error(dense, rk) <= 1e-9 * max(1.0, np.sum(dense**2))


def test_degenerate_padding_respects_k():
    fm = random_factors(16, 16, 2, seed=1)
    rk = relative_lra(fm, 2, 7, 0.5, seed=1)  # k > r^p = 4
    assert rk.left.shape == (16, 7) and rk.right.shape == (7, 16)
    assert rk.degenerate


def test_relative_guarantee_statistics():
    for p, eps in [(2, 0.5), (2, 1.0), (4, 0.5)]:
        hits = 0
        for seed in range(20):
            fm = random_factors(64, 64, 3, seed=seed)
            rk = relative_lra(fm, p, 4, eps, seed)
            dense = materialize(fm, power(p))
            err = eval_error(dense, rk)
            opt = best_rank_k_error(dense, 4)
            hits += err <= (1.0 + eps) * opt + 1e-9
        assert hits >= 16, f"p={p} eps={eps}: only {hits}/20 within bound"


def test_relative_known_spectrum():
    # left = right.T with orthogonal rows scaled 1..4: singular structure of the
    # squared product is known, so the k=1 error must track the oracle tail
    scales = np.array([1.0, 2.0, 3.0, 4.0])
    basis, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((32, 4)))
    left = basis * scales
    fm = FactoredMatrix(left=left, right=left.T)
    rk = relative_lra(fm, 2, 1, 0.5, seed=3)
    dense = materialize(fm, power(2))
    err = eval_error(dense, rk)
    opt = best_rank_k_error(dense, 1)
    assert err <= 1.5 * opt + 1e-9


def test_relative_rejects_odd_degree():
    fm = random_factors(8, 8, 2, seed=0)
    with pytest.raises(UnsupportedTransformError):
        relative_lra(fm, 3, 2, 0.5, seed=0)
    with pytest.raises(UnsupportedTransformError):
        additive_lra(fm, 1, 2, 0.5, seed=0)


def test_power_lra_accepts_odd_degree():
    # the pure-power core backs the reduction harness, which needs odd p
    fm = random_factors(24, 24, 2, seed=5)
    rk = power_lra(fm, 3, 8, 0.5, seed=5)  # k = r^p -> exact
    dense = materialize(fm, power(3))
    assert eval_error(dense, rk) <= 1e-9 * np.sum(dense**2)


def test_error_monotone_in_k():
    fm = random_factors(64, 64, 3, seed=11)
    dense = materialize(fm, power(2))
    errs = [eval_error(dense, relative_lra(fm, 2, k, 0.5, seed=11)) for k in (1, 2, 4)]
    assert errs[0] >= errs[1] - 1e-9
    assert errs[1] >= errs[2] - 1e-9


def test_exact_when_k_reaches_true_rank():
    # symmetric-tensor structure keeps rank(U'' V'') = 6 < r^p = 9 here
    fm = random_factors(40, 40, 3, seed=21)
    dense = materialize(fm, power(2))
    rank = svd_rank(dense)
    assert rank < 9
    rk = relative_lra(fm, 2, rank, 0.5, seed=21)
    assert eval_error(dense, rk) <= 1e-7 * np.sum(dense**2)


def test_additive_guarantee_statistics():
    hits = 0
    for seed in range(20):
        fm = random_factors(64, 64, 3, seed=seed)
        rk = additive_lra(fm, 2, 4, 0.5, seed)
        dense = materialize(fm, power(2))
        err = eval_error(dense, rk)
        bound = 1.5 * best_rank_k_error(dense, 4) + 0.25 * compute_L2(fm, 2)
        hits += err <= bound + 1e-9
    assert hits >= 16


def test_additive_zero_factors():
    fm = FactoredMatrix(left=np.zeros((6, 2)), right=np.zeros((2, 6)))
    rk = additive_lra(fm, 2, 2, 0.5, seed=0)
    np.testing.assert_allclose(rk.left @ rk.right, np.zeros((6, 6)), atol=1e-12)


def test_compute_L2_examples():
    fm = FactoredMatrix(left=np.array([[2.0]]), right=np.array([[3.0]]))
    assert compute_L2(fm, 1) == 36.0

    fm = random_factors(8, 8, 3, seed=2, unit_norm=True)
    assert abs(compute_L2(fm, 2) - 64.0) <= 1e-9

    fm = random_factors(32, 32, 3, seed=4, unit_norm=True)
    assert abs(compute_L2(fm, 2) - 1024.0) <= 1e-9


def test_compute_L2_matches_tensored_norms():
    from tlra import expand

    fm = random_factors(10, 12, 3, seed=9)
    p = 3
    want = (
        np.linalg.norm(expand(fm.left, p, "rows").expanded) ** 2
        * np.linalg.norm(expand(fm.right, p, "cols").expanded) ** 2
    )
    assert abs(compute_L2(fm, p) - want) <= 1e-9 * want


def test_projection_identity_columns():
    left = np.eye(6)[:, :3]
    proj = projection_from_factors(RankKFactors(left=left, right=np.zeros((3, 4)), k=3))
    assert not proj.reduced
    np.testing.assert_allclose(np.abs(proj.W), left, atol=1e-12)


def test_projection_duplicate_columns_reduced():
    col = np.arange(1.0, 6.0)[:, None]
    proj = projection_from_factors(RankKFactors(left=np.hstack([col, col]), right=np.zeros((2, 3)), k=2))
    assert proj.reduced
    assert proj.W.shape[1] == 1


def test_projection_spans_left_factor():
    rng = np.random.default_rng(6)
    left = rng.standard_normal((20, 5))
    proj = projection_from_factors(RankKFactors(left=left, right=np.zeros((5, 4)), k=5))
    w = proj.W
    assert np.abs(w.T @ w - np.eye(w.shape[1])).max() <= 1e-10
    residual = left - w @ (w.T @ left)
    assert np.abs(residual).max() <= 1e-9


def test_rank_validation():
    fm = random_factors(8, 8, 2, seed=0)
    with pytest.raises(Exception):
        relative_lra(fm, 2, 0, 0.5, seed=0)
    with pytest.raises(Exception):
        relative_lra(fm, 2, 9, 0.5, seed=0)  # k > min(n, d)


def test_relative_guarantee_rectangular_larger_scale():
    hits = 0
    for seed in range(20):
        fm = random_factors(128, 96, 3, seed=seed)
        rk = relative_lra(fm, 2, 4, 0.5, seed)
        dense = materialize(fm, power(2))
        hits += eval_error(dense, rk) <= 1.5 * best_rank_k_error(dense, 4) + 1e-9
    assert hits >= 16


def test_additive_rectangular():
    fm = random_factors(48, 80, 2, seed=3)
    rk = additive_lra(fm, 2, 3, 0.5, seed=3)
    assert rk.left.shape == (48, 3) and rk.right.shape == (3, 80)
    dense = materialize(fm, power(2))
    bound = 1.5 * best_rank_k_error(dense, 3) + 0.25 * compute_L2(fm, 2)
    assert eval_error(dense, rk) <= bound + 1e-9


def test_concurrent_invocations_match_serial():
    from concurrent.futures import ThreadPoolExecutor

    fm = random_factors(48, 48, 3, seed=0)
    serial = [relative_lra(fm, 2, 4, 0.5, seed) for seed in range(6)]
    with ThreadPoolExecutor(max_workers=6) as pool:
        parallel = list(pool.map(lambda s: relative_lra(fm, 2, 4, 0.5, s), range(6)))
    for a, b in zip(serial, parallel):
        np.testing.assert_array_equal(a.left, b.left)
        np.testing.assert_array_equal(a.right, b.right)
