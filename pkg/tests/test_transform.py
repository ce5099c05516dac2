import numpy as np
import pytest

from tlra import (
    DimensionError,
    FactoredMatrix,
    ResourceLimitError,
    UnsupportedTransformError,
    abs_power,
    entry,
    log1p_abs,
    power,
    transformed_matvec,
)
from tlra.generate import random_factors
from tlra.oracle import materialize


def test_entry_examples():
    fm = FactoredMatrix(left=np.array([[1.0, 1.0]]), right=np.array([[1.0], [-1.0]]))
    assert entry(fm, power(2), 0, 0) == 0.0

    fm = FactoredMatrix(left=np.array([[1.0, 2.0]]), right=np.array([[2.0], [1.0]]))
    assert entry(fm, abs_power(3), 0, 0) == 64.0

    fm = FactoredMatrix(left=np.array([[0.0, 0.0]]), right=np.array([[5.0], [5.0]]))
    assert entry(fm, log1p_abs(), 0, 0) == 0.0


def test_entry_bounds():
    fm = random_factors(4, 5, 2, seed=0)
    with pytest.raises(DimensionError):
        entry(fm, power(1), 4, 0)
    with pytest.raises(DimensionError):
        entry(fm, power(1), 0, 5)
    with pytest.raises(DimensionError):
        entry(fm, power(1), -1, 0)


def test_factored_matrix_validation():
    with pytest.raises(DimensionError):
        FactoredMatrix(left=np.ones((2, 3)), right=np.ones((2, 4)))
    with pytest.raises(ValueError):
        FactoredMatrix(left=np.array([[np.inf]]), right=np.array([[1.0]]))


def test_matvec_identity_1x1():
    fm = FactoredMatrix(left=np.array([[1.0]]), right=np.array([[1.0]]))
    out = transformed_matvec(fm, power(1), np.array([3.0]))
    np.testing.assert_allclose(out, [3.0])


def test_matvec_absolute_value_row_sums():
    fm = FactoredMatrix(left=np.eye(2), right=np.array([[1.0, 0.0], [0.0, -1.0]]))
    out = transformed_matvec(fm, abs_power(1), np.array([1.0, 1.0]))
    np.testing.assert_allclose(out, [1.0, 1.0])


def test_dense_matches_implicit():
    rng = np.random.default_rng(3)
    fm = random_factors(16, 16, 2, seed=9)
    z = rng.standard_normal(16)
    dense = transformed_matvec(fm, power(2), z, mode="dense")
    implicit = transformed_matvec(fm, power(2), z, mode="implicit")
    np.testing.assert_allclose(implicit, dense, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("t", [power(1), power(3), abs_power(2), abs_power(3), log1p_abs()])
def test_dense_matches_oracle(t):
    rng = np.random.default_rng(11)
    for n, d, r in [(5, 7, 2), (64, 33, 3), (1, 64, 4)]:
        fm = random_factors(n, d, r, seed=n + d)
        z = rng.standard_normal(d)
        got = transformed_matvec(fm, t, z, mode="dense", block_size=7)
        want = materialize(fm, t) @ z
        np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-12)


def test_matvec_linearity():
    rng = np.random.default_rng(4)
    fm = random_factors(20, 15, 3, seed=2)
    z1, z2 = rng.standard_normal(15), rng.standard_normal(15)
    a, b = 0.7, -2.5
    for t in (power(2), log1p_abs()):
        lhs = transformed_matvec(fm, t, a * z1 + b * z2)
        rhs = a * transformed_matvec(fm, t, z1) + b * transformed_matvec(fm, t, z2)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-12)


def test_block_size_repeatable_and_consistent():
    fm = random_factors(40, 23, 3, seed=6)
    z = np.random.default_rng(0).standard_normal(23)
    # same block size: bitwise repeatable
    np.testing.assert_array_equal(
        transformed_matvec(fm, power(2), z, block_size=7),
        transformed_matvec(fm, power(2), z, block_size=7),
    )
    # different block sizes: same values up to kernel-choice rounding
    outs = [transformed_matvec(fm, power(2), z, block_size=b) for b in (1, 7, 256)]
    np.testing.assert_allclose(outs[0], outs[1], rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(outs[0], outs[2], rtol=1e-12, atol=1e-14)


def test_implicit_rejects_non_power_transforms():
    fm = random_factors(4, 4, 2, seed=1)
    z = np.ones(4)
    with pytest.raises(UnsupportedTransformError):
        transformed_matvec(fm, abs_power(3), z, mode="implicit")
    with pytest.raises(UnsupportedTransformError):
        transformed_matvec(fm, log1p_abs(), z, mode="implicit")
    # |x|^p with even p is the same function as x^p, so it is allowed
    out = transformed_matvec(fm, abs_power(2), z, mode="implicit")
    np.testing.assert_allclose(out, transformed_matvec(fm, power(2), z), rtol=1e-10)


def test_implicit_degree_cap():
    fm = random_factors(2, 2, 1, seed=1)
    with pytest.raises(ResourceLimitError):
        transformed_matvec(fm, power(13), np.ones(2), mode="implicit")


def test_transform_metadata():
    assert power(2).parity == "even"
    assert power(3).parity == "odd"
    assert abs_power(3).parity == "even"
    assert log1p_abs().parity == "even"
    assert power(3).is_kernel  # homogeneous polynomial kernels exist for every degree
    assert abs_power(2).is_kernel
    assert not abs_power(3).is_kernel
    assert not log1p_abs().is_kernel
    with pytest.raises(ValueError):
        power(0)
    with pytest.raises(ValueError):
        abs_power(-1)
