import math

import numpy as np
import pytest

from csynth.core import RandomSource
from csynth.errors import CapacityError, DimensionError, ValidationError
from csynth.gaussian import (
    FactorPair,
    RankKFactor,
    approx_error,
    deviation_bound,
    factor_via_svd,
    gaussian_rank_k,
    make_factor_pair,
    suggested_rank,
)
from csynth.norm import identity_rank_lb
from oracles import sigma_max


def test_factor_examples():
    f = factor_via_svd(np.eye(2))
    np.testing.assert_allclose(np.abs(f.P), np.eye(2), atol=1e-14)
    assert f.D == pytest.approx(1.0)
    assert factor_via_svd(np.diag([4.0, 1.0])).D == pytest.approx(4.0)


@pytest.mark.parametrize("shape", [(8, 5), (5, 8), (1, 6), (7, 1), (12, 12)])
def test_factor_random(shape):
    A = np.random.default_rng(sum(shape)).standard_normal(shape)
    f = factor_via_svd(A)
    assert np.abs(f.matrix() - A).max() <= 1e-8
    assert f.D <= sigma_max(A) + 1e-8
    assert math.sqrt(f.row_norm_sq()) <= math.sqrt(f.D) + 1e-12


def test_factor_rank_deficient_and_zero():
    u = np.arange(1.0, 6.0)
    A = np.outer(u, u[:4])
    f = factor_via_svd(A)
    assert np.abs(f.matrix() - A).max() <= 1e-8
    z = factor_via_svd(np.zeros((3, 2)))
    assert z.D == 0 and not z.matrix().any()


def test_make_factor_pair_validates():
    f = make_factor_pair([[3.0, 4.0]], [[1.0, 0.0]])
    assert f.D == 25
    with pytest.raises(ValidationError):
        make_factor_pair([[3.0, 4.0]], [[1.0, 0.0]], D=10)
    with pytest.raises(DimensionError):
        make_factor_pair([[1.0]], [[1.0, 2.0]])


def test_zero_factor_gives_zero():
    f = FactorPair(np.zeros((3, 2)), np.ones((4, 2)), 2.0)
    r = gaussian_rank_k(f, 5, RandomSource(0))
    assert not r.matrix().any()


def test_rows_are_projections():
    rs = np.random.default_rng(1)
    f = make_factor_pair(rs.standard_normal((5, 3)), rs.standard_normal((4, 3)))
    r = gaussian_rank_k(f, 6, RandomSource(2))
    xi = RandomSource(2)
    Xi = np.stack([xi.normal(3) for _ in range(6)])
    np.testing.assert_allclose(r.left, Xi @ f.P.T, atol=1e-14)
    np.testing.assert_allclose(r.right, Xi @ f.Q.T, atol=1e-14)
    assert r.scale == pytest.approx(1 / 6)
    assert np.linalg.matrix_rank(r.matrix()) <= 6


def test_unbiased_entry():
    rs = np.random.default_rng(3)
    f = make_factor_pair(rs.standard_normal((2, 3)), rs.standard_normal((2, 3)))
    target = f.matrix()[0, 0]
    vals = np.array([gaussian_rank_k(f, 1, RandomSource(s)).matrix()[0, 0] for s in range(10_000)])
    se = vals.std() / math.sqrt(vals.size)
    assert abs(vals.mean() - target) <= 3 * se


def test_deviation_bound_values():
    assert suggested_rank(64, 64) == 78
    assert deviation_bound(64, 64, 78, 1.0) == pytest.approx(0.9976413480131837, rel=1e-14)


def test_approx_error_basic():
    A = np.random.default_rng(4).standard_normal((4, 3))
    f = factor_via_svd(A)
    exact = RankKFactor(f.P.T, f.Q.T, f.P.shape[1], 1.0)
    assert approx_error(exact, A) <= 1e-10
    zero = RankKFactor(np.zeros((1, 4)), np.zeros((1, 3)), 1, 1.0)
    assert approx_error(zero, A) == np.abs(A).max()
    with pytest.raises(DimensionError):
        approx_error(zero, np.zeros((3, 3)))
    big = RankKFactor(np.zeros((1, 1 << 14)), np.zeros((1, 1 << 13)), 1, 1.0)
    with pytest.raises(CapacityError):
        big.matrix()


def test_identity_lower_bound_on_gaussian_output():
    n = 32
    f = factor_via_svd(np.eye(n))
    for k in (1, 4, 16):
        for seed in range(5):
            r = gaussian_rank_k(f, k, RandomSource(seed))
            assert approx_error(r, np.eye(n)) >= identity_rank_lb(n, k) - 1e-12
