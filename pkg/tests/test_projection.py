import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flcboot import DegenerateDesign, DesignMatrices, DimensionMismatch, DomainError, build_projection_pair
from flcboot.projection import column_rank, fitted_null, rss_full, rss_null

from conftest import ols_rss, random_design


def svd_rank(A):
    if A.shape[1] == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > max(A.shape) * np.finfo(float).eps * s[0]))


def test_saturated_design_rejected():
    X = np.ones((4, 1))
    with pytest.raises(DegenerateDesign):
        build_projection_pair(DesignMatrices(np.arange(4.0), X, np.eye(4), r0=2))


def test_ranks_against_svd(rng):
    X = np.ones((6, 1))
    Z = rng.standard_normal((6, 2))
    pair = build_projection_pair(DesignMatrices(rng.standard_normal(6), X, Z, 0))
    assert (pair.rank_null, pair.rank_full) == (svd_rank(X), svd_rank(np.hstack([X, Z])))
    assert (pair.rank_null, pair.rank_full, pair.df_num, pair.df_den) == (1, 3, 2, 3)


def test_duplicated_tested_column_drops_df(rng):
    N = 12
    X = np.column_stack([np.ones(N), rng.standard_normal(N)])
    Z = rng.standard_normal((N, 4))
    y = rng.standard_normal(N)
    base = build_projection_pair(DesignMatrices(y, X, Z, 1))
    Zdup = Z.copy()
    Zdup[:, 3] = Zdup[:, 2]
    dup = build_projection_pair(DesignMatrices(y, X, Zdup, 1))
    assert dup.rank_full == svd_rank(np.hstack([X, Zdup]))
    assert dup.df_num == base.df_num - 1


def test_tested_block_inside_null_span(rng):
    N = 10
    X = np.ones((N, 1))
    Z0 = rng.standard_normal((N, 2))
    Z = np.hstack([Z0, Z0 @ [[1.0], [2.0]]])
    with pytest.raises(DegenerateDesign):
        build_projection_pair(DesignMatrices(rng.standard_normal(N), X, Z, 2))


def test_design_validation():
    with pytest.raises(DimensionMismatch):
        DesignMatrices(np.zeros(5), np.ones((4, 1)), np.ones((5, 2)))
    with pytest.raises(DomainError):
        DesignMatrices(np.zeros(5), np.ones((5, 1)), np.ones((5, 2)), r0=2)
    with pytest.raises(DomainError):
        DesignMatrices(np.array([0, 1, np.nan]), np.ones((3, 1)), np.ones((3, 1)))
    # p = 0 is allowed
    d = DesignMatrices(np.arange(5.0), np.zeros((5, 0)), np.ones((5, 1)))
    assert build_projection_pair(d).rank_null == 0


def test_column_space_vectors_have_zero_rss(rng):
    d = random_design(rng, N=20, p=3, r=4, r0=2)
    pair = build_projection_pair(d)
    v = d.X @ rng.standard_normal(3)
    assert rss_null(pair, v) == 0.0
    assert rss_full(pair, v) == 0.0
    w = d.Z @ rng.standard_normal(4)
    assert rss_full(pair, w) == 0.0


def test_homogeneity(rng):
    d = random_design(rng, N=15, p=2, r=3, r0=1)
    pair = build_projection_pair(d)
    v = rng.standard_normal(15)
    for c in (1e-3, 2.5, 1e3):
        assert rss_null(pair, c * v) == pytest.approx(c * c * rss_null(pair, v), rel=1e-12)
        assert rss_full(pair, c * v) == pytest.approx(c * c * rss_full(pair, v), rel=1e-12)


def test_rss_matches_normal_equations(rng):
    A = rng.standard_normal((10, 3))
    d = DesignMatrices(rng.standard_normal(10), A[:, :1], A[:, 1:], 1)
    pair = build_projection_pair(d)
    v = rng.standard_normal(10)
    coef = np.linalg.solve(A.T @ A, A.T @ v)
    oracle = float(np.sum((v - A @ coef) ** 2))
    assert rss_full(pair, v) == pytest.approx(oracle, rel=1e-9)


def test_rss_dimension_mismatch(rng):
    pair = build_projection_pair(random_design(rng, N=12))
    with pytest.raises(DimensionMismatch):
        rss_null(pair, np.zeros(11))


def test_fitted_null_edge_cases(rng):
    N = 8
    X = np.column_stack([np.ones(N), rng.standard_normal(N)])
    Z = rng.standard_normal((N, 3))
    inside = X @ [0.3, -1.2] + Z[:, 0] * 0.7
    d = DesignMatrices(inside, X, Z, 1)
    pair = build_projection_pair(d)
    assert np.allclose(fitted_null(pair, d), inside, atol=1e-12)
    basis = np.linalg.qr(np.hstack([X, Z[:, :1]]), mode="complete")[0]
    outside = basis[:, 3:] @ rng.standard_normal(N - 3)
    d_out = d.with_response(outside)
    assert np.allclose(fitted_null(pair, d_out), 0.0, atol=1e-12)


def test_fitted_null_matches_pinv(rng):
    N = 8
    X = np.column_stack([np.ones(N), rng.standard_normal(N)])
    Z = rng.standard_normal((N, 4))
    Z[:, 1] = X[:, 1]  # rank-deficient null design
    d = DesignMatrices(rng.standard_normal(N), X, Z, 2)
    pair = build_projection_pair(d)
    A = np.hstack([X, Z[:, :2]])
    oracle = A @ np.linalg.pinv(A) @ d.y
    assert np.allclose(fitted_null(pair, d), oracle, atol=1e-9 * np.linalg.norm(d.y))


def test_matrix_input_matches_columns(rng):
    d = random_design(rng, N=25, p=2, r=5, r0=2)
    pair = build_projection_pair(d)
    V = rng.standard_normal((25, 6))
    batch = pair.rss_full(V)
    assert np.allclose(batch, [pair.rss_full(V[:, j]) for j in range(6)], rtol=1e-12)


def test_rank_tolerance_is_exposed(rng):
    N = 10
    X = np.ones((N, 1))
    Z = rng.standard_normal((N, 3))
    Z[:, 2] = Z[:, 1] + 1e-9 * rng.standard_normal(N)
    d = DesignMatrices(rng.standard_normal(N), X, Z, 1)
    assert build_projection_pair(d).rank_full == 4
    assert build_projection_pair(d, rank_tol=1e-6).rank_full == 3


def test_whiten_identity_is_noop(rng):
    d = random_design(rng, N=12)
    w = d.whiten(np.eye(12))
    assert np.array_equal(w.y, d.y) and np.array_equal(w.Z, d.Z)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_nesting_and_oracle(seed):
    rng = np.random.default_rng(seed)
    d = random_design(rng)
    pair = build_projection_pair(d)
    v = rng.standard_normal(d.N) * 10 ** rng.uniform(-3, 3)
    vv = float(v @ v)
    r0, r1 = rss_null(pair, v), rss_full(pair, v)
    assert r1 <= r0 + 1e-9 * vv
    assert r0 == pytest.approx(ols_rss(d.null_design, v), rel=1e-9, abs=1e-12 * vv)
    assert r1 == pytest.approx(ols_rss(d.full_design, v), rel=1e-9, abs=1e-12 * vv)
    assert pair.rank_full == svd_rank(d.full_design)
    assert pair.rank_null == svd_rank(d.null_design)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_projection_properties(seed):
    rng = np.random.default_rng(seed)
    d = random_design(rng)
    pair = build_projection_pair(d)
    fit = fitted_null(pair, d)
    assert np.allclose(pair.fit_null(fit), fit, rtol=0, atol=1e-9 * np.linalg.norm(fit))
    resid = d.y - fit
    cols = d.null_design
    bound = 1e-8 * np.linalg.norm(d.y) * np.linalg.norm(cols, axis=0)
    assert np.all(np.abs(cols.T @ resid) <= bound)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_adding_column_never_lowers_rank(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((12, int(rng.integers(1, 6))))
    if rng.random() < 0.5:
        A = np.hstack([A, A[:, :1]])
    extra = A[:, :1] * 2 if rng.random() < 0.5 else rng.standard_normal((12, 1))
    assert column_rank(np.hstack([A, extra])) >= column_rank(A)
