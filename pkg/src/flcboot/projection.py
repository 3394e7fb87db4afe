"""Rank-revealing least-squares kernels for the nested designs (X, Z0) and (X, Z).

The annihilators ``I - P`` are never formed.  Each design is reduced once by a
column-pivoted QR; the leading ``rank`` columns of Q are an orthonormal basis
of the column space and every residual norm ``||(I - P) v||^2`` is evaluated
from that basis in O(N * rank).  All kernels accept a single vector of length
N or an (N, B) matrix whose columns are treated independently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .errors import DegenerateDesign, DimensionMismatch, DomainError

__all__ = [
    "DesignMatrices",
    "ProjectionPair",
    "build_projection_pair",
    "column_rank",
    "fitted_null",
    "rss_full",
    "rss_null",
]

# residual norms below this multiple of N * eps * ||v|| are reported as exactly 0
_ZERO_FACTOR = 64.0
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class DesignMatrices:
    """Response and design for one hypothesis test.

    ``Z`` is ordered so that its first ``r0`` columns are the untested random
    effect columns (Z0) and the remaining ``r - r0`` columns are tested.
    """

    y: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    r0: int = 0

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        Z = np.asarray(self.Z, dtype=float)
        if y.ndim != 1 or y.size == 0:
            raise DomainError("y must be a non-empty vector")
        N = y.size
        if X.ndim == 1 and X.size == 0:
            X = np.zeros((N, 0))
        if X.ndim != 2 or Z.ndim != 2:
            raise DomainError("X and Z must be matrices")
        if X.shape[0] != N or Z.shape[0] != N:
            raise DimensionMismatch(f"row counts differ: y has {N}, X has {X.shape[0]}, Z has {Z.shape[0]}")
        if Z.shape[1] < 1:
            raise DomainError("Z needs at least one column")
        if not 0 <= self.r0 < Z.shape[1]:
            raise DomainError(f"r0={self.r0} must satisfy 0 <= r0 < r={Z.shape[1]}")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X)) and np.all(np.isfinite(Z))):
            raise DomainError("design entries must be finite")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "r0", int(self.r0))

    @property
    def N(self) -> int:
        return self.y.size

    @property
    def Z0(self) -> np.ndarray:
        return self.Z[:, : self.r0]

    @property
    def Z_tested(self) -> np.ndarray:
        return self.Z[:, self.r0 :]

    @property
    def null_design(self) -> np.ndarray:
        return np.hstack([self.X, self.Z0])

    @property
    def full_design(self) -> np.ndarray:
        return np.hstack([self.X, self.Z])

    def with_response(self, y) -> "DesignMatrices":
        return DesignMatrices(y, self.X, self.Z, self.r0)

    def whiten(self, W) -> "DesignMatrices":
        """Apply a pre-whitening transform ``W`` (with ``W Omega W^T = I``) to y, X and Z."""
        W = np.asarray(W, dtype=float)
        return DesignMatrices(W @ self.y, W @ self.X, W @ self.Z, self.r0)


def _orthonormal_basis(A: np.ndarray, rank_tol: float | None) -> np.ndarray:
    """Leading ``rank`` columns of Q from a column-pivoted QR (LAPACK geqp3)."""
    N, cols = A.shape
    if cols == 0:
        return np.zeros((N, 0))
    qr, _, tau, _, info = lapack.dgeqp3(A)
    if info != 0:
        raise np.linalg.LinAlgError(f"dgeqp3 failed with info={info}")
    k = min(N, cols)
    diag = np.abs(np.diag(qr)[:k])
    if diag[0] == 0.0:
        return np.zeros((N, 0))
    tol = max(N, cols) * _EPS if rank_tol is None else rank_tol
    rank = int(np.count_nonzero(diag > tol * diag[0]))
    q, _, info = lapack.dorgqr(qr[:, :k], tau)
    if info != 0:
        raise np.linalg.LinAlgError(f"dorgqr failed with info={info}")
    return np.ascontiguousarray(q[:, :rank])


def column_rank(A, rank_tol: float | None = None) -> int:
    """Numerical rank from the pivoted QR diagonal, with the same rule the pair uses."""
    A = np.asarray(A, dtype=float)
    return _orthonormal_basis(A, rank_tol).shape[1]


def _residual(Q: np.ndarray, V: np.ndarray) -> np.ndarray:
    if Q.shape[1] == 0:
        return V.copy()
    return V - Q @ (Q.T @ V)


def _squared_norms(V: np.ndarray, R: np.ndarray) -> np.ndarray | float:
    if V.ndim == 1:
        rss = float(R @ R)
        floor = (_ZERO_FACTOR * V.shape[0] * _EPS) ** 2 * float(V @ V)
        return 0.0 if rss <= floor else rss
    rss = np.einsum("ij,ij->j", R, R)
    floor = (_ZERO_FACTOR * V.shape[0] * _EPS) ** 2 * np.einsum("ij,ij->j", V, V)
    rss[rss <= floor] = 0.0
    return rss


@dataclass(frozen=True)
class ProjectionPair:
    """Orthonormal bases for span(X, Z0) and span(X, Z) plus the F degrees of freedom."""

    N: int
    rank_null: int
    rank_full: int
    basis_null: np.ndarray = field(repr=False)
    basis_full: np.ndarray = field(repr=False)

    @property
    def df_num(self) -> int:
        return self.rank_full - self.rank_null

    @property
    def df_den(self) -> int:
        return self.N - self.rank_full

    def _check(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.N or v.ndim > 2:
            raise DimensionMismatch(f"expected leading dimension {self.N}, got shape {v.shape}")
        return v

    def residual_null(self, v) -> np.ndarray:
        return _residual(self.basis_null, self._check(v))

    def residual_full(self, v) -> np.ndarray:
        return _residual(self.basis_full, self._check(v))

    def rss_null(self, v):
        v = self._check(v)
        return _squared_norms(v, _residual(self.basis_null, v))

    def rss_full(self, v):
        v = self._check(v)
        return _squared_norms(v, _residual(self.basis_full, v))

    def rss_both(self, v):
        """``(rss_null(v), rss_full(v))`` with a single input check."""
        v = self._check(v)
        return (_squared_norms(v, _residual(self.basis_null, v)),
                _squared_norms(v, _residual(self.basis_full, v)))

    def fit_null(self, v) -> np.ndarray:
        """Least-squares projection of ``v`` (vector or columns) onto span(X, Z0)."""
        v = self._check(v)
        if self.rank_null == 0:
            return np.zeros_like(v)
        return self.basis_null @ (self.basis_null.T @ v)

    def fit_full(self, v) -> np.ndarray:
        v = self._check(v)
        return self.basis_full @ (self.basis_full.T @ v)


def build_projection_pair(design: DesignMatrices, rank_tol: float | None = None) -> ProjectionPair:
    """Factor the null and full designs.

    A diagonal entry of the pivoted R counts toward the rank when
    ``|R_ii| > rank_tol * max_j |R_jj|``; the default ``rank_tol`` is
    ``max(N, cols) * eps``.

    Raises DegenerateDesign when the tested columns add no rank or the full
    design is saturated.
    """
    Q0 = _orthonormal_basis(design.null_design, rank_tol)
    Q1 = _orthonormal_basis(design.full_design, rank_tol)
    pair = ProjectionPair(design.N, Q0.shape[1], Q1.shape[1], Q0, Q1)
    if pair.df_num < 1:
        raise DegenerateDesign(
            f"tested columns add no rank: rk(X,Z)={pair.rank_full}, rk(X,Z0)={pair.rank_null}"
        )
    if pair.df_den < 1:
        raise DegenerateDesign(f"saturated design: rk(X,Z)={pair.rank_full} equals N={pair.N}")
    return pair


def rss_null(pair: ProjectionPair, v):
    """``||(I - P_{X,Z0}) v||^2``."""
    return pair.rss_null(v)


def rss_full(pair: ProjectionPair, v):
    """``||(I - P_{X,Z}) v||^2``."""
    return pair.rss_full(v)


def fitted_null(pair: ProjectionPair, design: DesignMatrices) -> np.ndarray:
    """Null fitted values ``P_{X,Z0} y``, i.e. X beta_hat + Z0 b0_hat from joint least squares."""
    return pair.fit_null(design.y)
