"""Random variates for the simulation designs.

Error generators are standardized analytically to mean 0 and variance 1
before scaling by ``sigma``.  All functions take an explicit
``numpy.random.Generator`` and draw only from it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotPSD

__all__ = [
    "ErrorDistribution",
    "ErrorTag",
    "MIXTURE_CORE_VAR",
    "draw_error_vector",
    "draw_mvnormal",
    "draw_wishart",
    "pivoted_cholesky",
]

MIXTURE_CONTAMINATION = 0.2
MIXTURE_RATIO = 9.0
# core variance that gives the 80/20 mixture unit variance
MIXTURE_CORE_VAR = 1.0 / ((1 - MIXTURE_CONTAMINATION) + MIXTURE_CONTAMINATION * MIXTURE_RATIO)


class ErrorTag(str, enum.Enum):
    NORMAL = "normal"
    STUDENT_T3 = "student"
    CHISQ3_CENTERED = "chisq"
    TWO_COMP_MIXTURE = "2CMM"

    @classmethod
    def parse(cls, value) -> "ErrorTag":
        if isinstance(value, cls):
            return value
        text = str(value).strip()
        for tag in cls:
            if text.lower() in (tag.value.lower(), tag.name.lower()):
                return tag
        raise DomainError(f"unknown error distribution {value!r}")


@dataclass(frozen=True)
class ErrorDistribution:
    tag: ErrorTag = ErrorTag.NORMAL
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "tag", ErrorTag.parse(self.tag))
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")


def _standard_t3(N: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(N)
    chi = np.sum(rng.standard_normal((3, N)) ** 2, axis=0)
    # t_3 has variance 3
    return z / np.sqrt(chi / 3.0) / math.sqrt(3.0)


def _standard_chisq3(N: int, rng: np.random.Generator) -> np.ndarray:
    chi = np.sum(rng.standard_normal((3, N)) ** 2, axis=0)
    return (chi - 3.0) / math.sqrt(6.0)


def _standard_mixture(N: int, rng: np.random.Generator) -> np.ndarray:
    contaminated = rng.random(N) < MIXTURE_CONTAMINATION
    sd = np.where(contaminated, math.sqrt(MIXTURE_RATIO * MIXTURE_CORE_VAR), math.sqrt(MIXTURE_CORE_VAR))
    return sd * rng.standard_normal(N)


_GENERATORS = {
    ErrorTag.NORMAL: lambda N, rng: rng.standard_normal(N),
    ErrorTag.STUDENT_T3: _standard_t3,
    ErrorTag.CHISQ3_CENTERED: _standard_chisq3,
    ErrorTag.TWO_COMP_MIXTURE: _standard_mixture,
}


def draw_error_vector(dist: ErrorDistribution, N: int, rng: np.random.Generator) -> np.ndarray:
    """N iid errors with mean 0 and variance ``dist.sigma ** 2``."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    return dist.sigma * _GENERATORS[dist.tag](N, rng)


def pivoted_cholesky(D, tol: float | None = None) -> np.ndarray:
    """Factor a symmetric PSD matrix as ``D = L @ L.T``.

    Diagonal pivoting picks the largest remaining pivot at each step; once it
    falls below ``tol`` the trailing block is treated as zero, so singular D
    is handled.  The returned factor already includes the permutation.
    """
    A = np.array(D, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError("covariance must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max(initial=0.0))):
        raise DomainError("covariance must be symmetric")
    k = A.shape[0]
    scale = max(np.abs(np.diag(A)).max(initial=0.0), np.finfo(float).tiny)
    if tol is None:
        tol = k * np.finfo(float).eps * scale * 16
    perm = np.arange(k)
    L = np.zeros((k, k))
    for j in range(k):
        i = j + int(np.argmax(np.diag(A)[j:]))
        pivot = A[i, i]
        if pivot < -tol:
            raise NotPSD(f"pivot {pivot:.3g} below -{tol:.3g}")
        if pivot <= tol:
            if np.any(np.diag(A)[j:] < -tol):
                raise NotPSD("negative trailing pivot")
            break
        if i != j:
            A[[j, i]] = A[[i, j]]
            A[:, [j, i]] = A[:, [i, j]]
            L[[j, i]] = L[[i, j]]
            perm[[j, i]] = perm[[i, j]]
        L[j, j] = math.sqrt(pivot)
        L[j + 1 :, j] = A[j + 1 :, j] / L[j, j]
        A[j + 1 :, j + 1 :] -= np.outer(L[j + 1 :, j], L[j + 1 :, j])
    out = np.zeros((k, k))
    out[perm] = L
    return out


def draw_mvnormal(D, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` rows iid N(0, D); D may be singular (even zero)."""
    L = pivoted_cholesky(D)
    z = rng.standard_normal((count, L.shape[0]))
    return z @ L.T


def draw_wishart(df: int, scale, rng: np.random.Generator) -> np.ndarray:
    """One Wishart(df, scale) draw via the Bartlett decomposition."""
    S = np.atleast_2d(np.asarray(scale, dtype=float))
    k = S.shape[0]
    if df < k:
        raise DomainError(f"Wishart needs df >= dimension, got df={df}, k={k}")
    C = np.linalg.cholesky(S)
    A = np.zeros((k, k))
    for i in range(k):
        A[i, i] = math.sqrt(rng.chisquare(df - i))
        A[i, :i] = rng.standard_normal(i)
    CA = C @ A
    W = CA @ CA.T
    return (W + W.T) / 2.0
