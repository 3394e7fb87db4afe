"""The exact F test of a subset of random effects and its F reference distribution."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SaturatedFit
from .projection import DesignMatrices, ProjectionPair, build_projection_pair

__all__ = [
    "Method",
    "TestResult",
    "betainc_regularized",
    "f_cdf",
    "f_sf",
    "flc_statistic",
    "flc_test",
    "statistics_from_pair",
]


class Method(str, enum.Enum):
    FLC = "FLC"
    BT = "BT"
    BT_NONNULL = "BT_NONNULL"
    BT_MN = "BT_MN"
    FDB = "FDB"
    DB = "DB"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class TestResult:
    """Outcome of one test.

    ``evaluations`` counts statistic computations, the observed one included.
    ``quantile`` is only set by the fast double bootstrap, where it holds the
    second-level critical value used to correct the p-value.
    """

    __test__ = False  # not a pytest class

    statistic: float
    df_num: int
    df_den: int
    p_value: float
    method: Method
    evaluations: int
    quantile: float | None = None


# --- regularized incomplete beta ------------------------------------------------

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAXITER = 100_000


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Modified Lentz evaluation of the continued fraction for I_x(a, b)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def _log_front(a: float, b: float, x: float, y: float) -> float:
    # log of x^a y^b / (a B(a, b)), y = 1 - x supplied separately to keep precision
    return (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log(y) - math.log(a)
    )


def _betainc_pair(a: float, b: float, x: float, y: float) -> tuple[float, float]:
    """Return (I_x(a, b), 1 - I_x(a, b)) with y = 1 - x given exactly by the caller."""
    if x <= 0.0:
        return 0.0, 1.0
    if y <= 0.0:
        return 1.0, 0.0
    if x < (a + 1.0) / (a + b + 2.0):
        lower = math.exp(_log_front(a, b, x, y)) * _beta_continued_fraction(a, b, x)
        return lower, 1.0 - lower
    upper = math.exp(_log_front(b, a, y, x)) * _beta_continued_fraction(b, a, y)
    return 1.0 - upper, upper


def betainc_regularized(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise DomainError("shape parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x={x} outside [0, 1]")
    return _betainc_pair(float(a), float(b), float(x), 1.0 - float(x))[0]


def _check_f_args(x, df_num, df_den):
    if df_num <= 0 or df_den <= 0:
        raise DomainError(f"degrees of freedom must be positive, got ({df_num}, {df_den})")
    if not x >= 0:  # also rejects nan
        raise DomainError(f"F quantile must be nonnegative, got {x}")


def _f_tails(x: float, df_num: float, df_den: float) -> tuple[float, float]:
    if math.isinf(x):
        return 1.0, 0.0
    u = df_num * x
    denom = u + df_den
    return _betainc_pair(df_num / 2.0, df_den / 2.0, u / denom, df_den / denom)


def f_cdf(x: float, df_num: float, df_den: float) -> float:
    """Central F distribution function, through I_{d1 x / (d1 x + d2)}(d1/2, d2/2)."""
    _check_f_args(x, df_num, df_den)
    return _f_tails(float(x), float(df_num), float(df_den))[0]


def f_sf(x: float, df_num: float, df_den: float) -> float:
    """Upper tail ``1 - f_cdf``, evaluated directly so small p-values keep full precision."""
    _check_f_args(x, df_num, df_den)
    return _f_tails(float(x), float(df_num), float(df_den))[1]


# --- the statistic ------------------------------------------------------------


def statistics_from_pair(pair: ProjectionPair, Y) -> np.ndarray | float:
    """F statistic for every column of ``Y`` (or for a single vector).

    Raises SaturatedFit if any column is reproduced exactly by the full design.
    """
    rss0, rss1 = pair.rss_both(Y)
    if np.ndim(rss1) == 0:
        if rss1 == 0.0:
            raise SaturatedFit("full design reproduces the response: residual sum of squares is zero")
        return (max(rss0 - rss1, 0.0) / pair.df_num) / (rss1 / pair.df_den)
    if np.any(rss1 == 0.0):
        raise SaturatedFit("full design reproduces the response: residual sum of squares is zero")
    numerator = np.maximum(rss0 - rss1, 0.0) / pair.df_num
    return numerator / (rss1 / pair.df_den)


def flc_statistic(design: DesignMatrices, pair: ProjectionPair | None = None) -> tuple[float, int, int]:
    """Return ``(F, df_num, df_den)`` for the design's response."""
    if pair is None:
        pair = build_projection_pair(design)
    return float(statistics_from_pair(pair, design.y)), pair.df_num, pair.df_den


def flc_test(design: DesignMatrices, pair: ProjectionPair | None = None) -> TestResult:
    stat, d1, d2 = flc_statistic(design, pair)
    return TestResult(stat, d1, d2, f_sf(stat, d1, d2), Method.FLC, 1)
