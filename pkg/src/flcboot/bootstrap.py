"""Residual bootstrap counterparts of the FLC test.

Five procedures share one kernel: draw response vectors under the null,
then recompute the F statistic on them with the factorizations of the
original (X, Z), which resampling leaves untouched.

* null-imposed residual bootstrap (``NULL_RESIDUAL``)
* residual bootstrap with full-fit residuals (``NONNULL_RESIDUAL``)
* m-out-of-n residual bootstrap (``M_OUT_OF_N``)
* full double bootstrap (``DOUBLE``)
* fast double bootstrap (``FAST_DOUBLE``)

Resamples are drawn as columns of an (N, B) matrix and evaluated together.
All p-values use strict exceedance, so ties never count against the null.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .errors import DomainError
from .flctest import Method, TestResult, statistics_from_pair
from .projection import DesignMatrices, ProjectionPair, build_projection_pair

__all__ = [
    "BootstrapPlan",
    "Variant",
    "bootstrap_p",
    "bootstrap_statistics",
    "choose_m",
    "double_bootstrap",
    "double_pvalue",
    "exceedance_p",
    "expected_evaluations",
    "fast_double_bootstrap",
    "fdb_components",
    "fdb_pvalue",
    "fdb_quantile",
    "resample_m_out_of_n",
    "resample_nonnull",
    "resample_null",
    "run_plan",
]


class Variant(str, enum.Enum):
    NULL_RESIDUAL = "NULL_RESIDUAL"
    NONNULL_RESIDUAL = "NONNULL_RESIDUAL"
    M_OUT_OF_N = "M_OUT_OF_N"
    DOUBLE = "DOUBLE"
    FAST_DOUBLE = "FAST_DOUBLE"


_METHOD_OF = {
    Variant.NULL_RESIDUAL: Method.BT,
    Variant.NONNULL_RESIDUAL: Method.BT_NONNULL,
    Variant.M_OUT_OF_N: Method.BT_MN,
    Variant.FAST_DOUBLE: Method.FDB,
    Variant.DOUBLE: Method.DB,
}


@dataclass(frozen=True)
class BootstrapPlan:
    """How to bootstrap one test.

    ``B`` is the first-level sample count (B1 for the double bootstrap),
    ``B2`` the second-level count used only by ``DOUBLE``, and ``m`` the
    subsample size used only by ``M_OUT_OF_N``.
    """

    variant: Variant
    B: int = 199
    B2: int = 1
    m: int | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.B < 1:
            raise DomainError(f"B must be >= 1, got {self.B}")
        if self.variant is Variant.DOUBLE and self.B2 < 1:
            raise DomainError(f"B2 must be >= 1, got {self.B2}")
        if self.variant is Variant.M_OUT_OF_N and (self.m is None or self.m < 1):
            raise DomainError(f"m-out-of-n needs m >= 1, got {self.m}")

    @property
    def method(self) -> Method:
        return _METHOD_OF[self.variant]


def expected_evaluations(variant: Variant, B: int, B2: int = 1) -> int:
    """Statistic evaluations a plan costs, the observed statistic included."""
    variant = Variant(variant)
    if variant is Variant.DOUBLE:
        return 1 + B + B * B2
    if variant is Variant.FAST_DOUBLE:
        return 1 + 2 * B
    return 1 + B


# --- resampling ------------------------------------------------------------------


def _draw(residuals: np.ndarray, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Resample entries with replacement.

    A 1-D ``residuals`` gives one vector (``size=None``) or ``size`` columns;
    a 2-D ``residuals`` is resampled column by column, each from itself.
    """
    N = residuals.shape[0]
    if residuals.ndim == 2:
        idx = rng.integers(0, N, size=residuals.shape)
        return np.take_along_axis(residuals, idx, axis=0)
    if size is None:
        return residuals[rng.integers(0, N, size=N)]
    return residuals[rng.integers(0, N, size=(N, size))]


def _check_m(m: int, N: int) -> None:
    if not 1 <= m <= N:
        raise DomainError(f"m={m} outside [1, N={N}]")


def _null_parts(design: DesignMatrices, pair: ProjectionPair) -> tuple[np.ndarray, np.ndarray]:
    fitted = pair.fit_null(design.y)
    return fitted, design.y - fitted


def resample_null(design: DesignMatrices, pair: ProjectionPair, rng: np.random.Generator) -> np.ndarray:
    """One null-imposed response: null fitted values plus resampled null-fit residuals."""
    fitted, resid = _null_parts(design, pair)
    return fitted + _draw(resid, rng)


def resample_nonnull(design: DesignMatrices, pair: ProjectionPair, rng: np.random.Generator) -> np.ndarray:
    """Null fitted values plus residuals resampled from the full (X, Z) fit."""
    fitted = pair.fit_null(design.y)
    return fitted + _draw(pair.residual_full(design.y), rng)


def resample_m_out_of_n(design: DesignMatrices, pair: ProjectionPair, m: int, rng: np.random.Generator) -> np.ndarray:
    """Like ``resample_null`` with every resampled residual inflated by sqrt(N/m)."""
    _check_m(m, design.N)
    fitted, resid = _null_parts(design, pair)
    return fitted + np.sqrt(design.N / m) * _draw(resid, rng)


def choose_m(design: DesignMatrices, pair: ProjectionPair) -> int:
    """Pick m from m/N = var(full-fit residuals) / var(null-fit residuals)."""
    N = design.N
    var_alt = np.var(pair.residual_full(design.y))
    var_null = np.var(pair.residual_null(design.y))
    if var_null == 0.0:
        return N
    return int(min(max(round(N * var_alt / var_null), 1), N))


def _resample_block(design: DesignMatrices, pair: ProjectionPair, variant: Variant, B: int,
                    rng: np.random.Generator, m: int | None = None) -> np.ndarray:
    fitted = pair.fit_null(design.y)
    if variant is Variant.NONNULL_RESIDUAL:
        resid = pair.residual_full(design.y)
    else:
        resid = design.y - fitted
    eps = _draw(resid, rng, size=B)
    if variant is Variant.M_OUT_OF_N:
        _check_m(m, design.N)
        eps *= np.sqrt(design.N / m)
    return fitted[:, None] + eps


def bootstrap_statistics(design: DesignMatrices, pair: ProjectionPair, variant: Variant, B: int,
                         rng: np.random.Generator, m: int | None = None) -> np.ndarray:
    """First-level bootstrap statistics F*_1..F*_B."""
    Ystar = _resample_block(design, pair, Variant(variant), B, rng, m)
    return np.atleast_1d(statistics_from_pair(pair, Ystar))


def exceedance_p(f_star, f_obs: float) -> float:
    """``#(F* > F_obs) / B``."""
    f_star = np.asarray(f_star)
    return np.count_nonzero(f_star > f_obs) / f_star.size


def fdb_quantile(f_second, exceed_count: int) -> float:
    """The 1 - p* empirical quantile of the second-level statistics.

    With p* = c / B this is the order statistic F**_(B - c) of the ascending
    sort, the index clamped to [1, B].
    """
    f_second = np.sort(np.asarray(f_second))
    B = f_second.size
    k = min(max(B - int(exceed_count), 1), B)
    return float(f_second[k - 1])


# --- procedures ------------------------------------------------------------------


def _observed(design: DesignMatrices) -> tuple[ProjectionPair, float]:
    pair = build_projection_pair(design)
    return pair, float(statistics_from_pair(pair, design.y))


def bootstrap_p(design: DesignMatrices, plan: BootstrapPlan) -> TestResult:
    """Single-level residual bootstrap p-value ``#(F* > F_obs) / B``."""
    if plan.variant not in (Variant.NULL_RESIDUAL, Variant.NONNULL_RESIDUAL, Variant.M_OUT_OF_N):
        raise DomainError(f"bootstrap_p does not run variant {plan.variant.value}")
    pair, f_obs = _observed(design)
    rng = rngmod.stream(plan.seed)
    f_star = bootstrap_statistics(design, pair, plan.variant, plan.B, rng, plan.m)
    return TestResult(f_obs, pair.df_num, pair.df_den, exceedance_p(f_star, f_obs),
                      plan.method, 1 + f_star.size)


def fdb_pvalue(f_obs: float, f_star, f_second) -> tuple[float, float, float]:
    """Combine first- and second-level statistics into ``(p*, Q**_B, p**_F)``."""
    f_star = np.asarray(f_star)
    B = f_star.size
    exceed = int(np.count_nonzero(f_star > f_obs))
    q = fdb_quantile(f_second, exceed)
    return exceed / B, q, np.count_nonzero(f_star > q) / B


def double_pvalue(f_obs: float, f_star, f_second) -> tuple[float, float]:
    """Combine ``f_star`` (B1,) and ``f_second`` (B1, B2) into ``(p*, p**)``.

    Row k of ``f_second`` holds the second-level statistics drawn from
    first-level sample k.
    """
    f_star = np.asarray(f_star)
    f_second = np.asarray(f_second)
    B1, B2 = f_second.shape
    exceed = int(np.count_nonzero(f_star > f_obs))
    exceed_k = np.count_nonzero(f_second > f_star[:, None], axis=1)
    # p**_k < p*  <=>  exceed_k / B2 < exceed / B1, compared in integers
    below = int(np.count_nonzero(exceed_k * B1 < exceed * B2))
    return exceed / B1, below / B1


def fdb_components(design: DesignMatrices, plan: BootstrapPlan):
    """Run the fast double bootstrap and return every intermediate.

    ``(pair, F_obs, p*, Q**_B, p**_F, evaluations)``
    """
    pair, f_obs = _observed(design)
    rng = rngmod.stream(plan.seed)
    Ystar = _resample_block(design, pair, Variant.NULL_RESIDUAL, plan.B, rng)
    f_star = np.atleast_1d(statistics_from_pair(pair, Ystar))
    # one second-level draw per first-level sample, from that sample's own null fit
    fitted_star = pair.fit_null(Ystar)
    Y2 = fitted_star + _draw(Ystar - fitted_star, rng)
    f_second = np.atleast_1d(statistics_from_pair(pair, Y2))
    p_star, q, p_fdb = fdb_pvalue(f_obs, f_star, f_second)
    evaluations = 1 + f_star.size + f_second.size
    return pair, f_obs, p_star, q, p_fdb, evaluations


def fast_double_bootstrap(design: DesignMatrices, plan: BootstrapPlan) -> TestResult:
    """Fast double bootstrap p-value from 1 + 2B statistic evaluations.

    ``TestResult.quantile`` carries the second-level critical value Q**_B.
    """
    if plan.variant is not Variant.FAST_DOUBLE:
        raise DomainError(f"fast_double_bootstrap needs FAST_DOUBLE, got {plan.variant.value}")
    pair, f_obs, _, q, p_fdb, evaluations = fdb_components(design, plan)
    return TestResult(f_obs, pair.df_num, pair.df_den, p_fdb, Method.FDB, evaluations, quantile=q)


def double_bootstrap(design: DesignMatrices, plan: BootstrapPlan) -> TestResult:
    """Full double bootstrap: the share of second-level p-values strictly below p*."""
    if plan.variant is not Variant.DOUBLE:
        raise DomainError(f"double_bootstrap needs DOUBLE, got {plan.variant.value}")
    pair, f_obs = _observed(design)
    rng = rngmod.stream(plan.seed)
    B1, B2 = plan.B, plan.B2
    Ystar = _resample_block(design, pair, Variant.NULL_RESIDUAL, B1, rng)
    f_star = np.atleast_1d(statistics_from_pair(pair, Ystar))
    evaluations = 1 + f_star.size
    fitted_star = pair.fit_null(Ystar)
    resid_star = Ystar - fitted_star
    f_second = np.empty((B1, B2))
    for k in range(B1):
        Y2 = fitted_star[:, k, None] + _draw(resid_star[:, k], rng, size=B2)
        f_second[k] = statistics_from_pair(pair, Y2)
        evaluations += B2
    _, p_db = double_pvalue(f_obs, f_star, f_second)
    return TestResult(f_obs, pair.df_num, pair.df_den, p_db, Method.DB, evaluations)


def run_plan(design: DesignMatrices, plan: BootstrapPlan) -> TestResult:
    if plan.variant is Variant.FAST_DOUBLE:
        return fast_double_bootstrap(design, plan)
    if plan.variant is Variant.DOUBLE:
        return double_bootstrap(design, plan)
    return bootstrap_p(design, plan)
