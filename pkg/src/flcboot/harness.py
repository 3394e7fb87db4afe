"""Monte Carlo experiment runner and rejection tables.

Replicate ``r`` of scenario ``s`` draws its dataset from stream
``(seed, s, r, 0)`` and runs method ``j`` with a seed derived from
``(seed, s, r, j + 1)``.  Units of work are independent, so the table is the
same for any worker count or scheduling; only timings vary.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import rng as rngmod
from .bootstrap import BootstrapPlan, Variant, choose_m, double_bootstrap, fdb_components, run_plan
from .config import ExperimentConfig, MethodSpec
from .errors import DomainError, FlcError
from .flctest import Method, TestResult, flc_test
from .projection import DesignMatrices, build_projection_pair
from .scenarios import generate

__all__ = [
    "CSV_HEADER",
    "FdbDiagnostic",
    "RejectionRow",
    "RejectionTable",
    "emit_csv",
    "fdb_diagnostics",
    "read_csv",
    "run_experiment",
    "run_method",
]

CSV_HEADER = [
    "setting", "D_label", "n", "m", "error", "method",
    "reject_pct", "mc_halfwidth_pct", "mean_time_s", "replicates", "failures",
]


def run_method(design: DesignMatrices, spec: MethodSpec, seed: int) -> TestResult:
    if spec.method is Method.FLC:
        return flc_test(design)
    m = spec.mn
    if m == "auto":
        m = choose_m(design, build_projection_pair(design))
    return run_plan(design, spec.plan(seed, m))


# --- experiment ----------------------------------------------------------------


def _run_unit(config: ExperimentConfig, s: int, r: int) -> list[tuple[float, float, str | None]]:
    """Generate dataset (s, r) and run every method on it.

    Returns one ``(p_value, seconds, error)`` per method; ``p_value`` is nan
    and ``error`` the exception name when the method failed.
    """
    data = generate(config.scenarios[s], rngmod.stream(config.seed, s, r, 0))
    out = []
    for j, ms in enumerate(config.methods):
        seed = rngmod.derive_seed(config.seed, s, r, j + 1)
        start = time.perf_counter()
        try:
            p = run_method(data.design, ms, seed).p_value
            err = None
        except FlcError as exc:
            p, err = math.nan, type(exc).__name__
        out.append((p, time.perf_counter() - start, err))
    return out


def _run_chunk(config: ExperimentConfig, units: list[tuple[int, int]]):
    return [(s, r, _run_unit(config, s, r)) for s, r in units]


def _chunks(units: list, count: int) -> list[list]:
    size = max(1, math.ceil(len(units) / count))
    return [units[i : i + size] for i in range(0, len(units), size)]


class RowKey(NamedTuple):
    setting: str
    D_label: str
    n: int
    m: int
    error: str
    method: str


@dataclass(frozen=True)
class RejectionRow:
    setting: str
    D_label: str
    n: int
    m: int
    error: str
    method: str
    reject_pct: float
    mc_halfwidth_pct: float
    mean_time_s: float
    replicates: int
    failures: int

    @property
    def key(self) -> RowKey:
        return RowKey(self.setting, self.D_label, self.n, self.m, self.error, self.method)


def _tally(key: RowKey, pvalues: np.ndarray, times: np.ndarray, alpha: float) -> RejectionRow:
    ok = ~np.isnan(pvalues)
    used = int(ok.sum())
    failures = int(pvalues.size - used)
    if used:
        rejections = int(np.count_nonzero(pvalues[ok] < alpha))
        phat = rejections / used
        pct = 100.0 * rejections / used
        half = 196.0 * math.sqrt(phat * (1 - phat) / used)
    else:
        pct = half = math.nan
    mean_time = float(np.mean(times)) if times.size else 0.0
    return RejectionRow(*key, pct, half, mean_time, used, failures)


@dataclass
class RejectionTable:
    """Rows of rejection percentages, plus the raw p-values they were tallied from."""

    rows: list[RejectionRow]
    alpha: float = 0.05
    pvalues: dict = field(default_factory=dict, repr=False)
    times: dict = field(default_factory=dict, repr=False)

    def sorted_rows(self) -> list[RejectionRow]:
        return sorted(self.rows, key=lambda row: row.key)

    def row(self, method, **match) -> RejectionRow:
        hits = [r for r in self.rows if r.method == str(method)
                and all(getattr(r, k) == v for k, v in match.items())]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} rows match method={method} {match}")
        return hits[0]

    def retally(self, alpha: float) -> "RejectionTable":
        """Recount rejections from the stored p-values at another level."""
        rows = [_tally(key, self.pvalues[key], self.times[key], alpha) for key in self.pvalues]
        return RejectionTable(rows, alpha, self.pvalues, self.times)


def run_experiment(config: ExperimentConfig, executor: Executor | None = None) -> RejectionTable:
    """Run every scenario x replicate x method and tally rejections at ``config.alpha``.

    Work is spread over ``config.workers`` processes unless an ``executor``
    is supplied.
    """
    units = [(s, r) for s in range(len(config.scenarios)) for r in range(config.replicates)]
    if executor is not None:
        chunks = _chunks(units, 4 * max(config.workers, 1))
        results = [item for part in executor.map(_run_chunk, [config] * len(chunks), chunks) for item in part]
    elif config.workers > 1:
        chunks = _chunks(units, 4 * config.workers)
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = [item for part in pool.map(_run_chunk, [config] * len(chunks), chunks) for item in part]
    else:
        results = _run_chunk(config, units)

    n_methods = len(config.methods)
    pvals = np.full((len(config.scenarios), config.replicates, n_methods), np.nan)
    times = np.zeros_like(pvals)
    for s, r, per_method in results:
        for j, (p, t, _) in enumerate(per_method):
            pvals[s, r, j] = p
            times[s, r, j] = t

    table = RejectionTable([], config.alpha)
    for s, spec in enumerate(config.scenarios):
        for j, ms in enumerate(config.methods):
            key = RowKey(spec.setting.value, spec.D_label(), spec.n_clusters, spec.cluster_size,
                         spec.error.tag.value, ms.method.value)
            table.pvalues[key] = pvals[s, :, j]
            table.times[key] = times[s, :, j]
            table.rows.append(_tally(key, pvals[s, :, j], times[s, :, j], config.alpha))
    return table


# --- CSV ------------------------------------------------------------------------


def _format_row(row: RejectionRow) -> list[str]:
    return [
        row.setting, row.D_label, str(row.n), str(row.m), row.error, row.method,
        f"{row.reject_pct:.1f}", f"{row.mc_halfwidth_pct:.2f}", f"{row.mean_time_s:.2f}",
        str(row.replicates), str(row.failures),
    ]


def emit_csv(table: RejectionTable, path) -> None:
    """Write the table as UTF-8 CSV, rows sorted by key; byte-identical for equal tables."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in table.sorted_rows():
            writer.writerow(_format_row(row))


def read_csv(path) -> list[RejectionRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        return [
            RejectionRow(
                rec["setting"], rec["D_label"], int(rec["n"]), int(rec["m"]), rec["error"], rec["method"],
                float(rec["reject_pct"]), float(rec["mc_halfwidth_pct"]), float(rec["mean_time_s"]),
                int(rec["replicates"]), int(rec["failures"]),
            )
            for rec in reader
        ]


# --- fast double bootstrap diagnostics --------------------------------------------


class FdbDiagnostic(NamedTuple):
    f_obs: float
    q_minus_f: float
    p_bt: float
    p_fdb: float
    p_db: float | None = None


def fdb_diagnostics(design: DesignMatrices, plan: BootstrapPlan, mc_reps: int,
                    db_plan: BootstrapPlan | None = None) -> list[FdbDiagnostic]:
    """Repeat the fast double bootstrap ``mc_reps`` times on one dataset.

    Each run uses the stream derived from ``(plan.seed, rep)`` and reports
    F_obs, Q**_B - F_obs, the first-level p-value and the FDB p-value.  With
    ``db_plan`` one full double bootstrap is run and its p-value attached to
    every tuple.
    """
    if mc_reps < 1:
        raise DomainError(f"mc_reps must be >= 1, got {mc_reps}")
    if plan.variant is not Variant.FAST_DOUBLE:
        raise DomainError(f"diagnostics need a FAST_DOUBLE plan, got {plan.variant.value}")
    p_db = None if db_plan is None else double_bootstrap(design, db_plan).p_value
    out = []
    for rep in range(mc_reps):
        run = BootstrapPlan(Variant.FAST_DOUBLE, B=plan.B, seed=rngmod.derive_seed(plan.seed, rep))
        _, f_obs, p_star, q, p_fdb, _ = fdb_components(design, run)
        out.append(FdbDiagnostic(f_obs, q - f_obs, p_star, p_fdb, p_db))
    return out


def default_workers(flag: int | None, config_value: int) -> int:
    """Worker count: the flag if given, else FLCBOOT_WORKERS, else the config value."""
    if flag is not None:
        return flag
    env = os.environ.get("FLCBOOT_WORKERS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise DomainError(f"FLCBOOT_WORKERS must be an integer, got {env!r}") from None
    return config_value
