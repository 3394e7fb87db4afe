"""Command line entry point: ``flcboot run | diagnose-fdb | print-schema``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys

from . import rng as rngmod
from .bootstrap import BootstrapPlan, Variant
from .config import SCHEMA_TEXT, load_config
from .errors import ConfigError, DomainError
from .flctest import Method
from .harness import default_workers, emit_csv, fdb_diagnostics, run_experiment
from .scenarios import generate

DIAGNOSTIC_HEADER = ["setting", "D_label", "n", "m", "error", "dataset", "rep",
                     "F_obs", "Q_minus_F", "p_bt", "p_fdb", "p_db"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flcboot", description="F tests for random effects and their bootstraps.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte Carlo experiment and write a rejection table")
    run.add_argument("--config", required=True)
    run.add_argument("--replicates", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--out")
    run.add_argument("--B", type=int, dest="B", help="override B for every bootstrap method (e.g. 999)")

    diag = sub.add_parser("diagnose-fdb", help="repeat the fast double bootstrap on fixed datasets")
    diag.add_argument("--config", required=True)
    diag.add_argument("--mc-reps", type=int, required=True)
    diag.add_argument("--datasets", type=int, default=1, help="datasets per scenario (default 1)")
    diag.add_argument("--seed", type=int)
    diag.add_argument("--out", help="CSV path (default stdout)")

    sub.add_parser("print-schema", help="print the config file grammar")
    return parser


def _cmd_run(args) -> None:
    config = load_config(args.config)
    if args.replicates is not None:
        config.replicates = args.replicates
    if args.seed is not None:
        config.seed = args.seed
    config.workers = default_workers(args.workers, config.workers)
    if args.out is not None:
        config.output_path = args.out
    if args.B is not None:
        config.methods = [ms if ms.method is Method.FLC else dataclasses.replace(ms, B=args.B)
                          for ms in config.methods]
    config.__post_init__()
    table = run_experiment(config)
    try:
        emit_csv(table, config.output_path)
    except OSError as exc:
        raise OSError(f"cannot write {config.output_path}: {exc.strerror}") from exc
    failed = sum(row.failures for row in table.rows)
    print(f"wrote {len(table.rows)} rows to {config.output_path}"
          + (f" ({failed} failed method calls)" if failed else ""))


def _cmd_diagnose(args) -> None:
    config = load_config(args.config)
    seed = config.seed if args.seed is None else args.seed
    by_method = {ms.method: ms for ms in config.methods}
    B = by_method[Method.FDB].B if Method.FDB in by_method else 199
    db = by_method.get(Method.DB)
    out = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(DIAGNOSTIC_HEADER)
        for s, spec in enumerate(config.scenarios):
            for d in range(args.datasets):
                design = generate(spec, rngmod.stream(seed, s, d, 0)).design
                plan = BootstrapPlan(Variant.FAST_DOUBLE, B=B, seed=rngmod.derive_seed(seed, s, d, 1))
                db_plan = None if db is None else db.plan(rngmod.derive_seed(seed, s, d, 2))
                for rep, row in enumerate(fdb_diagnostics(design, plan, args.mc_reps, db_plan)):
                    writer.writerow([
                        spec.setting.value, spec.D_label(), spec.n_clusters, spec.cluster_size,
                        spec.error.tag.value, d, rep, repr(row.f_obs), repr(row.q_minus_f),
                        repr(row.p_bt), repr(row.p_fdb), "" if row.p_db is None else repr(row.p_db),
                    ])
    finally:
        if out is not sys.stdout:
            out.close()


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "print-schema":
            sys.stdout.write(SCHEMA_TEXT)
        elif args.command == "run":
            _cmd_run(args)
        else:
            _cmd_diagnose(args)
    except (ConfigError, DomainError) as exc:
        print(f"flcboot: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"flcboot: io error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
