"""Run one or more experiment configs and print each table with methods side by side.

    python scripts/run_tables.py configs/setting1_student.toml --replicates 200 --workers 4
"""

import argparse
import collections

from flcboot.config import load_config
from flcboot.harness import default_workers, emit_csv, run_experiment


def pivot(table):
    cells = collections.OrderedDict()
    methods = []
    for row in table.sorted_rows():
        key = (row.setting, row.D_label, row.n, row.m, row.error)
        cells.setdefault(key, {})[row.method] = row
        if row.method not in methods:
            methods.append(row.method)
    return cells, methods


def show(table):
    cells, methods = pivot(table)
    print(f"{'setting':8}{'D':>24}{'n':>5}{'m':>5}{'error':>9}" + "".join(f"{m:>16}" for m in methods))
    for (setting, label, n, m, error), by_method in cells.items():
        line = f"{setting:8}{label:>24}{n:>5}{m:>5}{error:>9}"
        for method in methods:
            row = by_method[method]
            line += f"{row.reject_pct:>8.1f} ({row.mean_time_s * 1e3:5.1f}ms)"
        print(line)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("configs", nargs="+")
    parser.add_argument("--replicates", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--csv-dir", help="also write each table as CSV into this directory")
    args = parser.parse_args()
    for path in args.configs:
        config = load_config(path)
        if args.replicates:
            config.replicates = args.replicates
        if args.seed is not None:
            config.seed = args.seed
        config.workers = default_workers(args.workers, config.workers)
        print(f"# {path}: {config.replicates} replicates, seed {config.seed}")
        table = run_experiment(config)
        show(table)
        if args.csv_dir:
            emit_csv(table, f"{args.csv_dir}/{config.output_path}")
        print()


if __name__ == "__main__":
    main()
