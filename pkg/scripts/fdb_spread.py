"""Spread of Q**_B - F_obs for the fast double bootstrap, Setting 2 with t3 errors.

For each n, the same 10 dataset streams are used, and on each dataset the
FDB is repeated with independent streams.  Prints the per-dataset
interquartile range of Q**_B - F_obs and optionally writes the raw tuples.

    python scripts/fdb_spread.py --mc-reps 10 --B 199 --out fdb.csv
"""

import argparse
import csv

import numpy as np

from flcboot import BootstrapPlan, ErrorDistribution, ScenarioSpec, Variant, generate
from flcboot.harness import fdb_diagnostics
from flcboot.rng import derive_seed, stream

BLOCKS = {"null": [[0.0, 0.0], [0.0, 0.0]], "alt": [[0.2, 0.1], [0.1, 0.2]]}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[7, 25])
    parser.add_argument("--datasets", type=int, default=10)
    parser.add_argument("--mc-reps", type=int, default=10)
    parser.add_argument("--B", type=int, default=199)
    parser.add_argument("--seed", type=int, default=20240101)
    parser.add_argument("--out")
    args = parser.parse_args()

    rows = []
    for name, block in BLOCKS.items():
        iqr = {}
        for n in args.sizes:
            spec = ScenarioSpec("S2", n, 10, D=block, error=ErrorDistribution("student"))
            spreads = []
            for d in range(args.datasets):
                design = generate(spec, stream(args.seed, 10, d)).design
                plan = BootstrapPlan(Variant.FAST_DOUBLE, B=args.B, seed=derive_seed(args.seed, 10, d))
                out = fdb_diagnostics(design, plan, args.mc_reps)
                diffs = [r.q_minus_f for r in out]
                spreads.append(np.subtract(*np.percentile(diffs, [75, 25])))
                rows += [(name, n, d, rep, r.f_obs, r.q_minus_f, r.p_bt, r.p_fdb) for rep, r in enumerate(out)]
            iqr[n] = np.array(spreads)
        print(f"D block {name}:")
        for n in args.sizes:
            print(f"  n={n:3d}  median IQR {np.median(iqr[n]):.4f}  per dataset {np.round(iqr[n], 3).tolist()}")
        if len(args.sizes) == 2:
            a, b = args.sizes
            print(f"  IQR(n={b}) < IQR(n={a}) on {int(np.sum(iqr[b] < iqr[a]))}/{args.datasets} datasets")

    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["D", "n", "dataset", "rep", "F_obs", "Q_minus_F", "p_bt", "p_fdb"])
            writer.writerows(rows)


if __name__ == "__main__":
    main()
