"""Corners of the task-assignment region for m tasks, and its R0-optimal split.

    python scripts/fig2_frontier.py --m 100 --out results/task100.csv
"""

import argparse
import math
import time
from pathlib import Path

import numpy as np

from cascade_synthesis.regions import scatter_summary, task_region


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--out", type=Path, default=None, help="corner CSV")
    args = ap.parse_args()

    t = time.perf_counter()
    f = task_region(args.m)
    dt = time.perf_counter() - t
    mat = f.matrix
    print(f"m={args.m}: {len(f.corners)} corners (bound {(args.m - 1) * (args.m - 2) // 2}), "
          f"{len(f.vertices)} hull vertices, {len(f.facets)} facets, {dt:.2f}s")
    for j, name in enumerate(("R0", "R1", "R2")):
        c = f.argmin(j)
        print(f"  min {name} = {mat[:, j].min():.6f} at {c.generator}  point {np.round(c.point.as_vector(), 6)}")
    sums = mat[:, 1] + mat[:, 2]
    print(f"  min R1+R2 = {sums.min():.6f} (log2 m = {math.log2(args.m):.6f})")
    if args.m % 2 == 0:
        s = scatter_summary(args.m)
        print(f"  scatter relay: min sum {s['min_sum_rate']:.6f}, gap at a=m-1 {s['gap_at_a_m_minus_1']:.6f}")
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", newline="") as fh:
            fh.write(f.to_csv())
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
