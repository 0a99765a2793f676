"""Two-stage relay scheme on the scatter target: TV against n above and below the floor."""

import argparse

import numpy as np

from cascade_synthesis.regions import scatter_relay_coupling, variation_rates
from cascade_synthesis.synth import relay_scheme_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--a", type=int, default=1)
    ap.add_argument("--n", type=int, nargs="+", default=[1, 2, 3, 4, 5, 6])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--margin", type=float, default=0.25)
    args = ap.parse_args()

    c = scatter_relay_coupling(args.m, args.a)
    floor = np.array(variation_rates(c, "thm4_relay").r, dtype=float)
    for label, rates in (("above", floor + args.margin), ("R1 starved", floor + [-0.5, args.margin])):
        rates = np.maximum(rates, 0.0)
        rep = relay_scheme_experiment(None, c, rates, args.n, args.trials)
        print(f"{label}: floor {np.round(floor, 4)}, rates {np.round(rates, 4)}, common {rep.config['common_rates']}")
        for n in args.n:
            print(f"  n={n}  TV {rep.mean(n):.4f} +- {rep.stderr(n):.4f}")


if __name__ == "__main__":
    main()
