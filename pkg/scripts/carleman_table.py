"""Carleman-ratio table for the constant family tensor over tau and grid size."""
import argparse

from anisored import gridlab as gl
from anisored.checkers import Example5Params, example5
from anisored.fields import Grid2, PolyField
from anisored.reduction import PointReduction

import numpy as np


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--params", type=float, nargs=4, default=[2, 0, 1, 1], metavar=("A", "B", "C", "F"))
    ap.add_argument("--n", type=int, nargs="+", default=[65, 129, 257])
    ap.add_argument("--tau", type=float, nargs="+", default=[20, 40, 80, 160, 320])
    ap.add_argument("--nu", type=float, default=1.0)
    ap.add_argument("--r-min", type=float, default=0.05)
    args = ap.parse_args()
    t, _ = example5(Example5Params(*args.params))
    data = PointReduction(t, (0.0, 0.0)).data()
    v = PolyField(np.array([[0.0], [1.0]]))
    for n in args.n:
        g = Grid2(0.5, n)
        w = gl.flat_state(g, args.nu, v)
        rows = gl.carleman_ratio(data, w, gl.CarlemanProbe(args.tau, args.nu, args.r_min), g)
        print(f"n = {n} (h = {g.h:.4g})")
        print(f"{'tau':>8} {'log lhs':>12} {'log rhs':>12} {'ratio':>10}")
        for r in rows:
            print(f"{r.tau:>8g} {r.log_lhs:>12.5g} {r.log_rhs:>12.5g} {r.ratio:>10.4g}")
        ratios = [r.ratio for r in rows]
        print(f"spread max/min = {max(ratios) / min(ratios):.3f}\n")


if __name__ == "__main__":
    main()
