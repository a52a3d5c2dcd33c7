"""Factorization and reduction residuals over a random strongly elliptic corpus."""
import argparse
import time

import numpy as np

from anisored import checkers as ck
from anisored import quadpoly as qp
from anisored import reduction as rd


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    t0 = time.perf_counter()
    corpus = ck.random_corpus(args.n, args.seed)
    worst = {"factorization": 0.0, "quadratic": 0.0, "sylvester": 0.0, "conjugacy": 0.0}
    min_gap, min_sep = np.inf, np.inf
    rng = np.random.default_rng(args.seed + 1)
    for t in corpus:
        p = qp.QuadMatPoly.from_tensor(t.a)
        f = qp.right_divisor(p)
        tm, sm = rd.compute_t_s(p, factorization=f)
        c = rng.normal(size=(2, 2))
        psi = rd.solve_sylvester(tm, sm, c)
        p1, p2 = rd.assemble_diagonal(tm, sm)
        worst["factorization"] = max(worst["factorization"], f.residual)
        worst["quadratic"] = max(worst["quadratic"], rd.quadratic_residual(p, tm))
        worst["sylvester"] = max(worst["sylvester"], rd.sylvester_residual(psi, tm, sm, c))
        worst["conjugacy"] = max(worst["conjugacy"], rd.conjugacy_defect(p1, p2))
        min_gap = min(min_gap, rd.spectra(tm, sm)[1])
        min_sep = min(min_sep, f.split.separation / f.split.scale)
    print(f"{args.n} tensors in {time.perf_counter() - t0:.2f} s")
    for k, v in worst.items():
        print(f"worst {k:<14} {v:.3e}")
    print(f"min spectral gap T/S  {min_gap:.3e}")
    print(f"min root separation   {min_sep:.3e} (relative)")


if __name__ == "__main__":
    main()
