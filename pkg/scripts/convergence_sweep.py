"""Sup-error versus degree for g-polynomial fits on a derivator.

For every backend and degree the achieved sup error is printed next to a
lower bound on the best possible error, obtained from a discrete minimax
linear program over Chebyshev nodes on each piece.

Example::

    python3 scripts/convergence_sweep.py --derivator scripts/data/fixture_a.json \
        --target scripts/data/sin.json --degrees 2 4 8 12 16 --out sweep.csv
"""

import argparse
import csv
import sys
import time
import warnings

import numpy as np
from scipy.optimize import linprog

from stieltjes import approx as ap
from stieltjes.errors import NumericalError
from stieltjes.io import load_derivator, load_target


def minimax_lower_bound(d, target, degree, nodes=200):
    """Best discrete sup error over ``nodes`` Chebyshev points per piece."""
    t = target if isinstance(target, ap.PiecewiseTarget) else ap.decompose_target(d, target)
    c = ap.jump_coefficients(d, degree)
    dom = ap._basis_domain(t)
    rows, rhs = [], []
    for j, tp in enumerate(t.pieces):
        y = np.array([tp.y_lo]) if tp.degenerate else ap._cheb_nodes(tp.y_lo, tp.y_hi, nodes)
        kmax = min(j, degree)
        D = ap._basis_derivatives(y, degree, kmax, dom)
        rows.append(np.tensordot(c.row(j)[: kmax + 1], D, axes=(0, 0)))
        rhs.append(np.full(len(y), tp.value) if tp.degenerate else tp(y))
    M, b = np.vstack(rows), np.concatenate(rhs)
    n = M.shape[1]
    ones = np.ones((len(b), 1))
    res = linprog(
        np.r_[np.zeros(n), 1.0],
        A_ub=np.block([[M, -ones], [-M, -ones]]),
        b_ub=np.r_[b, -b],
        bounds=[(None, None)] * n + [(0, None)],
    )
    return float(res.fun) if res.status == 0 else float("nan")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--derivator", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--degrees", type=int, nargs="+", default=[2, 4, 6, 8, 10, 12])
    p.add_argument("--backends", nargs="+", choices=ap.BACKENDS, default=["sup_lsq", "constructive"])
    p.add_argument("--no-bound", action="store_true", help="skip the minimax lower bound")
    p.add_argument("--out", help="CSV output (default stdout)")
    args = p.parse_args(argv)

    d = load_derivator(args.derivator)
    target = load_target(d, args.target)
    rows = []
    for deg in args.degrees:
        bound = float("nan") if args.no_bound else minimax_lower_bound(d, target, deg)
        for backend in args.backends:
            t0 = time.perf_counter()
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    err = ap.approximate(d, target, deg, backend).sup_error
            except NumericalError as exc:
                print(f"degree {deg} {backend}: {exc}", file=sys.stderr)
                err = float("nan")
            rows.append((deg, backend, err, bound, time.perf_counter() - t0))

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["degree", "backend", "sup_error", "minimax_lower_bound", "seconds"])
    for deg, backend, err, bound, sec in rows:
        w.writerow([deg, backend, f"{err:.6e}", f"{bound:.6e}", f"{sec:.3f}"])
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
