"""Oscillation partitions and g-linear interpolation error for a range of deltas.

Example::

    python3 scripts/partition_demo.py --derivator scripts/data/fixture_a.json --expr "sin(3*g)"
"""

import argparse
import csv
import math
import sys

import numpy as np

from stieltjes import approx as ap
from stieltjes.derivator import measure
from stieltjes.io import compile_expr, load_derivator


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--derivator", required=True)
    p.add_argument("--expr", default="sin(3*g)", help="target as an expression in g")
    p.add_argument("--deltas", type=float, nargs="+", default=[0.5, 0.25, 0.1, 0.05, 0.025])
    p.add_argument("--grid", type=int, default=2001)
    args = p.parse_args(argv)

    d = load_derivator(args.derivator)
    f = ap.GFunction(d, compile_expr(args.expr))
    total = measure(d, d.a, d.b)
    xs = np.linspace(d.a, d.b, args.grid)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["delta", "points", "length_bound", "interpolant_error", "sampled_modulus"])
    for delta in args.deltas:
        pts = ap.partition_by_oscillation(d, delta)
        grid = np.union1d(xs, pts)
        L = ap.g_linear_interpolant(d, f, pts)
        err = float(np.max(np.abs(L(grid) - f(grid))))
        omega = ap.sampled_modulus(d, f, delta, grid)
        w.writerow([delta, len(pts), max(1, math.ceil(total / delta)) + 1, f"{err:.4e}", f"{omega:.4e}"])


if __name__ == "__main__":
    main()
