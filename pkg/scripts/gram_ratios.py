"""Distance of the constant 1 to span{g_{x0,1..k}} for several centers.

The sequence is nonincreasing and its limit is the jump of g at the right end
of the level set of x0; the script prints both so the gap can be read off.

Example::

    python3 scripts/gram_ratios.py --derivator scripts/data/fixture_a.json --centers 0 0.25 0.5 --k 16
"""

import argparse
import csv
import sys

from stieltjes.gram import ratio_sequence
from stieltjes.io import load_derivator


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--derivator", required=True)
    p.add_argument("--centers", type=float, nargs="+", required=True)
    p.add_argument("--k", type=int, default=16)
    args = p.parse_args(argv)

    d = load_derivator(args.derivator)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["center", "k", "r_k", "limit", "r_k_minus_limit", "gram_cond"])
    for x0 in args.centers:
        rep = ratio_sequence(d, x0, args.k)
        for k, (r, cond) in enumerate(zip(rep.ratios, rep.conditioning), start=1):
            w.writerow([x0, k, f"{r:.10g}", f"{rep.limit:.10g}", f"{r - rep.limit:.3e}", f"{cond:.3e}"])


if __name__ == "__main__":
    main()
