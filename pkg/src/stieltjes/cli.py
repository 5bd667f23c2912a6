"""Command-line front end.

Subcommands::

    eval       tabulate g, g(x+) and optionally a target on a grid
    approx     fit a g-polynomial to a target
    gram       Gram diagnostics around a center
    partition  oscillation partition and g-linear interpolant error
    monomial   tabulate g_{x0,0..n} on a grid

Exit codes: 0 on success, 1 for malformed input, 2 for numerical failure.
Errors are reported on stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import approx as ap
from .derivator import Derivator, DerivatorError, evaluate, gap, piece_index
from .errors import NumericalError
from .gpoly import gb_monomials, monomial_closed
from .gram import indicator_distances, ratio_sequence
from .integrate import right_limit
from .io import SpecError, load_derivator, load_target

log = logging.getLogger("stieltjes")

SUBCOMMANDS = ("eval", "approx", "gram", "partition", "monomial")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise SpecError(message)


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    derivator: str
    target: Optional[str] = None
    degree: int = 8
    backend: str = "sup_lsq"
    center: Optional[float] = None
    k: int = 20
    delta: float = 0.1
    grid: int = 201
    out: Optional[str] = None
    plot: Optional[str] = None
    format: str = "json"
    threads: int = 1
    samples: Optional[int] = None

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise SpecError(f"unknown subcommand {self.subcommand!r}")
        if self.degree < 0:
            raise SpecError("--degree must be >= 0")
        if self.grid < 2:
            raise SpecError("--grid must be >= 2")
        if self.threads < 1:
            raise SpecError("--threads must be >= 1")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stieltjes", description="Stieltjes calculus and g-polynomial approximation.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, target=False):
        p.add_argument("--derivator", required=True, help="derivator JSON file")
        if target:
            p.add_argument("--target", help="target JSON file")
        p.add_argument("--grid", type=int, default=201, help="grid points (default 201)")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--threads", type=int, default=1, help="threads for grid evaluation")

    common(sub.add_parser("eval", help="tabulate g and a target"), target=True)

    p = sub.add_parser("approx", help="fit a g-polynomial to a target")
    common(p, target=True)
    p.add_argument("--degree", type=int, default=8)
    p.add_argument("--backend", choices=ap.BACKENDS, default="sup_lsq")
    p.add_argument("--samples", type=int, help="nodes per piece (default 4*(degree+1))")
    p.add_argument("--plot", help="also write the plot CSV (x, g(x), f(x), p_g(x)) here")

    p = sub.add_parser("gram", help="Gram diagnostics around a center")
    common(p)
    p.add_argument("--center", type=float)
    p.add_argument("--k", type=int, default=20)

    p = sub.add_parser("partition", help="oscillation partition")
    common(p, target=True)
    p.add_argument("--delta", type=float, required=True)

    p = sub.add_parser("monomial", help="tabulate g-monomials")
    common(p)
    p.add_argument("--center", type=float)
    p.add_argument("--degree", type=int, default=4)
    return parser


def parse_config(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(list(argv))
    fields = {k: v for k, v in vars(ns).items() if k in RunConfig.__dataclass_fields__}
    return RunConfig(**fields)


# helpers ----------------------------------------------------------------


def grid_points(d: Derivator, n: int) -> np.ndarray:
    """``n`` equispaced points plus the jump abscissas."""
    return np.union1d(np.linspace(d.a, d.b, n), d.jx)


def _map(func, x: np.ndarray, threads: int) -> np.ndarray:
    """Evaluate ``func`` on chunks of ``x``; the result does not depend on ``threads``."""
    if threads == 1 or len(x) < 2 * threads:
        return np.asarray(func(x), dtype=float)
    chunks = np.array_split(x, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda c: np.asarray(func(c), dtype=float), chunks))
    return np.concatenate(parts)


def evaluate_target(d: Derivator, target, x) -> np.ndarray:
    """Values of a target on ``[a, b]``; per-piece targets are read through ``y = g^C(x)``."""
    x = np.asarray(x, dtype=float)
    if not isinstance(target, ap.PiecewiseTarget):
        return np.asarray(target(x), dtype=float)
    idx = piece_index(d, x)
    y = d.continuous_part(x)
    out = np.empty(x.shape)
    for j, tp in enumerate(target.pieces):
        m = idx == j
        if np.any(m):
            out[m] = tp.value if tp.degenerate else tp(y[m])
    return out


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and not np.isfinite(v)):
        return ""
    return format(float(v), ".17g")


def to_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _right_g(d: Derivator, x):
    inner = np.minimum(x, np.nextafter(d.b, d.a))
    return evaluate(d, x) + np.where(x < d.b, gap(d, inner), 0.0)


def _require_target(cfg: RunConfig, d: Derivator):
    if not cfg.target:
        raise SpecError(f"{cfg.subcommand} needs --target")
    return load_target(d, cfg.target)


# subcommands ------------------------------------------------------------


def cmd_eval(cfg: RunConfig, d: Derivator) -> str:
    x = grid_points(d, cfg.grid)
    gx = _map(lambda c: evaluate(d, c), x, cfg.threads)
    gr = _right_g(d, x)
    cols = {"x": x, "g": gx, "g_right": gr}
    if cfg.target:
        target = load_target(d, cfg.target)
        cols["f"] = _map(lambda c: evaluate_target(d, target, c), x, cfg.threads)
    if cfg.format == "csv":
        return to_csv(list(cols), zip(*cols.values()))
    return _dumps({k: [float(v) for v in col] for k, col in cols.items()})


def cmd_approx(cfg: RunConfig, d: Derivator) -> str:
    target = _require_target(cfg, d)
    res = ap.approximate(d, target, cfg.degree, cfg.backend, cfg.samples)
    x = grid_points(d, cfg.grid)
    plot = to_csv(
        ["x", "g(x)", "f(x)", "p_g(x)"],
        zip(
            x,
            evaluate(d, x),
            _map(lambda c: evaluate_target(d, target, c), x, cfg.threads),
            _map(res.poly, x, cfg.threads),
        ),
    )
    if cfg.plot:
        with open(cfg.plot, "w") as fh:
            fh.write(plot)
    if cfg.format == "csv":
        return plot
    return _dumps(res.to_json())


def cmd_gram(cfg: RunConfig, d: Derivator) -> str:
    x0 = d.a if cfg.center is None else cfg.center
    rep = ratio_sequence(d, x0, cfg.k)
    ind = [None] * cfg.k
    if x0 < d.b and float(gap(d, x0)) > 0:
        ind = list(indicator_distances(d, x0, cfg.k)[1:])
    if cfg.format == "csv":
        rows = zip(range(1, cfg.k + 1), rep.ratios, ind, rep.det_ratios, rep.conditioning)
        return to_csv(["k", "r_k", "indicator_distance", "det_ratio", "cond"], rows)
    out = rep.to_json()
    out["indicator_distances"] = [None if v is None else float(v) for v in ind]
    return _dumps(out)


def cmd_partition(cfg: RunConfig, d: Derivator) -> str:
    pts = ap.partition_by_oscillation(d, cfg.delta)
    out = {"points": [float(p) for p in pts], "delta": cfg.delta}
    if cfg.target:
        target = load_target(d, cfg.target)
        if isinstance(target, ap.PiecewiseTarget):
            raise SpecError("partition needs an expression target")
        L = ap.g_linear_interpolant(d, target, pts)
        x = grid_points(d, cfg.grid)
        err = np.abs(L(x) - target(x))
        inner = x[x < d.b]
        err_r = [abs(right_limit(d, L, s) - right_limit(d, target, s)) for s in inner]
        out["interpolant_error"] = float(max(np.max(err), max(err_r, default=0.0)))
        out["sampled_modulus"] = ap.sampled_modulus(d, target, cfg.delta, x)
    if cfg.format == "csv":
        return to_csv(["x"], ((p,) for p in pts))
    return _dumps(out)


def cmd_monomial(cfg: RunConfig, d: Derivator) -> str:
    x0 = d.a if cfg.center is None else cfg.center
    table = gb_monomials(d, x0, cfg.degree)
    fam = [monomial_closed(d, x0, n, table) for n in range(cfg.degree + 1)]
    x = grid_points(d, cfg.grid)
    cols = [_map(m, x, cfg.threads) for m in fam]
    names = [f"g_{n}" for n in range(cfg.degree + 1)]
    if cfg.format == "csv":
        return to_csv(["x"] + names, zip(x, *cols))
    return _dumps({"center": x0, "x": [float(v) for v in x], "values": {n: [float(v) for v in c] for n, c in zip(names, cols)}})


COMMANDS = {"eval": cmd_eval, "approx": cmd_approx, "gram": cmd_gram, "partition": cmd_partition, "monomial": cmd_monomial}


def _setup_logging():
    level = os.environ.get("STIELTJES_LOG", "").lower()
    if level in ("debug", "info"):
        logging.basicConfig(level=level.upper(), stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _fail(code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    return code


def run(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        d = load_derivator(cfg.derivator)
        text = COMMANDS[cfg.subcommand](cfg, d)
        _emit(text, cfg.out)
    except NumericalError as exc:
        return _fail(2, exc)
    except (SpecError, DerivatorError, ap.NotGContinuousError, ValueError, OverflowError, OSError) as exc:
        return _fail(1, exc)
    return 0


def main() -> None:
    sys.exit(run())
