"""Derivators with a piecewise-linear continuous part and finitely many jumps.

A derivator ``g`` on ``[a, b]`` is stored as

* the graph of its continuous part ``g^C`` (continuous, nondecreasing,
  piecewise linear, given by breakpoints), and
* a sorted list of jumps ``(x_i, gap_i)`` with ``a <= x_i < b``.

``g(x) = g^C(x) + sum_{x_i < x} gap_i`` is left-continuous. The constructor
shifts the breakpoint values so that ``g(a) = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class DerivatorError(ValueError):
    """Raised for invalid derivator data or out-of-domain queries."""


@dataclass(frozen=True)
class Piece:
    """One piece of ``[a, b]`` between consecutive discontinuities.

    The first piece is closed ``[left, right]``; the others are ``(left, right]``.
    ``y_lo`` and ``y_hi`` are the values of ``g^C`` at the piece ends, and
    ``jump_level`` is the (constant) value of ``g^B`` on the piece.
    """

    index: int
    left: float
    right: float
    y_lo: float
    y_hi: float
    jump_level: float

    @property
    def closed_left(self) -> bool:
        return self.index == 0

    @property
    def degenerate(self) -> bool:
        return self.y_hi == self.y_lo

    def contains(self, x: float) -> bool:
        if self.closed_left:
            return self.left <= x <= self.right
        return self.left < x <= self.right


@dataclass(frozen=True)
class Derivator:
    """Immutable derivator; build instances with :func:`make_derivator`."""

    a: float
    b: float
    bx: np.ndarray  # breakpoint abscissas of g^C
    by: np.ndarray  # breakpoint values of g^C, by[0] == 0
    jx: np.ndarray  # jump abscissas
    jd: np.ndarray  # jump gaps
    _knots: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        for name in ("bx", "by", "jx", "jd"):
            getattr(self, name).setflags(write=False)
        knots = np.union1d(self.bx, self.jx)
        knots.setflags(write=False)
        object.__setattr__(self, "_knots", knots)

    # basic queries -----------------------------------------------------

    @property
    def interval(self) -> tuple[float, float]:
        return (self.a, self.b)

    @property
    def knots(self) -> np.ndarray:
        """Union of ``g^C`` breakpoints and jump abscissas (sorted)."""
        return self._knots

    @property
    def n_jumps(self) -> int:
        return len(self.jx)

    @property
    def is_continuous(self) -> bool:
        return len(self.jx) == 0

    def _check_domain(self, x, right=False):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.a) or np.any(x > self.b) or np.any(np.isnan(x)):
            raise DerivatorError(f"point outside [{self.a}, {self.b}]")
        if right and np.any(x >= self.b):
            raise DerivatorError("right-hand limit is undefined at b")
        return x

    def continuous_part(self, x):
        """``g^C(x)``; vectorized."""
        x = self._check_domain(x)
        return np.interp(x, self.bx, self.by)

    def jump_part(self, x):
        """``g^B(x) = sum of gaps at jumps strictly left of x``; vectorized."""
        x = self._check_domain(x)
        cum = np.concatenate(([0.0], np.cumsum(self.jd)))
        return cum[np.searchsorted(self.jx, x, side="left")]

    def __call__(self, x):
        return evaluate(self, x)


def make_derivator(
    interval: Sequence[float],
    gc_breakpoints: Sequence[Sequence[float]],
    jumps: Sequence[Sequence[float]] = (),
) -> Derivator:
    """Validate the data of a derivator and normalize it to ``g(a) = 0``.

    Parameters
    ----------
    interval : (a, b)
    gc_breakpoints : sequence of (x, y)
        Graph of ``g^C``; the first abscissa must be ``a`` and the last ``b``.
    jumps : sequence of (x, gap)
        Jump abscissas in ``[a, b)`` with strictly positive gaps.
    """
    a, b = (float(v) for v in interval)
    if not (np.isfinite(a) and np.isfinite(b)) or a > b:
        raise DerivatorError(f"invalid interval ({a}, {b})")
    bp = np.asarray(gc_breakpoints, dtype=float).reshape(-1, 2)
    if len(bp) == 0:
        raise DerivatorError("at least one breakpoint is required")
    bx, by = bp[:, 0].copy(), bp[:, 1].copy()
    if not np.all(np.isfinite(bp)):
        raise DerivatorError("non-finite breakpoint")
    if bx[0] != a or bx[-1] != b:
        raise DerivatorError("breakpoints must span [a, b]")
    if a == b:
        if len(bx) != 1:
            raise DerivatorError("degenerate interval takes a single breakpoint")
    elif np.any(np.diff(bx) <= 0):
        raise DerivatorError("breakpoint abscissas must be strictly increasing")
    if np.any(np.diff(by) < 0):
        raise DerivatorError("non-monotone breakpoints: g^C must be nondecreasing")
    by = by - by[0]

    jp = np.asarray(jumps, dtype=float).reshape(-1, 2)
    jx, jd = jp[:, 0].copy(), jp[:, 1].copy()
    if not np.all(np.isfinite(jp)):
        raise DerivatorError("non-finite jump data")
    if np.any(jd <= 0):
        raise DerivatorError("nonpositive gap")
    if np.any(jx < a) or np.any(jx >= b):
        raise DerivatorError("jump abscissas must lie in [a, b)")
    if np.any(np.diff(jx) <= 0):
        raise DerivatorError("jump abscissas must be strictly increasing")
    return Derivator(a, b, bx, by, jx, jd)


def evaluate(d: Derivator, x):
    """Left-continuous value ``g(x)``."""
    return d.continuous_part(x) + d.jump_part(x)


def evaluate_right(d: Derivator, x):
    """Right-hand limit ``g(x^+) = g(x) + gap(x)``; undefined at ``b``."""
    x = d._check_domain(x, right=True)
    return evaluate(d, x) + gap(d, x)


def gap(d: Derivator, x):
    """``g(x^+) - g(x)``: the stored gap when ``x`` is a jump abscissa, else 0."""
    x = d._check_domain(x, right=True)
    idx = np.searchsorted(d.jx, x, side="left")
    hit = idx < len(d.jx)
    out = np.zeros(np.shape(x))
    safe = np.where(hit, idx, 0)
    if len(d.jx):
        is_jump = hit & (d.jx[safe] == x)
        out = np.where(is_jump, d.jd[safe], 0.0)
    return out if np.ndim(x) else float(out)


def measure(d: Derivator, c: float, e: float) -> float:
    """``mu_g([c, e)) = g(e) - g(c)``."""
    if c > e:
        raise DerivatorError(f"empty orientation: c={c} > e={e}")
    return float(evaluate(d, e) - evaluate(d, c))


def pseudo_distance(d: Derivator, x, y):
    return np.abs(evaluate(d, x) - evaluate(d, y))


def split_parts(d: Derivator) -> tuple[Derivator, Derivator]:
    """Return ``(g^C, g^B)`` as derivators on the same interval."""
    cont = Derivator(d.a, d.b, d.bx.copy(), d.by.copy(), np.empty(0), np.empty(0))
    if d.a == d.b:
        zx, zy = np.array([d.a]), np.array([0.0])
    else:
        zx, zy = np.array([d.a, d.b]), np.zeros(2)
    jumps = Derivator(d.a, d.b, zx, zy, d.jx.copy(), d.jd.copy())
    return cont, jumps


def pieces(d: Derivator) -> list[Piece]:
    """Split ``[a, b]`` at the jump abscissas.

    Returns ``P_1 = [a, x_1]`` and ``P_j = (x_{j-1}, x_j]`` where ``x_j`` run
    over the jumps and the last piece ends at ``b``. ``P_1`` is ``{a}`` when
    ``a`` is itself a jump.
    """
    ends = np.concatenate(([d.a], d.jx, [d.b]))
    if len(d.jx) and d.jx[0] == d.a:
        ends = ends[1:]  # x_0 = x_1 = a
        lefts = np.concatenate(([d.a], ends[:-1]))
        rights = ends
    else:
        lefts, rights = ends[:-1], ends[1:]
    cum = np.concatenate(([0.0], np.cumsum(d.jd)))
    yl = np.interp(lefts, d.bx, d.by)
    yr = np.interp(rights, d.bx, d.by)
    return [
        Piece(j, float(lefts[j]), float(rights[j]), float(yl[j]), float(yr[j]), float(cum[j]))
        for j in range(len(rights))
    ]


def piece_index(d: Derivator, x):
    """Index of the piece containing ``x`` (number of jumps strictly below ``x``)."""
    x = d._check_domain(x)
    return np.searchsorted(d.jx, x, side="left")


def flat_components(d: Derivator) -> list[tuple[float, float]]:
    """Maximal intervals ``[l, r]`` on which ``g`` is constant on ``(l, r]``.

    These are runs of flat ``g^C`` segments not interrupted by an interior
    jump; their interiors make up ``C_g``.
    """
    out = []
    cur = None
    for k in range(len(d.bx) - 1):
        xl, xr = d.bx[k], d.bx[k + 1]
        flat = d.by[k + 1] == d.by[k]
        inner_jump = np.any((d.jx > xl) & (d.jx < xr))
        if not flat or inner_jump:
            if cur is not None:
                out.append(cur)
                cur = None
            if flat and inner_jump:
                cuts = np.concatenate(([xl], d.jx[(d.jx > xl) & (d.jx < xr)], [xr]))
                out.extend((float(l), float(r)) for l, r in zip(cuts[:-1], cuts[1:]))
            continue
        if cur is not None and cur[1] == xl and not np.any(d.jx == xl):
            cur = (cur[0], float(xr))
        else:
            if cur is not None:
                out.append(cur)
            cur = (float(xl), float(xr))
    if cur is not None:
        out.append(cur)
    return out


def level_set_max(d: Derivator, x0: float) -> float:
    """``max g^{-1}({g(x0)})``, the right end of the level set through ``x0``."""
    gx0 = float(evaluate(d, x0))
    beta = float(x0)
    for l, r in flat_components(d):
        if l <= beta < r and float(evaluate(d, r)) == gx0:
            beta = r
    return beta
