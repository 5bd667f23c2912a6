"""Exact piecewise polynomials on a knot grid, with left-continuous knot values.

Each cell ``[s_i, s_{i+1}]`` carries a :class:`numpy.polynomial.Chebyshev`
series mapped to that cell. The value *at* a knot is stored separately, so
isolated point values (indicator functions of atoms) are representable and
``f(s_i)`` may differ from both one-sided limits.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from numpy.polynomial import Chebyshev


class PiecewisePolynomial:
    def __init__(self, knots, polys: Sequence[Chebyshev], knot_values=None):
        knots = np.asarray(knots, dtype=float)
        if knots.ndim != 1 or len(knots) < 1:
            raise ValueError("need at least one knot")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        if len(polys) != max(len(knots) - 1, 0):
            raise ValueError("one polynomial per cell is required")
        self.knots = knots
        self.polys = [
            p if np.allclose(p.domain, knots[i : i + 2], rtol=0, atol=0) else p.convert(domain=knots[i : i + 2])
            for i, p in enumerate(polys)
        ]
        if knot_values is None:
            knot_values = self._default_knot_values()
        self.knot_values = np.asarray(knot_values, dtype=float)
        if self.knot_values.shape != knots.shape:
            raise ValueError("one value per knot is required")

    def _default_knot_values(self):
        if len(self.polys) == 0:
            return np.zeros(1)
        vals = [self.polys[0](self.knots[0])]
        vals += [p(p.domain[1]) for p in self.polys]
        return np.array(vals, dtype=float)

    # constructors ------------------------------------------------------

    @classmethod
    def from_cell_function(cls, knots, func, deg, knot_values=None):
        """Interpolate ``func`` on each cell at Chebyshev points of the first kind.

        The points are strictly interior, so ``func`` may be discontinuous at
        the knots.
        """
        knots = np.asarray(knots, dtype=float)
        polys = [Chebyshev.interpolate(func, deg, domain=knots[i : i + 2]) for i in range(len(knots) - 1)]
        if knot_values is None:
            knot_values = func(knots)
        return cls(knots, polys, knot_values)

    @classmethod
    def constant(cls, knots, value=1.0):
        knots = np.asarray(knots, dtype=float)
        polys = [Chebyshev([value], domain=knots[i : i + 2]) for i in range(len(knots) - 1)]
        return cls(knots, polys, np.full(len(knots), float(value)))

    # evaluation --------------------------------------------------------

    def _cells(self, x, right=False):
        side = "right" if right else "left"
        idx = np.searchsorted(self.knots, x, side=side) - 1
        return np.clip(idx, 0, len(self.polys) - 1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.empty_like(x)
        if len(self.polys) == 0:
            out[:] = self.knot_values[0]
        else:
            cell = self._cells(x)
            for i in np.unique(cell):
                m = cell == i
                out[m] = self.polys[i](x[m])
            k = np.searchsorted(self.knots, x)
            k = np.clip(k, 0, len(self.knots) - 1)
            at_knot = self.knots[k] == x
            out[at_knot] = self.knot_values[k[at_knot]]
        return float(out[0]) if scalar else out

    def right(self, x):
        """Right-hand limit at ``x`` (the right cell's polynomial at knots)."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.empty_like(x)
        if len(self.polys) == 0:
            out[:] = self.knot_values[0]
        else:
            cell = self._cells(x, right=True)
            for i in np.unique(cell):
                m = cell == i
                out[m] = self.polys[i](x[m])
        return float(out[0]) if scalar else out

    def left(self, x):
        """Left-hand limit at ``x`` (the left cell's polynomial at knots)."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.empty_like(x)
        cell = self._cells(x)
        for i in np.unique(cell):
            m = cell == i
            out[m] = self.polys[i](x[m])
        return float(out[0]) if scalar else out

    # arithmetic --------------------------------------------------------

    def refine(self, knots) -> "PiecewisePolynomial":
        """Re-express on a finer knot grid containing the current knots."""
        knots = np.asarray(knots, dtype=float)
        if not np.all(np.isin(self.knots, knots)):
            raise ValueError("refinement must contain the existing knots")
        if len(knots) == len(self.knots):
            return self
        mids = 0.5 * (knots[:-1] + knots[1:])
        cell = self._cells(mids)
        polys = [self.polys[c].convert(domain=knots[i : i + 2]) for i, c in enumerate(cell)]
        return PiecewisePolynomial(knots, polys, self(knots))

    def _aligned(self, other):
        if isinstance(other, PiecewisePolynomial):
            if len(other.knots) == len(self.knots) and np.array_equal(other.knots, self.knots):
                return self, other
            knots = np.union1d(self.knots, other.knots)
            return self.refine(knots), other.refine(knots)
        return None

    def _combine(self, other, op):
        pair = self._aligned(other)
        if pair is None:
            c = float(other)
            polys = [op(p, c) for p in self.polys]
            return PiecewisePolynomial(self.knots, polys, op(self.knot_values, c))
        u, v = pair
        polys = [op(p, q) for p, q in zip(u.polys, v.polys)]
        return PiecewisePolynomial(u.knots, polys, op(u.knot_values, v.knot_values))

    def __add__(self, other):
        return self._combine(other, lambda p, q: p + q)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda p, q: p - q)

    def __rsub__(self, other):
        return (-1.0) * self + other

    def __mul__(self, other):
        return self._combine(other, lambda p, q: p * q)

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def __truediv__(self, c):
        return self * (1.0 / float(c))

    @property
    def degree(self) -> int:
        return max((p.degree() for p in self.polys), default=0)

    def trim(self, tol=0.0) -> "PiecewisePolynomial":
        polys = [p.trim(tol) for p in self.polys]
        return PiecewisePolynomial(self.knots, polys, self.knot_values)

    def integral(self, c: float, e: float, weight_knots, weight_slopes) -> float:
        """``int_c^e f(x) w(x) dx`` for a piecewise-constant weight ``w``.

        ``weight_knots`` are the cell ends of ``w`` and ``weight_slopes`` its
        value on each cell; in practice ``w`` is the slope of ``g^C``.
        """
        if e <= c:
            return 0.0
        grid = np.union1d(self.knots, weight_knots)
        grid = grid[(grid > c) & (grid < e)]
        grid = np.concatenate(([c], grid, [e]))
        total = 0.0
        for lo, hi in zip(grid[:-1], grid[1:]):
            mid = 0.5 * (lo + hi)
            wi = np.searchsorted(weight_knots, mid) - 1
            if wi < 0 or wi >= len(weight_slopes):
                continue
            w = weight_slopes[wi]
            if w == 0.0:
                continue
            P = self.polys[int(self._cells(np.array([mid]))[0])].integ()
            total += w * (P(hi) - P(lo))
        return float(total)
