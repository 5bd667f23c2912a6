"""g-monomials and g-polynomials.

The closed form splits a monomial into continuous and jump factors::

    g_{x0,n}(x) = sum_k C(n, k) (g^C(x) - g^C(x0))^k  g^B_{x0,n-k}(x)

where the jump monomials ``g^B_{x0,m}`` are constant on every piece and come
from finite sums over the jumps. ``monomial_recursive`` recomputes the same
functions from the defining iterated integral, as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial

from .derivator import Derivator, DerivatorError, evaluate, pieces, piece_index
from .integrate import DEFAULT_TOL, Integrand, ls_integrate
from .pwpoly import PiecewisePolynomial

MAX_DEGREE = 60


def _check_degree(n: int):
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if n > MAX_DEGREE:
        raise OverflowError(f"degrees above {MAX_DEGREE} are refused")


@dataclass(frozen=True)
class JumpMonomialTable:
    """``values[n, j]`` is the constant value of ``g^B_{x0,n}`` on piece ``j``."""

    center: float
    values: np.ndarray

    @property
    def max_degree(self) -> int:
        return self.values.shape[0] - 1

    def at(self, d: Derivator, n: int, x):
        return self.values[n][piece_index(d, x)]


def gb_monomials(d: Derivator, x0: float, N: int) -> JumpMonomialTable:
    """Jump monomials up to degree ``N`` by the finite recursion over jumps.

    For pieces right of ``x0``:  ``v_n(j) = n * sum_{i < j, x_i >= x0} v_{n-1}(i) gap_i``;
    for pieces left of ``x0``:   ``v_n(j) = -n * sum_{i >= j, x_i < x0} v_{n-1}(i) gap_i``.
    Jump ``i`` is the right end of piece ``i``, so ``v_{n-1}`` at that jump is
    the value on piece ``i``.
    """
    _check_degree(N)
    if not (d.a <= x0 <= d.b):
        raise DerivatorError("center outside [a, b]")
    ps = pieces(d)
    npieces = len(ps)
    jx, jd = d.jx, d.jd
    # piece j is right of x0 when its right end is >= x0
    forward = np.array([p.right >= x0 for p in ps])
    vals = np.zeros((N + 1, npieces))
    vals[0] = 1.0
    fwd_ok = jx >= x0
    bwd_ok = jx < x0
    for n in range(1, N + 1):
        prev = vals[n - 1]
        for j in range(npieces):
            if forward[j]:
                idx = np.arange(min(j, len(jx)))
                idx = idx[fwd_ok[idx]]
                vals[n, j] = n * np.sum(prev[idx] * jd[idx]) if len(idx) else 0.0
            else:
                idx = np.arange(j, len(jx))
                idx = idx[bwd_ok[idx]]
                vals[n, j] = -n * np.sum(prev[idx] * jd[idx]) if len(idx) else 0.0
    vals.setflags(write=False)
    return JumpMonomialTable(float(x0), vals)


def _gc_power_pieces(d: Derivator, x0: float, k: int) -> list[Chebyshev]:
    """``(g^C(x) - g^C(x0))^k`` on each knot cell, as Chebyshev series."""
    knots = d.knots
    yc0 = float(np.interp(x0, d.bx, d.by))
    ys = np.interp(knots, d.bx, d.by) - yc0
    out = []
    for i in range(len(knots) - 1):
        dom = knots[i : i + 2]
        lin = Chebyshev([0.5 * (ys[i] + ys[i + 1]), 0.5 * (ys[i + 1] - ys[i])], domain=dom)
        out.append(lin**k)
    return out


def monomial_closed(d: Derivator, x0: float, n: int, table: JumpMonomialTable | None = None) -> PiecewisePolynomial:
    """Exact piecewise-polynomial ``g_{x0,n}`` on the knot grid of ``d``."""
    _check_degree(n)
    if table is None or table.max_degree < n or table.center != x0:
        table = gb_monomials(d, x0, n)
    knots = d.knots
    if len(knots) == 1:
        return PiecewisePolynomial(knots, [], [1.0 if n == 0 else 0.0])
    mids = 0.5 * (knots[:-1] + knots[1:])
    cell_piece = piece_index(d, mids)
    knot_piece = piece_index(d, knots)
    yc0 = float(np.interp(x0, d.bx, d.by))
    yk = np.interp(knots, d.bx, d.by) - yc0
    polys = [Chebyshev([0.0], domain=knots[i : i + 2]) for i in range(len(mids))]
    knot_vals = np.zeros(len(knots))
    for k in range(n + 1):
        coef = math.comb(n, k)
        gb = table.values[n - k]
        if not np.any(gb[cell_piece]) and not np.any(gb[knot_piece]):
            continue
        powers = _gc_power_pieces(d, x0, k)
        for i in range(len(mids)):
            v = gb[cell_piece[i]]
            if v != 0.0:
                polys[i] = polys[i] + (coef * v) * powers[i]
        knot_vals += coef * yk**k * gb[knot_piece]
    return PiecewisePolynomial(knots, polys, knot_vals)


def monomial_recursive(d: Derivator, x0: float, n: int, tol: float = DEFAULT_TOL, nodes: int = 24) -> Integrand:
    """``g_{x0,n}`` from its defining recursion, integrating numerically.

    Each level is ``n * int_{[x0,x)} g_{x0,n-1} dmu_g`` (or the negative
    integral over ``[x, x0)`` left of the center), computed with
    :func:`~stieltjes.integrate.ls_integrate`. Between levels the previous
    monomial is resampled cell by cell at interior Chebyshev points, which
    keeps the cost linear in ``n``.
    """
    return monomial_recursive_family(d, x0, n, tol, nodes)[n]


def monomial_recursive_family(
    d: Derivator, x0: float, N: int, tol: float = DEFAULT_TOL, nodes: int = 24
) -> list[Integrand]:
    """``[g_{x0,0}, ..., g_{x0,N}]`` from the recursion, sharing the levels."""
    _check_degree(N)
    knots = d.knots

    def level_zero(x):
        return np.ones(np.shape(x))

    family = [Integrand(level_zero)]
    prev = family[0]
    for m in range(1, N + 1):
        current = _next_level(d, x0, m, prev, tol)
        family.append(current)
        if m < N and len(knots) > 1:
            pp = PiecewisePolynomial.from_cell_function(knots, current.evaluator, nodes - 1)
            # a fast evaluator only; exact stays None so integration is by quadrature
            prev = Integrand(pp)
    return family


def _next_level(d, x0, m, prev: Integrand, tol) -> Integrand:
    """``m * int_{[x0, x)} prev dmu_g`` as a running sum over the sorted points."""
    span = max(d.b - d.a, np.finfo(float).tiny)

    def level(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        pts = np.unique(np.concatenate((x.ravel(), [x0])))
        vals = np.zeros(len(pts))
        i0 = int(np.searchsorted(pts, x0))
        acc = 0.0
        for i in range(i0, len(pts) - 1):
            acc += ls_integrate(d, prev, pts[i], pts[i + 1], tol * (pts[i + 1] - pts[i]) / span)
            vals[i + 1] = m * acc
        acc = 0.0
        for i in range(i0, 0, -1):
            acc += ls_integrate(d, prev, pts[i - 1], pts[i], tol * (pts[i] - pts[i - 1]) / span)
            vals[i - 1] = -m * acc
        return vals[np.searchsorted(pts, x)]

    return Integrand(level)


# g-polynomials ----------------------------------------------------------


@dataclass(frozen=True)
class GPolynomial:
    """``sum_k coefficients[k] * g_{center,k}``."""

    derivator: Derivator
    center: float
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coefficients, dtype=float))
        if len(c) == 0:
            c = np.zeros(1)
        _check_degree(len(c) - 1)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "center", float(self.center))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def table(self) -> JumpMonomialTable:
        return gb_monomials(self.derivator, self.center, self.degree)

    def classical(self) -> Polynomial:
        """``p(y) = sum_k alpha_k (y - g^C(x0))^k`` in the variable ``y = g^C(x)``."""
        yc0 = float(np.interp(self.center, self.derivator.bx, self.derivator.by))
        return Polynomial(self.coefficients, domain=[yc0 - 1, yc0 + 1])

    def __call__(self, x):
        return evaluate_gpoly(self, x)

    def right(self, x):
        return evaluate_gpoly_right(self, x)

    def to_pp(self) -> PiecewisePolynomial:
        d = self.derivator
        table = self.table()
        out = None
        for k, a in enumerate(self.coefficients):
            if a == 0.0 and out is not None:
                continue
            term = a * monomial_closed(d, self.center, k, table)
            out = term if out is None else out + term
        return out

    def to_json(self) -> dict:
        return {"center": self.center, "coefficients": [float(c) for c in self.coefficients]}


def _factored(p: GPolynomial, yc, jump_vals):
    """``sum_k p^(k)(y) v_k / k!`` with ``v_k`` the jump-monomial values."""
    poly = p.classical()
    total = np.zeros(np.shape(yc))
    deriv = poly
    for k in range(p.degree + 1):
        total = total + deriv(yc) * jump_vals[k] / math.factorial(k)
        deriv = deriv.deriv()
    return total


def evaluate_gpoly(p: GPolynomial, x):
    """Value via the factored form ``sum_k p^(k)(g^C(x)) g^B_k(x) / k!``."""
    d = p.derivator
    x = np.asarray(x, dtype=float)
    table = p.table()
    idx = piece_index(d, x)
    return _factored(p, d.continuous_part(x), table.values[:, idx])


def evaluate_gpoly_right(p: GPolynomial, x):
    """Right-hand limit: ``g^C`` is continuous, ``g^B`` moves to the next piece."""
    d = p.derivator
    x = np.asarray(x, dtype=float)
    if np.any(x >= d.b):
        raise DerivatorError("right-hand limit is undefined at b")
    table = p.table()
    idx = np.searchsorted(d.jx, x, side="right")
    return _factored(p, d.continuous_part(x), table.values[:, idx])


def evaluate_monomial_sum(p: GPolynomial, x):
    """Value via ``sum_k alpha_k g_{x0,k}(x)`` with the binomial closed form."""
    d = p.derivator
    x = np.asarray(x, dtype=float)
    table = p.table()
    idx = piece_index(d, x)
    yc = d.continuous_part(x) - float(np.interp(p.center, d.bx, d.by))
    total = np.zeros(np.shape(x))
    for n, a in enumerate(p.coefficients):
        if a == 0.0:
            continue
        mono = np.zeros(np.shape(x))
        for k in range(n + 1):
            mono = mono + math.comb(n, k) * yc**k * table.values[n - k][idx]
        total = total + a * mono
    return total


def monomial_values_at(d: Derivator, x0: float, x: float, N: int) -> np.ndarray:
    """``(g_{x0,0}(x), ..., g_{x0,N}(x))`` at a single point."""
    table = gb_monomials(d, x0, N)
    j = int(piece_index(d, x))
    yc = float(np.interp(x, d.bx, d.by) - np.interp(x0, d.bx, d.by))
    return np.array(
        [sum(math.comb(n, k) * yc**k * table.values[n - k][j] for k in range(n + 1)) for n in range(N + 1)]
    )


def recenter(p: GPolynomial, x1: float) -> GPolynomial:
    """Re-express ``p`` over monomials centered at ``x1``.

    Uses ``g_{x0,n} = sum_k C(n,k) g_{x0,k}(x1) g_{x1,n-k}``.
    """
    d = p.derivator
    if not (d.a <= x1 <= d.b):
        raise DerivatorError("center outside [a, b]")
    m = p.degree
    at = monomial_values_at(d, p.center, x1, m)
    new = np.zeros(m + 1)
    for n, a in enumerate(p.coefficients):
        for k in range(n + 1):
            new[n - k] += a * math.comb(n, k) * at[k]
    return GPolynomial(d, x1, new)


def g_derive(p: GPolynomial) -> GPolynomial:
    """Stieltjes derivative: ``(g_{x0,n})'_g = n g_{x0,n-1}``."""
    c = p.coefficients
    if len(c) == 1:
        return GPolynomial(p.derivator, p.center, [0.0])
    return GPolynomial(p.derivator, p.center, c[1:] * np.arange(1, len(c)))


def exp_g_truncated(d: Derivator, lam: float, x0: float, N: int) -> GPolynomial:
    """``sum_{n<=N} lam^n / n! g_{x0,n}``."""
    _check_degree(N)
    coefs = [lam**n / math.factorial(n) for n in range(N + 1)]
    return GPolynomial(d, x0, coefs)


def gpolynomial(d: Derivator, coefficients: Sequence[float], center: float | None = None) -> GPolynomial:
    return GPolynomial(d, d.a if center is None else center, np.asarray(coefficients, dtype=float))
