"""Lebesgue-Stieltjes integration against ``mu_g`` and the space ``L^2_g``.

The measure splits exactly into an absolutely continuous part
(``dg^C = slope dx`` on each linear segment of ``g^C``) and finitely many
atoms of mass ``gap_i`` at the jump abscissas. The continuous part is done
by adaptive Gauss-Legendre quadrature, or exactly when the integrand carries
a piecewise-polynomial representation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .derivator import Derivator, DerivatorError, evaluate, flat_components, gap
from .errors import NumericalError, QuadratureError
from .pwpoly import PiecewisePolynomial

log = logging.getLogger(__name__)

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
DEFAULT_TOL = 1e-10
MAX_SUBINTERVALS = 2**20


@dataclass(frozen=True)
class Integrand:
    """A vectorized scalar function on ``[a, b]``, left-continuous at jumps.

    ``exact`` optionally holds the same function as a piecewise polynomial,
    which enables closed-form integration. ``right`` optionally returns
    right-hand limits; otherwise they are extrapolated from samples.
    The evaluator must be re-entrant.
    """

    evaluator: Callable
    exact: Optional[PiecewisePolynomial] = None
    right: Optional[Callable] = None

    @classmethod
    def from_pp(cls, pp: PiecewisePolynomial) -> "Integrand":
        return cls(pp, pp, pp.right)

    def __call__(self, x):
        return self.evaluator(x)

    def __mul__(self, other: "Integrand") -> "Integrand":
        f, h = self.evaluator, other.evaluator
        exact = self.exact * other.exact if self.exact is not None and other.exact is not None else None
        right = None
        if self.right is not None and other.right is not None:
            fr, hr = self.right, other.right
            right = lambda x: fr(x) * hr(x)
        return Integrand(lambda x: f(x) * h(x), exact, right)

    def __sub__(self, other: "Integrand") -> "Integrand":
        f, h = self.evaluator, other.evaluator
        exact = self.exact - other.exact if self.exact is not None and other.exact is not None else None
        right = None
        if self.right is not None and other.right is not None:
            fr, hr = self.right, other.right
            right = lambda x: fr(x) - hr(x)
        return Integrand(lambda x: f(x) - h(x), exact, right)


def as_integrand(f) -> Integrand:
    if isinstance(f, Integrand):
        return f
    if isinstance(f, PiecewisePolynomial):
        return Integrand.from_pp(f)
    return Integrand(f, None, getattr(f, "right", None))


def gc_slopes(d: Derivator) -> np.ndarray:
    if len(d.bx) < 2:
        return np.empty(0)
    return np.diff(d.by) / np.diff(d.bx)


# quadrature -------------------------------------------------------------


def _gauss(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * GL_NODES[None, :]
    vals = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    return half * (vals @ GL_WEIGHTS)


def _adaptive(f, lo, hi, w, tol):
    """Sum of ``w_i * int_{lo_i}^{hi_i} f`` by bisection until halves agree."""
    total_weight = float(np.sum(w * (hi - lo)))
    if total_weight == 0.0:
        return 0.0
    whole = _gauss(f, lo, hi)
    result = 0.0
    count = len(lo)
    while len(lo):
        mid = 0.5 * (lo + hi)
        left = _gauss(f, lo, mid)
        right = _gauss(f, mid, hi)
        halves = left + right
        local_tol = tol * w * (hi - lo) / total_weight
        err = w * np.abs(halves - whole)
        ok = err <= np.maximum(local_tol, 64 * np.finfo(float).eps * w * np.abs(halves))
        result += float(np.sum(w[ok] * halves[ok]))
        bad = ~ok
        if not np.any(bad):
            break
        count += int(np.sum(bad))
        if count > MAX_SUBINTERVALS:
            raise QuadratureError(
                f"tolerance {tol:g} not reached within {MAX_SUBINTERVALS} subintervals"
            )
        lo = np.concatenate((lo[bad], mid[bad]))
        hi = np.concatenate((mid[bad], hi[bad]))
        w = np.concatenate((w[bad], w[bad]))
        whole = np.concatenate((left[bad], right[bad]))
    return result


def _atoms(d: Derivator, f: Integrand, c: float, e: float) -> float:
    m = (d.jx >= c) & (d.jx < e)
    if not np.any(m):
        return 0.0
    vals = np.asarray(f(d.jx[m]), dtype=float)
    return float(np.sum(vals * d.jd[m]))


def continuous_integral(d: Derivator, f, c: float, e: float, tol: float = DEFAULT_TOL, breaks=()) -> float:
    """``int_{[c,e)} f dg^C`` only."""
    f = as_integrand(f)
    if e <= c:
        return 0.0
    if f.exact is not None:
        return f.exact.integral(c, e, d.bx, gc_slopes(d))
    grid = np.union1d(d.knots, np.asarray(breaks, dtype=float))
    grid = grid[(grid > c) & (grid < e)]
    grid = np.concatenate(([c], grid, [e]))
    lo, hi = grid[:-1], grid[1:]
    slopes = gc_slopes(d)
    seg = np.clip(np.searchsorted(d.bx, 0.5 * (lo + hi)) - 1, 0, max(len(slopes) - 1, 0))
    w = slopes[seg] if len(slopes) else np.zeros(len(lo))
    keep = w > 0
    return _adaptive(f.evaluator, lo[keep], hi[keep], w[keep], tol)


def ls_integrate(d: Derivator, f, c: float, e: float, tol: float = DEFAULT_TOL, breaks=()) -> float:
    """``int_{[c,e)} f dmu_g`` = continuous part + sum of ``f(x_i) gap_i``.

    Parameters
    ----------
    breaks : sequence of float, optional
        Extra points where ``f`` is known to be non-smooth; the quadrature
        splits there.

    Raises
    ------
    QuadratureError
        If the adaptive refinement cap is hit before reaching ``tol``.
    """
    if not (d.a <= c <= e <= d.b):
        raise DerivatorError(f"need a <= c <= e <= b, got c={c}, e={e}")
    f = as_integrand(f)
    return continuous_integral(d, f, c, e, tol, breaks) + _atoms(d, f, c, e)


def l2_inner(d: Derivator, f, h, tol: float = DEFAULT_TOL) -> float:
    """``<f, h> = int_{[a,b)} f h dmu_g``."""
    return ls_integrate(d, as_integrand(f) * as_integrand(h), d.a, d.b, tol)


def l2_norm(d: Derivator, f, tol: float = DEFAULT_TOL) -> float:
    return float(np.sqrt(max(l2_inner(d, f, f, tol), 0.0)))


# plateau functions ------------------------------------------------------


def plateau_profile(lo: float, hi: float, n: int) -> Callable:
    """The ramp profile: 0 below ``lo - 1/n``, 1 on ``[lo, hi - 1/n]``, 0 above ``hi``."""
    eps = 1.0 / n

    def profile(y):
        y = np.asarray(y, dtype=float)
        up = np.clip(n * (y - (lo - eps)), 0.0, 1.0)
        down = np.clip(-n * (y - hi), 0.0, 1.0)
        # the two ramps overlap when hi - lo < 1/n; the tent keeps f continuous
        return np.minimum(up, down)

    return profile


def plateau_approx(d: Derivator, x1: float, x2: float, n: int) -> Integrand:
    """Uniformly g-continuous approximation ``f o g`` of ``1_{[x1, x2)}``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    g1, g2 = float(evaluate(d, x1)), float(evaluate(d, x2))
    if g2 - g1 <= 0:
        raise ValueError("mu_g([x1, x2)) = 0")
    profile = plateau_profile(g1, g2, n)

    def right(x):
        x = np.asarray(x, dtype=float)
        inner = np.minimum(x, np.nextafter(d.b, d.a))
        return profile(evaluate(d, x) + np.where(x < d.b, gap(d, inner), 0.0))

    return Integrand(lambda x: profile(evaluate(d, x)), None, right)


# right limits and Stieltjes derivatives ---------------------------------


def _neville_zero(h, q):
    """Value at 0 of the interpolating polynomial through ``(h_i, q_i)``; with error proxy."""
    p = list(q)
    n = len(p)
    prev = p[-1]
    for k in range(1, n):
        for i in range(n - k):
            p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i])
        if k == n - 2:
            prev = p[0]
    return p[0], abs(p[0] - prev)


def _extrapolate(sample, h0, levels=6, power=1):
    """Richardson extrapolation of ``sample(h)`` to ``h -> 0`` along ``h0 / 2^k``."""
    hs, qs = [], []
    best, best_err = None, np.inf
    for k in range(levels):
        h = h0 / 2**k
        hs.append(h**power)
        qs.append(float(sample(h)))
        if len(qs) >= 3:
            v, err = _neville_zero(hs, qs)
            if err < best_err:
                best, best_err = v, err
    if best is None:
        best, best_err = qs[-1], abs(qs[-1] - qs[-2]) if len(qs) > 1 else np.inf
    return best, best_err


def _step(d: Derivator, t: float) -> float:
    """A starting step that keeps ``[t, t + h]`` inside one linear cell."""
    knots = d.knots
    above = knots[knots > t]
    below = knots[knots < t]
    dist = [1e-2 * (d.b - d.a)]
    if len(above):
        dist.append(0.5 * (above[0] - t))
    if len(below):
        dist.append(0.5 * (t - below[-1]))
    return min(dist)


def right_limit(d: Derivator, f, x: float) -> float:
    """``f(x^+)``, exact when ``f`` knows its right limits, else extrapolated."""
    f = as_integrand(f)
    if f.right is not None:
        return float(f.right(x))
    if x >= d.b:
        raise DerivatorError("right-hand limit is undefined at b")
    knots = d.knots[d.knots > x]
    h0 = min(1e-3 * (d.b - d.a), 0.5 * ((knots[0] if len(knots) else d.b) - x))
    val, _ = _extrapolate(lambda h: f(np.array([x + h]))[0], h0, levels=5)
    return val


def stieltjes_derivative(d: Derivator, f, t: float) -> tuple[float, float]:
    """Stieltjes derivative ``f'_g(t)`` and an error estimate.

    At jumps it is the exact quotient ``(f(t^+) - f(t)) / gap(t)``. Inside a
    flat component ``(a_n, b_n)`` of ``g`` the quotient is taken at ``b_n``
    from the right. Elsewhere difference quotients in ``g`` are extrapolated
    to zero step (central where ``g^C`` is linear on both sides, one-sided
    at breakpoints and next to them).
    """
    if not (d.a <= t < d.b):
        raise DerivatorError("t must lie in [a, b)")
    f = as_integrand(f)
    for lo, hi in flat_components(d):
        if lo < t < hi or (t == lo == d.a and not np.any(d.jx == lo)):
            if hi >= d.b:
                raise NumericalError("flat component reaches b; the derivative is undefined")
            t = hi
            break
    dg = gap(d, t)
    if dg > 0:
        ft = float(f(np.array([t]))[0])
        return (right_limit(d, f, t) - ft) / dg, 0.0

    gt = float(evaluate(d, t))
    ft = float(f(np.array([t]))[0])
    h0 = _step(d, t)
    on_knot = np.any(d.knots == t) or t == d.a
    side = 1.0
    if not on_knot and h0 < 1e-6 * (d.b - d.a):
        # a knot within rounding distance: go one-sided, away from it
        above, below = d.knots[d.knots > t], d.knots[d.knots < t]
        up = (above[0] if len(above) else d.b) - t
        down = t - (below[-1] if len(below) else d.a)
        side = 1.0 if up >= down else -1.0
        h0 = 0.5 * max(up, down)
        on_knot = True

    if on_knot:
        def quotient(h):
            s = np.array([t + side * h])
            return (f(s)[0] - ft) / (evaluate(d, s)[0] - gt)

        val, err = _extrapolate(quotient, h0, levels=7, power=1)
    else:
        def quotient(h):
            s = np.array([t - h, t + h])
            fv, gv = f(s), evaluate(d, s)
            return (fv[1] - fv[0]) / (gv[1] - gv[0])

        val, err = _extrapolate(quotient, h0, levels=6, power=2)
    if not np.isfinite(val):
        raise NumericalError(f"difference quotient does not converge at t={t}")
    return float(val), float(err)
