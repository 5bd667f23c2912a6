"""Approximation of uniformly g-continuous functions by g-polynomials.

A target ``f`` is cut at the jumps of ``g`` into pieces and each piece is
written as a function ``f_j`` of ``y = g^C(x)``. A g-polynomial centered at
``a`` with classical counterpart ``p`` acts on piece ``j`` as the
differential operator ``sum_k c[j, k] p^(k)(y)`` with
``c[j, k] = g^B_k(piece j) / k!``. All backends choose ``p``; the result is
returned as the g-polynomial with the same coefficients.

Backends:

``sup_lsq``
    discrete least squares of the operator misfit at Chebyshev nodes.
``l2``
    orthogonal projection in ``L^2_g`` onto ``span{g_{a,0..m}}``.
``constructive``
    solves the chain of linear ODEs ``sum_k c[j, k] F_j^(k) = f_j`` with
    matched initial derivatives, then fits ``p^(k) ~ F_j^(k)`` jointly.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial
from numpy.polynomial import chebyshev as C
from scipy.integrate import solve_ivp

from .derivator import Derivator, DerivatorError, Piece, evaluate, flat_components, gap, pieces
from .errors import ConditioningError, NumericalError, ODEError
from .gpoly import GPolynomial, gb_monomials, monomial_closed
from .gram import Orthogonalizer, inner, _cond
from .integrate import Integrand, as_integrand, ls_integrate, right_limit
from .pwpoly import PiecewisePolynomial

log = logging.getLogger(__name__)

DEGREE_CAP = 40
FLAT_TOL = 1e-8
BACKENDS = ("sup_lsq", "l2", "constructive")


class NotGContinuousError(ValueError):
    """The target varies where ``g`` is constant."""


# targets ----------------------------------------------------------------


@dataclass(frozen=True)
class GFunction:
    """The g-continuous function ``x -> outer(g(x))``."""

    derivator: Derivator
    outer: Callable

    def __call__(self, x):
        return np.asarray(self.outer(evaluate(self.derivator, x)), dtype=float)

    def right(self, x):
        d = self.derivator
        x = np.asarray(x, dtype=float)
        inner_x = np.minimum(x, np.nextafter(d.b, d.a))
        gr = evaluate(d, x) + np.where(x < d.b, gap(d, inner_x), 0.0)
        return np.asarray(self.outer(gr), dtype=float)


@dataclass(frozen=True)
class TargetPiece:
    y_lo: float
    y_hi: float
    func: Callable  # vectorized in y

    @property
    def degenerate(self) -> bool:
        return self.y_hi == self.y_lo

    @property
    def value(self) -> float:
        return float(np.asarray(self.func(np.array([self.y_hi])))[0])

    def __call__(self, y):
        return np.asarray(self.func(np.asarray(y, dtype=float)), dtype=float)


@dataclass(frozen=True)
class PiecewiseTarget:
    """Per-piece functions of ``y = g^C(x)``; index ``j`` matches ``pieces(d)``."""

    derivator: Derivator
    pieces: tuple

    def __len__(self):
        return len(self.pieces)


def _piece_inverse(d: Derivator, piece: Piece):
    """Rightmost ``x`` in the closed piece with ``g^C(x) = y``."""
    inner_bx = d.bx[(d.bx > piece.left) & (d.bx < piece.right)]
    xs = np.concatenate(([piece.left], inner_bx, [piece.right]))
    ys = np.interp(xs, d.bx, d.by)

    def inv(y):
        y = np.clip(np.asarray(y, dtype=float), ys[0], ys[-1])
        k = np.searchsorted(ys, y, side="right") - 1
        last = k >= len(xs) - 1
        k = np.clip(k, 0, len(xs) - 2)
        dy = ys[k + 1] - ys[k]
        with np.errstate(invalid="ignore", divide="ignore"):
            x = xs[k] + np.where(dy > 0, (y - ys[k]) / np.where(dy > 0, dy, 1.0), 0.0) * (xs[k + 1] - xs[k])
        return np.where(last, xs[-1], x)

    return inv


def check_flat_constancy(d: Derivator, f, tol: float = FLAT_TOL, samples: int = 9):
    """Raise if ``f`` is not constant where ``g`` is constant."""
    for lo, hi in flat_components(d):
        xs = np.linspace(lo, hi, samples)[1:]
        vals = np.asarray(f(xs), dtype=float)
        if np.ptp(vals) > tol * max(1.0, np.max(np.abs(vals))):
            raise NotGContinuousError(f"target varies on the flat segment ({lo}, {hi}] of g")


def decompose_target(d: Derivator, f, tol: float = FLAT_TOL) -> PiecewiseTarget:
    """Split a g-continuous ``f`` into per-piece functions of ``y = g^C(x)``.

    A :class:`GFunction` decomposes exactly as ``f_j(y) = outer(y + g^B_j)``.
    Any other callable is checked for constancy on flat parts of ``g`` and
    composed with the rightmost inverse of ``g^C`` on each piece; at the
    open left end of a piece the right-hand limit of ``f`` is used.
    """
    if isinstance(f, PiecewiseTarget):
        return f
    ps = pieces(d)
    if isinstance(f, GFunction):
        out = []
        for p in ps:
            out.append(TargetPiece(p.y_lo, p.y_hi, _shifted(f.outer, p.jump_level)))
        return PiecewiseTarget(d, tuple(out))

    check_flat_constancy(d, f, tol)
    out = []
    for p in ps:
        if p.degenerate:
            v = float(np.asarray(f(np.array([p.right])))[0])
            out.append(TargetPiece(p.y_lo, p.y_hi, _constant(v)))
            continue
        inv = _piece_inverse(d, p)
        left_val = None
        if not p.closed_left:
            left_val = right_limit(d, f, p.left)
        out.append(TargetPiece(p.y_lo, p.y_hi, _composed(f, inv, p.left, left_val)))
    return PiecewiseTarget(d, tuple(out))


def _shifted(outer, shift):
    return lambda y: np.asarray(outer(np.asarray(y, dtype=float) + shift), dtype=float)


def _constant(v):
    return lambda y: np.full(np.shape(y), v)


def _composed(f, inv, left, left_val):
    def fj(y):
        x = inv(y)
        vals = np.array(f(x), dtype=float)
        if left_val is not None:
            vals = np.where(x == left, left_val, vals)
        return vals

    return fj


def target_from_samples(d: Derivator, samples: Sequence) -> PiecewiseTarget:
    """Per-piece ``[[y, f], ...]`` samples, interpolated linearly in ``y``."""
    ps = pieces(d)
    if len(samples) != len(ps):
        raise ValueError(f"expected {len(ps)} pieces of samples, got {len(samples)}")
    out = []
    for p, s in zip(ps, samples):
        arr = np.asarray(s, dtype=float).reshape(-1, 2)
        if len(arr) == 0:
            raise ValueError("empty sample piece")
        order = np.argsort(arr[:, 0], kind="stable")
        ys, fs = arr[order, 0], arr[order, 1]
        if p.degenerate:
            out.append(TargetPiece(p.y_lo, p.y_hi, _constant(float(fs[-1]))))
            continue
        if ys[0] > p.y_lo + 1e-12 or ys[-1] < p.y_hi - 1e-12:
            raise ValueError(f"samples of piece {p.index} do not cover [{p.y_lo}, {p.y_hi}]")
        out.append(TargetPiece(p.y_lo, p.y_hi, lambda y, ys=ys, fs=fs: np.interp(y, ys, fs)))
    return PiecewiseTarget(d, tuple(out))


# jump coefficients ------------------------------------------------------


@dataclass(frozen=True)
class JumpCoefficients:
    """``matrix[j, k] = g^B_k(piece j) / k!``; row ``j`` is the operator on piece ``j``."""

    matrix: np.ndarray

    @property
    def n_pieces(self) -> int:
        return self.matrix.shape[0]

    def row(self, j: int) -> np.ndarray:
        return self.matrix[j]

    def system_matrix(self) -> np.ndarray:
        """``matrix[j, k] * k!``: the map from ``(a_0, .., a_m)`` to values at ``y = 0``."""
        fact = np.array([math.factorial(k) for k in range(self.matrix.shape[1])], dtype=float)
        return self.matrix * fact


def jump_coefficients(d: Derivator, max_degree: Optional[int] = None) -> JumpCoefficients:
    n = len(pieces(d))
    ncols = n if max_degree is None else min(n, max_degree + 1)
    table = gb_monomials(d, d.a, max(ncols - 1, 0))
    fact = np.array([math.factorial(k) for k in range(ncols)], dtype=float)
    mat = (table.values[:ncols].T / fact).copy()
    mat.setflags(write=False)
    return JumpCoefficients(mat)


# polynomial basis -------------------------------------------------------


def _basis_domain(targets: PiecewiseTarget):
    top = max(p.y_hi for p in targets.pieces)
    return np.array([0.0, top]) if top > 0 else np.array([-1.0, 1.0])


def _basis_derivatives(y, degree: int, kmax: int, dom) -> np.ndarray:
    """``out[k, i, j] = T_j^(k)(y_i)`` for the Chebyshev basis mapped to ``dom``."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    u = (2 * y - (dom[0] + dom[1])) / (dom[1] - dom[0])
    scl = 2.0 / (dom[1] - dom[0])
    eye = np.eye(degree + 1)
    out = np.zeros((kmax + 1, len(y), degree + 1))
    for k in range(kmax + 1):
        if k > degree:
            break
        coefs = C.chebder(eye, m=k, scl=scl, axis=0) if k else eye
        out[k] = C.chebval(u, coefs).T
    return out


def _cheb_nodes(lo: float, hi: float, m: int) -> np.ndarray:
    """Chebyshev points of the second kind on ``[lo, hi]`` (endpoints included)."""
    if m == 1:
        return np.array([0.5 * (lo + hi)])
    t = np.cos(np.pi * np.arange(m) / (m - 1))[::-1]
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * t


def _to_alpha(coef: np.ndarray, dom, degree: int) -> np.ndarray:
    """Chebyshev coefficients on ``dom`` to power coefficients in ``y``."""
    poly = Chebyshev(coef, domain=dom).convert(kind=Polynomial)
    alpha = np.zeros(degree + 1)
    alpha[: len(poly.coef)] = poly.coef[: degree + 1]
    return alpha


def _operator_values(alpha: np.ndarray, crow: np.ndarray, y) -> np.ndarray:
    p = Polynomial(alpha)
    total = np.zeros(np.shape(y))
    for k, ck in enumerate(crow):
        if ck != 0.0:
            total = total + ck * p(y)
        p = p.deriv()
    return total


# results ----------------------------------------------------------------


@dataclass
class ApproxResult:
    poly: GPolynomial
    backend: str
    per_piece: list
    sup_error: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def alpha(self) -> np.ndarray:
        return np.asarray(self.poly.coefficients)

    def to_json(self) -> dict:
        diag = {}
        for k, v in self.diagnostics.items():
            if isinstance(v, (np.floating, np.integer)):
                v = v.item()
            if isinstance(v, float) and not math.isfinite(v):
                v = None
            diag[k] = v
        return {
            "alpha": [float(a) for a in self.alpha],
            "center": self.poly.center,
            "sup_error": float(self.sup_error),
            "per_piece": [float(e) for e in self.per_piece],
            "backend": self.backend,
            "diagnostics": diag,
        }


def piece_residuals(targets: PiecewiseTarget, c: JumpCoefficients, alpha, grid_n: int = 257) -> list:
    """Sup over each piece of ``|sum_k c[j,k] p^(k)(y) - f_j(y)|`` on a dense grid."""
    out = []
    for j, tp in enumerate(targets.pieces):
        y = np.array([tp.y_hi]) if tp.degenerate else np.linspace(tp.y_lo, tp.y_hi, grid_n)
        crow = c.row(j)
        r = np.abs(_operator_values(alpha, crow, y) - tp(y))
        out.append(float(np.max(r)))
    return out


def _check_degree(degree: int):
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    if degree > DEGREE_CAP:
        raise ValueError(f"degree above the cap {DEGREE_CAP}")


def _lstsq(A, rhs):
    colnorm = np.linalg.norm(A, axis=0)
    colnorm[colnorm == 0] = 1.0
    sol, _, rank, sv = np.linalg.lstsq(A / colnorm, rhs, rcond=None)
    cond = float(sv[0] / sv[-1]) if len(sv) and sv[-1] > 0 else math.inf
    return sol / colnorm, int(rank), cond


def fit_sup_lsq(
    targets: PiecewiseTarget,
    c: JumpCoefficients,
    degree: int,
    samples_per_piece: Optional[int] = None,
) -> ApproxResult:
    """Least-squares fit of all piece operators at once.

    Nondegenerate pieces contribute rows at ``samples_per_piece`` Chebyshev
    nodes; degenerate pieces one row each, weighted by the mean row norm of
    the others.

    Raises
    ------
    ConditioningError
        If the design matrix is rank deficient, or when only degenerate
        pieces are present and the system is inconsistent.
    """
    _check_degree(degree)
    m = samples_per_piece or 4 * (degree + 1)
    dom = _basis_domain(targets)
    rows, rhs, degen = [], [], []
    for j, tp in enumerate(targets.pieces):
        crow = c.row(j)
        kmax = min(len(crow) - 1, degree)
        y = np.array([tp.y_hi]) if tp.degenerate else _cheb_nodes(tp.y_lo, tp.y_hi, m)
        D = _basis_derivatives(y, degree, kmax, dom)
        block = np.tensordot(crow[: kmax + 1], D, axes=(0, 0))
        rows.append(block)
        rhs.append(tp(y))
        degen.append(np.full(len(y), tp.degenerate))
    A = np.vstack(rows)
    b = np.concatenate(rhs)
    degen = np.concatenate(degen)
    if np.any(~degen) and np.any(degen):
        w = float(np.mean(np.linalg.norm(A[~degen], axis=1)))
        w = w / max(float(np.mean(np.linalg.norm(A[degen], axis=1))), 1e-300)
        A[degen] *= w
        b[degen] *= w
    coef, rank, cond = _lstsq(A, b)
    alpha = _to_alpha(coef, dom, degree)
    if rank < A.shape[1]:
        raise ConditioningError(f"rank-deficient design matrix (rank {rank} < {A.shape[1]}, cond {cond:.3g})")
    per = piece_residuals(targets, c, alpha)
    if np.all(degen) and A.shape[0] >= A.shape[1] and max(per) > 1e-8 * max(1.0, float(np.max(np.abs(b)))):
        raise ConditioningError(f"inconsistent degenerate-only system (residual {max(per):.3g})")
    poly = GPolynomial(targets.derivator, targets.derivator.a, alpha)
    return ApproxResult(poly, "sup_lsq", per, max(per), {"rank": rank, "columns": A.shape[1], "cond": cond})


# L^2_g projection -------------------------------------------------------


def _as_function(f):
    if isinstance(f, PiecewisePolynomial):
        return Integrand.from_pp(f)
    return as_integrand(f)


def fit_l2_projection(d: Derivator, f, degree: int, cond_limit: float = 1e12) -> ApproxResult:
    """Orthogonal projection of ``f`` onto ``span{g_{a,0..degree}}`` in ``L^2_g``.

    Solves the normal equations when the Gram matrix is well conditioned and
    falls back to modified Gram-Schmidt otherwise (with a warning).
    """
    _check_degree(degree)
    f = _as_function(f)
    table = gb_monomials(d, d.a, degree)
    fam = [monomial_closed(d, d.a, n, table) for n in range(degree + 1)]
    G = np.empty((degree + 1, degree + 1))
    for i in range(degree + 1):
        for j in range(i, degree + 1):
            G[i, j] = G[j, i] = inner(d, fam[i], fam[j])
    cond = _cond(G)
    method = "normal_equations"
    if cond <= cond_limit:
        rhs = np.array([ls_integrate(d, f * Integrand.from_pp(q), d.a, d.b) for q in fam])
        alpha = np.linalg.solve(G, rhs)
    else:
        warnings.warn(
            f"Gram conditioning {cond:.3g} above {cond_limit:.0e}; using orthogonalized basis",
            RuntimeWarning,
            stacklevel=2,
        )
        method = "gram_schmidt"
        orth = Orthogonalizer(d)
        eye = np.eye(degree + 1)
        for n in range(degree + 1):
            orth.add(fam[n], eye[n])
        alpha, _ = orth.project_coefficients(f, degree + 1)
    poly = GPolynomial(d, d.a, alpha)
    resid = f - Integrand.from_pp(poly.to_pp())
    l2 = math.sqrt(max(ls_integrate(d, resid * resid, d.a, d.b), 0.0))
    per = sup_error_per_piece(d, f, poly)
    return ApproxResult(poly, "l2", per, max(per), {"l2_error": l2, "gram_cond": cond, "method": method})


# ODE chain --------------------------------------------------------------


@dataclass
class ChainPiece:
    """``F_j`` on one piece: ``derivatives(y)[k]`` is ``F_j^(k)(y)`` for ``k <= order``."""

    y_lo: float
    y_hi: float
    order: int
    derivatives: Callable
    local_error: float = 0.0

    def __call__(self, y):
        return self.derivatives(np.atleast_1d(np.asarray(y, dtype=float)))[0]


def ode_chain(
    targets: PiecewiseTarget, c: JumpCoefficients, rtol: float = 1e-11, atol: float = 1e-12
) -> list[ChainPiece]:
    """Solve ``sum_{k<=j} c[j,k] F_j^(k) = f_j`` piece by piece.

    ``F_0 = f_0``; each ``F_j`` starts from the derivatives ``0..j-1`` of
    ``F_{j-1}`` at the shared endpoint. The companion system is integrated
    with an adaptive Runge-Kutta method (DOP853); the top derivative comes
    from the equation itself.

    Raises
    ------
    ODEError
        If the integrator fails (e.g. step size underflow).
    """
    out: list[ChainPiece] = []
    prev_state = None  # derivatives 0..j-1 at the left end of piece j
    for j, tp in enumerate(targets.pieces):
        crow = np.asarray(c.row(j), dtype=float)
        order = j
        if order >= len(crow) or crow[order] == 0.0:
            order = int(np.max(np.nonzero(crow)[0])) if np.any(crow) else 0
        lead = crow[order]
        f = tp

        if order == 0:
            def derivs(y, f=f):
                return np.atleast_2d(f(y))

            piece = ChainPiece(tp.y_lo, tp.y_hi, 0, derivs)
        elif tp.degenerate:
            state = np.asarray(prev_state[:order], dtype=float)
            top = (tp.value - np.dot(crow[:order], state)) / lead
            vec = np.concatenate((state, [top]))

            def derivs(y, vec=vec):
                return np.repeat(vec[:, None], len(np.atleast_1d(y)), axis=1)

            piece = ChainPiece(tp.y_lo, tp.y_hi, order, derivs)
        else:
            y0 = np.asarray(prev_state[:order], dtype=float)
            coeffs = crow[:order]

            def rhs(y, z, f=f, coeffs=coeffs, lead=lead):
                dz = np.empty_like(z)
                dz[:-1] = z[1:]
                dz[-1] = (f(np.array([y]))[0] - np.dot(coeffs, z)) / lead
                return dz

            sol = solve_ivp(
                rhs, (tp.y_lo, tp.y_hi), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=True
            )
            if not sol.success:
                raise ODEError(f"piece {j}: {sol.message}")

            def derivs(y, sol=sol, f=f, coeffs=coeffs, lead=lead):
                y = np.atleast_1d(np.asarray(y, dtype=float))
                z = sol.sol(y)
                top = (f(y) - coeffs @ z) / lead
                return np.vstack((z, top))

            piece = ChainPiece(tp.y_lo, tp.y_hi, order, derivs, local_error=rtol)
        out.append(piece)
        prev_state = piece.derivatives(np.array([tp.y_hi]))[:, 0]
    return out


# Hermite interpolation --------------------------------------------------


def hermite_interpolate(y_left: float, y_right: float, v: Sequence[float], w: Sequence[float]) -> Polynomial:
    """Degree ``2n-1`` polynomial with ``p^(k)(y_left) = v[k]``, ``p^(k)(y_right) = w[k]``.

    Built from divided differences on repeated nodes in the local variable
    ``t = (y - y_left) / (y_right - y_left)``; the returned polynomial maps
    ``[y_left, y_right]`` onto that window (``.convert()`` gives plain powers
    of ``y``). The result is checked against all ``2n`` conditions, each
    relative to the size of the data at its derivative order.
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    n = len(v)
    if len(w) != n or n == 0:
        raise ValueError("v and w must be nonempty and of equal length")
    if not y_left < y_right:
        raise ValueError("degenerate interval")
    # work in t = (y - y_left) / h on [0, 1]; derivatives scale by h^k
    h = y_right - y_left
    scale = h ** np.arange(n)
    z = np.array([0.0] * n + [1.0] * n)
    data = [v * scale] * n + [w * scale] * n
    m = 2 * n
    Q = np.zeros((m, m))
    Q[:, 0] = [dv[0] for dv in data]
    for j in range(1, m):
        for i in range(j, m):
            if z[i] == z[i - j]:
                Q[i, j] = data[i][j] / math.factorial(j)
            else:
                Q[i, j] = (Q[i, j - 1] - Q[i - 1, j - 1]) / (z[i] - z[i - j])
    t = Polynomial([Q[m - 1, m - 1]])
    for i in range(m - 2, -1, -1):
        t = t * Polynomial([-z[i], 1.0]) + Q[i, i]
    p = Polynomial(t.coef, domain=[y_left, y_right], window=[0.0, 1.0])
    # the k-th derivative is only as accurate as the data seen at that scale
    data_scale = max(np.max(np.abs(v * scale)), np.max(np.abs(w * scale)))
    for k in range(n):
        dk = p.deriv(k) if k else p
        for target, y in ((v[k], y_left), (w[k], y_right)):
            got = dk(y)
            if abs(got - target) > 1e-9 * max(1.0, abs(target), data_scale / h**k):
                raise NumericalError(f"Hermite condition of order {k} missed at {y}: {got} vs {target}")
    return p


# constructive backend ---------------------------------------------------


def fit_constructive(
    targets: PiecewiseTarget,
    c: JumpCoefficients,
    degree: int,
    samples_per_piece: Optional[int] = None,
) -> ApproxResult:
    """ODE chain followed by a joint fit of ``p^(k)`` to ``F_j^(k)``, ``k <= j``.

    Derivative rows keep their natural scale, which matches how derivative
    errors enter the piece operators.
    """
    _check_degree(degree)
    m = samples_per_piece or 4 * (degree + 1)
    chain = ode_chain(targets, c)
    dom = _basis_domain(targets)
    blocks: dict[int, tuple[list, list]] = {}
    for j, (tp, cp) in enumerate(zip(targets.pieces, chain)):
        y = np.array([tp.y_hi]) if tp.degenerate else _cheb_nodes(tp.y_lo, tp.y_hi, m)
        kmax = cp.order
        D = _basis_derivatives(y, degree, kmax, dom)
        F = cp.derivatives(y)
        for k in range(kmax + 1):
            rows, rhs = blocks.setdefault(k, ([], []))
            rows.append(D[k])
            rhs.append(F[k])
    A = np.vstack([np.vstack(blocks[k][0]) for k in sorted(blocks)])
    b = np.concatenate([np.concatenate(blocks[k][1]) for k in sorted(blocks)])
    coef, rank, cond = _lstsq(A, b)
    alpha = _to_alpha(coef, dom, degree)
    per = piece_residuals(targets, c, alpha)
    poly = GPolynomial(targets.derivator, targets.derivator.a, alpha)
    return ApproxResult(poly, "constructive", per, max(per), {"rank": rank, "columns": A.shape[1], "cond": cond})


# sup-norm error ---------------------------------------------------------


def _piece_points(d: Derivator, p: Piece, grid_n: int):
    """x-points of a piece from a y-grid, and whether each is a right limit."""
    if p.degenerate:
        xs = [p.right]
        rl = [False]
        if not p.closed_left:
            xs.append(p.left)
            rl.append(True)
        return np.array(xs), np.array(rl)
    y = np.linspace(p.y_lo, p.y_hi, grid_n)
    x = _piece_inverse(d, p)(y)
    rl = np.zeros(len(x), dtype=bool)
    if not p.closed_left:
        rl = x == p.left
    return x, rl


def sup_error_per_piece(d: Derivator, f, poly: GPolynomial, grid_n: int = 200) -> list:
    f = _as_function(f)
    out = []
    for p in pieces(d):
        x, rl = _piece_points(d, p, grid_n)
        fx = np.asarray(f(x), dtype=float).copy()
        px = np.asarray(poly(x), dtype=float).copy()
        if np.any(rl):
            xl = x[rl][0]
            fx[rl] = right_limit(d, f, xl)
            px[rl] = poly.right(xl)
        out.append(float(np.max(np.abs(fx - px))))
    return out


def sup_error(d: Derivator, f, p: GPolynomial, grid_n: int = 200) -> float:
    """``max |f - p_g|`` on ``grid_n`` points per piece, right limits at jumps included."""
    return max(sup_error_per_piece(d, f, p, grid_n))


def approximate(
    d: Derivator,
    f,
    degree: int,
    backend: str = "sup_lsq",
    samples_per_piece: Optional[int] = None,
) -> ApproxResult:
    """Fit ``f`` with the chosen backend and report the x-space sup error too."""
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "l2":
        if isinstance(f, PiecewiseTarget):
            raise ValueError("the l2 backend needs a function on [a, b]")
        return fit_l2_projection(d, f, degree)
    targets = decompose_target(d, f)
    c = jump_coefficients(d)
    if backend == "sup_lsq":
        res = fit_sup_lsq(targets, c, degree, samples_per_piece)
    else:
        res = fit_constructive(targets, c, degree, samples_per_piece)
    if not isinstance(f, PiecewiseTarget):
        res.diagnostics["x_sup_error"] = sup_error(d, f, res.poly)
    return res


# piecewise g-linear interpolation ---------------------------------------


def partition_by_oscillation(d: Derivator, delta: float) -> np.ndarray:
    """Greedy partition with ``g(x_i) - g(x_{i-1}^+) <= delta``.

    ``x_{i+1} = max {z : g(z) <= g(x_i^+) + delta}``. Every step except the
    last raises ``g(x^+)`` by at least ``delta``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    pts = [d.a]
    while pts[-1] < d.b:
        pts.append(_max_below(d, pts[-1], delta))
    return np.array(pts)


def _max_below(d: Derivator, start: float, delta: float) -> float:
    knots = d.knots
    cur = start
    gcur = float(evaluate(d, start) + gap(d, start))
    level = gcur + delta
    # absorb rounding drift so the last step lands on b instead of just short of it
    if float(evaluate(d, d.b)) <= level + 1e-12 * max(1.0, abs(level)):
        return float(d.b)
    for s in knots[knots > start]:
        gs = float(evaluate(d, s))
        if gs > level:
            return float(cur + (level - gcur) / (gs - gcur) * (s - cur))
        if s >= d.b:
            return float(d.b)
        gsr = gs + float(gap(d, s))
        if gsr > level:
            return float(s)
        cur, gcur = s, gsr
    return float(d.b)


def g_linear_interpolant(d: Derivator, f, partition) -> Integrand:
    """Interpolant that is affine in ``g`` between partition points.

    On ``(x_{i-1}, x_i]`` it runs from ``f(x_{i-1}^+)`` to ``f(x_i)``
    linearly in ``g``, and is constant when that stretch has null measure.
    """
    part = np.asarray(partition, dtype=float)
    if part.ndim != 1 or len(part) < 2 or np.any(np.diff(part) <= 0):
        raise ValueError("partition must be strictly increasing with at least two points")
    if part[0] != d.a or part[-1] != d.b:
        raise ValueError("partition must start at a and end at b")
    f = _as_function(f)
    fx = np.asarray(f(part), dtype=float)
    fr = np.array([right_limit(d, f, x) for x in part[:-1]])
    gx = np.asarray(evaluate(d, part), dtype=float)
    gr = gx[:-1] + np.asarray(gap(d, part[:-1]), dtype=float)
    span = gx[1:] - gr
    slope = np.where(span > 0, (fx[1:] - fr) / np.where(span > 0, span, 1.0), 0.0)

    def _value(x, gvals, cell):
        return np.where(span[cell] > 0, fr[cell] + (gvals - gr[cell]) * slope[cell], fr[cell])

    def L(x):
        x = np.asarray(x, dtype=float)
        cell = np.clip(np.searchsorted(part, x, side="left") - 1, 0, len(part) - 2)
        out = _value(x, evaluate(d, x), cell)
        return np.where(x == part[0], fx[0], out)

    def L_right(x):
        x = np.asarray(x, dtype=float)
        cell = np.clip(np.searchsorted(part, x, side="right") - 1, 0, len(part) - 2)
        inner_x = np.minimum(x, np.nextafter(d.b, d.a))
        g_plus = evaluate(d, x) + np.where(x < d.b, gap(d, inner_x), 0.0)
        return _value(x, g_plus, cell)

    return Integrand(L, None, L_right)


def sampled_modulus(d: Derivator, f, delta: float, xs) -> float:
    """``max |f(s) - f(t)|`` over sample pairs with ``|g(s) - g(t)| <= delta``.

    Samples are the given points plus right-hand limits at every sample
    point below ``b``.
    """
    f = _as_function(f)
    xs = np.unique(np.asarray(xs, dtype=float))
    gv = np.asarray(evaluate(d, xs), dtype=float)
    fv = np.asarray(f(xs), dtype=float)
    inner_x = xs[xs < d.b]
    gr = gv[: len(inner_x)] + np.asarray(gap(d, inner_x), dtype=float)
    fr = np.array([right_limit(d, f, x) for x in inner_x])
    G = np.concatenate((gv, gr))
    F = np.concatenate((fv, fr))
    close = np.abs(G[:, None] - G[None, :]) <= delta
    return float(np.max(np.where(close, np.abs(F[:, None] - F[None, :]), 0.0)))
