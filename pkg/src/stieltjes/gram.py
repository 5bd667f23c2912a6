"""Gram matrices of g-monomial families in ``L^2_g`` and density diagnostics.

Distances to spans are computed by modified Gram-Schmidt (with one
re-orthogonalization pass) on the exact piecewise-polynomial monomials.
Determinants are kept as a cross-check only: Gram matrices of monomials are
Hilbert-like and lose all digits in double precision around ``k ~ 12``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import lapack

from .derivator import Derivator, DerivatorError, evaluate, gap, level_set_max, measure
from .gpoly import gb_monomials, monomial_closed
from .integrate import Integrand, ls_integrate
from .pwpoly import PiecewisePolynomial

log = logging.getLogger(__name__)

KMAX_DEFAULT = 20
KMAX_CAP = 30
UNRELIABLE_COND = 1e12
AGREEMENT_COND = 1e10


def _check_k(k: int):
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > KMAX_CAP:
        raise OverflowError(f"k above {KMAX_CAP} is refused")


def monomial_family(d: Derivator, x0: float, k: int) -> list[PiecewisePolynomial]:
    """``[g_{x0,0}, ..., g_{x0,k}]`` as exact piecewise polynomials."""
    table = gb_monomials(d, x0, k)
    return [monomial_closed(d, x0, n, table) for n in range(k + 1)]


def inner(d: Derivator, u: PiecewisePolynomial, v: PiecewisePolynomial) -> float:
    return ls_integrate(d, Integrand.from_pp(u * v), d.a, d.b)


def gram_matrix(d: Derivator, x0: float, k: int, include_constant: bool = True) -> np.ndarray:
    """Gram matrix of ``(1, g_{x0,1}, ..., g_{x0,k})`` (or without the constant)."""
    _check_k(k)
    fam = monomial_family(d, x0, k)
    if not include_constant:
        fam = fam[1:]
    n = len(fam)
    G = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            G[i, j] = G[j, i] = inner(d, fam[i], fam[j])
    return G


@dataclass(frozen=True)
class Determinant:
    value: float
    logdet: float
    singular: bool


def gram_det(matrix) -> Determinant:
    """Determinant by pivoted Cholesky; singular (semi)definite input gives 0."""
    G = np.asarray(matrix, dtype=float)
    n = G.shape[0]
    if n == 0:
        return Determinant(1.0, 0.0, False)
    c, piv, rank, info = lapack.dpstrf(G, lower=1)
    if info < 0:
        raise ValueError("invalid matrix")
    if rank < n:
        return Determinant(0.0, -math.inf, True)
    diag = np.diag(c)
    logdet = float(2.0 * np.sum(np.log(diag)))
    return Determinant(float(np.exp(logdet)), logdet, False)


# orthogonalization ------------------------------------------------------


@dataclass
class Orthogonalizer:
    """Incremental modified Gram-Schmidt in ``L^2_g`` on exact functions.

    Vectors whose residual norm falls below ``null_tol`` (relative to their
    original norm, or absolutely when that is zero) are treated as lying in
    the current span and skipped.
    """

    d: Derivator
    null_tol: float = 1e-12
    basis: list = field(default_factory=list)  # orthonormal PiecewisePolynomials
    coords: list = field(default_factory=list)  # coefficient vectors over the input family

    def add(self, v: PiecewisePolynomial, coord: np.ndarray) -> bool:
        norm0 = math.sqrt(max(inner(self.d, v, v), 0.0))
        w, c = v, np.array(coord, dtype=float)
        for _ in range(2):
            for q, qc in zip(self.basis, self.coords):
                r = inner(self.d, q, w)
                w = w - r * q
                c = c - r * qc
        nrm = math.sqrt(max(inner(self.d, w, w), 0.0))
        if nrm <= self.null_tol * max(norm0, 1e-300) or nrm == 0.0:
            return False
        self.basis.append(w / nrm)
        self.coords.append(c / nrm)
        return True

    def project_coefficients(self, f, size: int) -> tuple[np.ndarray, list[float]]:
        """Coefficients of the orthogonal projection of ``f`` and the ``<f, q_i>``."""
        alpha = np.zeros(size)
        coefs = []
        for q, qc in zip(self.basis, self.coords):
            r = ls_integrate(self.d, _product(f, q), self.d.a, self.d.b)
            coefs.append(r)
            alpha[: len(qc)] += r * qc
        return alpha, coefs


def _product(f, q: PiecewisePolynomial) -> Integrand:
    if isinstance(f, PiecewisePolynomial):
        return Integrand.from_pp(f * q)
    if isinstance(f, Integrand):
        return f * Integrand.from_pp(q)
    return Integrand(lambda x: f(x) * q(x))


# ratio sequence ---------------------------------------------------------


@dataclass(frozen=True)
class GramReport:
    center: float
    kmax: int
    gram_with_constant: np.ndarray
    gram_without_constant: np.ndarray
    ratios: np.ndarray  # r_1..r_kmax, distance based
    det_ratios: np.ndarray  # determinant based (nan when undefined)
    flags: tuple  # k where the two disagree beyond 1e-6 while well conditioned
    beta: float
    limit: float  # gap(beta)
    conditioning: np.ndarray  # cond of the Gram matrix with constant, per k
    indicator_distances: np.ndarray | None = None

    def to_json(self) -> dict:
        def clean(a):
            return [None if not np.isfinite(v) else float(v) for v in np.ravel(a)]

        return {
            "center": self.center,
            "kmax": self.kmax,
            "gram_with_constant": [clean(r) for r in self.gram_with_constant],
            "gram_without_constant": [clean(r) for r in self.gram_without_constant],
            "ratios": clean(self.ratios),
            "det_ratios": clean(self.det_ratios),
            "flags": list(self.flags),
            "beta": self.beta,
            "limit": self.limit,
            "conditioning": clean(self.conditioning),
            "indicator_distances": None if self.indicator_distances is None else clean(self.indicator_distances),
        }


def _cond(G):
    if G.size == 0:
        return 1.0
    ev = np.linalg.eigvalsh(G)
    if ev[0] <= 0:
        return math.inf
    return float(ev[-1] / ev[0])


def distance_sequence(d: Derivator, x0: float, kmax: int) -> np.ndarray:
    """``r_k = dist(1, span{g_{x0,1..k}})^2`` for ``k = 0..kmax``."""
    fam = monomial_family(d, x0, kmax)
    orth = Orthogonalizer(d)
    one = fam[0]
    total = inner(d, one, one)
    out = [total]
    acc = total
    for n in range(1, kmax + 1):
        if orth.add(fam[n], np.eye(kmax + 1)[n]):
            r = inner(d, orth.basis[-1], one)
            acc = acc - r * r
        out.append(max(acc, 0.0))
    return np.array(out)


def ratio_sequence(d: Derivator, x0: float, kmax: int = KMAX_DEFAULT, with_indicator: bool = False) -> GramReport:
    """Distances of the constant 1 to ``span{g_{x0,1..k}}``, k = 1..kmax.

    Raises
    ------
    ValueError
        If every ``g_{x0,1..kmax}`` is null in ``L^2_g``.
    """
    _check_k(kmax)
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    dist = distance_sequence(d, x0, kmax)
    G = gram_matrix(d, x0, kmax, include_constant=True)
    if np.allclose(G[1:, 1:], 0.0, atol=0.0):
        raise ValueError("all g_{x0,k} vanish in L^2_g")
    ratios = dist[1:]
    det_ratios = np.full(kmax, np.nan)
    conds = np.empty(kmax)
    flags = []
    for k in range(1, kmax + 1):
        Gk = G[: k + 1, : k + 1]
        conds[k - 1] = _cond(Gk)
        num, den = gram_det(Gk), gram_det(Gk[1:, 1:])
        if not den.singular and not num.singular:
            det_ratios[k - 1] = math.exp(num.logdet - den.logdet)
        elif num.singular and not den.singular:
            det_ratios[k - 1] = 0.0
        if conds[k - 1] < AGREEMENT_COND and np.isfinite(det_ratios[k - 1]):
            ref = max(abs(ratios[k - 1]), 1e-300)
            if abs(det_ratios[k - 1] - ratios[k - 1]) > 1e-6 * ref:
                flags.append(k)
    if np.any(conds > UNRELIABLE_COND):
        log.info("determinant ratios unreliable beyond k=%d", int(np.argmax(conds > UNRELIABLE_COND)) + 1)
    beta = level_set_max(d, x0)
    limit = float(gap(d, beta)) if beta < d.b else 0.0
    ind = None
    if with_indicator and limit > 0 and beta == x0:
        ind = indicator_distances(d, x0, kmax)
    return GramReport(
        center=float(x0),
        kmax=kmax,
        gram_with_constant=G,
        gram_without_constant=G[1:, 1:],
        ratios=ratios,
        det_ratios=det_ratios,
        flags=tuple(flags),
        beta=beta,
        limit=limit,
        conditioning=conds,
        indicator_distances=ind,
    )


def indicator_distances(d: Derivator, x0: float, kmax: int) -> np.ndarray:
    """Squared distances of ``1_{x0}`` to ``span{1, g_{x0,1..k}}`` for k = 0..kmax."""
    dg = float(gap(d, x0)) if x0 < d.b else 0.0
    if dg <= 0:
        raise ValueError("x0 is not a jump of g")
    fam = monomial_family(d, x0, kmax)
    orth = Orthogonalizer(d)
    acc = dg
    out = []
    for n in range(kmax + 1):
        if orth.add(fam[n], np.eye(kmax + 1)[n]):
            q = orth.basis[-1]
            r = float(q(x0)) * dg  # <1_{x0}, q>
            acc = acc - r * r
        out.append(max(acc, 0.0))
    return np.array(out)


def indicator_distance(d: Derivator, x0: float, k: int) -> float:
    """``dist(1_{x0}, span{1, g_{x0,1..k}})^2``; ``x0`` must be a jump."""
    _check_k(k)
    return float(indicator_distances(d, x0, k)[k])


# Hilbert closed form ----------------------------------------------------


def hilbert_det(n: int) -> Fraction:
    """``H_n = c_n^4 / c_{2n}`` with ``c_n = prod_{i<n} i!``."""

    def c(m):
        out = 1
        for i in range(m):
            out *= math.factorial(i)
        return out

    return Fraction(c(n) ** 4, c(2 * n))


def hilbert_check(d: Derivator, k: int, x0: float | None = None) -> tuple[float, float]:
    """``(gram(1, g_{x0,1..k}), (g(b)-g(a))^{(k+1)^2} H_{k+1})`` for continuous ``g``."""
    if not d.is_continuous:
        raise DerivatorError("hilbert_check needs a derivator without jumps")
    _check_k(k)
    G = gram_matrix(d, d.a if x0 is None else x0, k, include_constant=True)
    lhs = gram_det(G).value
    total = measure(d, d.a, d.b)
    rhs = total ** ((k + 1) ** 2) * float(hilbert_det(k + 1))
    return lhs, rhs
