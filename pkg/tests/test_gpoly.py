import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import Chebyshev

from stieltjes.derivator import evaluate, make_derivator
from stieltjes.gpoly import (
    GPolynomial,
    evaluate_gpoly,
    evaluate_gpoly_right,
    evaluate_monomial_sum,
    exp_g_truncated,
    g_derive,
    gb_monomials,
    gpolynomial,
    monomial_closed,
    monomial_recursive,
    recenter,
)
from stieltjes.integrate import Integrand, stieltjes_derivative

from conftest import derivators, random_derivator


def brute_gb(d, x0, n, x):
    """Jump monomial from the recursion over atoms, evaluated point by point."""
    if n == 0:
        return 1.0
    if x >= x0:
        sel = (d.jx >= x0) & (d.jx < x)
        return n * sum(brute_gb(d, x0, n - 1, t) * v for t, v in zip(d.jx[sel], d.jd[sel]))
    sel = (d.jx >= x) & (d.jx < x0)
    return -n * sum(brute_gb(d, x0, n - 1, t) * v for t, v in zip(d.jx[sel], d.jd[sel]))


def test_jump_table_pure_jump(B):
    t = gb_monomials(B, 0.0, 4)
    assert t.values[1].tolist() == [0, 1, 2, 3]
    assert t.values[2].tolist() == [0, 0, 2, 6]
    assert t.values[3].tolist() == [0, 0, 0, 6]
    assert t.values[4].tolist() == [0, 0, 0, 0]


@settings(max_examples=40, deadline=None)
@given(derivators(), st.floats(0, 1), st.integers(0, 5))
def test_jump_table_matches_brute_recursion(d, x0, n):
    t = gb_monomials(d, x0, n)
    for x in np.linspace(0, 1, 23):
        assert t.at(d, n, x) == pytest.approx(brute_gb(d, x0, n, x), abs=1e-12)


def test_monomial_examples(A, C):
    assert monomial_closed(A, 0, 2)(0.75) == pytest.approx(2.0625, abs=1e-14)
    assert monomial_closed(C, 0, 3)(0.4) == pytest.approx(0.064, abs=1e-15)
    assert np.all(monomial_closed(A, 0.3, 0)(np.linspace(0, 1, 11)) == 1.0)


def test_recursive_examples(A, C):
    assert monomial_recursive(A, 0, 2)(np.array([0.75]))[0] == pytest.approx(2.0625, abs=1e-8)
    assert monomial_recursive(A, 0, 1)(np.array([0.3]))[0] == pytest.approx(0.3, abs=1e-12)
    assert monomial_recursive(C, 1, 1)(np.array([0.0]))[0] == pytest.approx(-1.0, abs=1e-12)


def test_degree_guard(A):
    with pytest.raises(OverflowError):
        gb_monomials(A, 0, 61)


@settings(max_examples=40, deadline=None)
@given(derivators(), st.floats(0, 1))
def test_sign_laws(d, x0):
    xs = np.linspace(0, 1, 101)
    for n in range(7):
        v = monomial_closed(d, x0, n)(xs)
        scale = 1e-12 * (1 + np.max(np.abs(v)))
        right, left = v[xs >= x0], v[xs <= x0]
        assert np.all(right >= -scale)
        if n % 2 == 0:
            assert np.all(left >= -scale)
        else:
            assert np.all(left <= scale)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_nilpotency(seed, x0):
    rng = np.random.default_rng(seed)
    nj = int(rng.integers(1, 6))
    jx = np.sort(rng.choice(np.arange(100), nj, replace=False)) / 100
    d = make_derivator((0, 1), [(0, 0), (1, 0)], np.column_stack((jx, rng.uniform(0.1, 2, nj))))
    for x in np.linspace(x0, 1, 17):
        m = int(np.sum((d.jx >= x0) & (d.jx < x)))
        for n in range(m + 1, 8):
            assert monomial_closed(d, x0, n)(x) == 0.0


@settings(max_examples=30, deadline=None)
@given(derivators(max_jumps=0), st.floats(0, 1), st.integers(0, 8))
def test_continuous_collapse(d, x0, n):
    pp = monomial_closed(d, x0, n)
    yc0 = float(np.interp(x0, d.bx, d.by))
    for i, cell in enumerate(pp.polys):
        lo, hi = d.knots[i], d.knots[i + 1]
        ylo, yhi = np.interp([lo, hi], d.bx, d.by) - yc0
        lin = Chebyshev([0.5 * (ylo + yhi), 0.5 * (yhi - ylo)], domain=[lo, hi])
        expected = lin**n
        assert np.array_equal(np.trim_zeros(cell.coef, "b"), np.trim_zeros(expected.coef, "b"))


def test_gpolynomial_examples(A):
    p = gpolynomial(A, [0, 1])
    assert p(0.75) == pytest.approx(1.75)
    assert p.right(0.5) == pytest.approx(1.5)
    assert gpolynomial(A, [0, 0, 1])(0.75) == pytest.approx(2.0625)
    with pytest.raises(Exception):
        p.right(1.0)
    assert p.to_json() == {"center": 0.0, "coefficients": [0.0, 1.0]}


@settings(max_examples=40, deadline=None)
@given(derivators(), st.floats(0, 1), st.integers(0, 8), st.integers(0, 2**16))
def test_dual_evaluation(d, x0, m, seed):
    alpha = np.random.default_rng(seed).normal(size=m + 1)
    p = GPolynomial(d, x0, alpha)
    xs = np.linspace(0, 1, 1000)
    a, b = evaluate_gpoly(p, xs), evaluate_monomial_sum(p, xs)
    assert np.max(np.abs(a - b)) <= 1e-10 * (1 + np.max(np.abs(b)))
    assert np.allclose(p.to_pp()(xs), b, rtol=1e-10, atol=1e-10)


def test_flat_constancy(flat):
    p = GPolynomial(flat, 0.0, [0.3, -1, 2, 0.5])
    v = p(np.linspace(0.4, 0.6, 21)[1:])
    assert np.ptp(v) < 1e-13


def test_recenter_examples(C, A, flat):
    p = GPolynomial(C, 0.0, [0, 0, 1])
    q = recenter(p, 0.5)
    assert q.coefficients == pytest.approx([0.25, 1, 1], abs=1e-15)
    mono = GPolynomial(A, 0.5, [0, 0, 0, 1])
    assert recenter(mono, 0.5).coefficients == pytest.approx([0, 0, 0, 1], abs=0)
    xs = np.linspace(0, 1, 201)
    for n in range(5):
        e = np.eye(n + 1)[n]
        p = GPolynomial(flat, 0.45, e)
        assert np.allclose(recenter(p, 0.6)(xs), p(xs), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(derivators(), st.floats(0, 1), st.floats(0, 1), st.integers(0, 6))
def test_recenter_identity(d, x0, x1, m):
    alpha = np.random.default_rng(m).normal(size=m + 1)
    p = GPolynomial(d, x0, alpha)
    q = recenter(p, x1)
    xs = np.linspace(0, 1, 301)
    assert np.allclose(q(xs), p(xs), rtol=1e-10, atol=1e-10)


def test_g_derive(A):
    assert g_derive(GPolynomial(A, 0, [0, 0, 1])).coefficients.tolist() == [0, 2]
    assert g_derive(GPolynomial(A, 0, [3.0])).coefficients.tolist() == [0]
    p = GPolynomial(A, 0.0, [0.2, -1.0, 0.5, 0.3])
    dp = g_derive(p)
    f = Integrand(p, None, p.right)
    for t in np.linspace(0.0, 0.95, 20):
        val, _ = stieltjes_derivative(A, f, t)
        assert val == pytest.approx(dp(t), abs=1e-5)


def test_exp_g(B):
    e = exp_g_truncated(B, -1.0, 0.0, 3)
    assert e(np.array([0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0])).tolist() == [1, 0, 0, 0, 0, 0, 0]
    assert e.coefficients == pytest.approx([1, -1, 0.5, -1 / 6], abs=1e-16)
    assert np.all(exp_g_truncated(B, 0.0, 0.0, 5)(np.linspace(0, 3, 9)) == 1.0)


def test_closed_vs_recursive_random():
    d = random_derivator(np.random.default_rng(11))
    xs = np.linspace(0, 1, 50)
    for x0 in (0.0, 0.4):
        for n in range(5):
            ref = monomial_closed(d, x0, n)(xs)
            rec = monomial_recursive(d, x0, n)(xs)
            assert np.all(np.abs(ref - rec) < 1e-8 * (1 + np.abs(ref)))
