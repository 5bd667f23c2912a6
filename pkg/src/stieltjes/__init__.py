"""Stieltjes calculus for derivators with finitely many jumps.

Measures and integrals against ``dg``, g-monomials and g-polynomials, a
Weierstrass-type approximation engine for g-continuous functions, and Gram
diagnostics of monomial families in ``L^2_g``.
"""

from .approx import (
    ApproxResult,
    GFunction,
    JumpCoefficients,
    PiecewiseTarget,
    TargetPiece,
    approximate,
    decompose_target,
    fit_constructive,
    fit_l2_projection,
    fit_sup_lsq,
    g_linear_interpolant,
    hermite_interpolate,
    jump_coefficients,
    ode_chain,
    partition_by_oscillation,
    sup_error,
)
from .derivator import Derivator, DerivatorError, evaluate, gap, make_derivator, measure, pieces
from .errors import ConditioningError, NumericalError, ODEError, QuadratureError
from .gpoly import GPolynomial, gb_monomials, monomial_closed, monomial_recursive
from .gram import GramReport, gram_det, gram_matrix, ratio_sequence
from .integrate import Integrand, ls_integrate, stieltjes_derivative

__version__ = "0.1.0"
