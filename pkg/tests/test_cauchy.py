import math
from fractions import Fraction

import pytest

from antideriv import cauchy as cy
from antideriv.antiderivation import make_plan
from antideriv.chains import agreement
from antideriv.errors import IncompatibleData, NotHolomorphic
from antideriv.expr import evaluate, parse_expr
from antideriv.padic import ExtElement, PrecisionContext

CTX = PrecisionContext(3, 12)
PLAN = make_plan(CTX)
P = 3


def close(a, b, prec=PLAN.N_out):
    return agreement(a, ExtElement.coerce(CTX, b)) >= prec


def test_constant_nonzero_and_radius_independent():
    c = cy.compute_C_alpha(CTX, n=1, k=2)
    assert c.nonzero
    for k in (3, 4, 5, 6):
        assert close(cy.compute_C_alpha(CTX, n=1, k=k).value, c.value)


def test_constant_center_independent():
    a = cy.compute_C_alpha(CTX, n=1, k=3).value
    b = cy.compute_C_alpha(CTX, n=1, k=3, center=Fraction(1, 2)).value
    assert close(a, b)


def test_constant_depends_on_smoothness():
    # the loop integrals of low powers vanish for larger n, so the constant moves with n
    a = cy.compute_C_alpha(CTX, n=1, k=2).value
    b = cy.compute_C_alpha(CTX, n=2, k=2).value
    assert agreement(a, b) < PLAN.N_out


@pytest.mark.parametrize("text,zv", [("7", 3), ("z1", 3), ("z1^2", 3), ("1/(z1 - 1/3)", 9),
                                     ("z1^5 - alpha*z1 + 2", Fraction(1, 2))])
def test_cauchy_reproduces(text, zv):
    f = parse_expr(text)
    want = evaluate(f, {"z1": ExtElement.coerce(CTX, zv)}, CTX)
    assert close(cy.cauchy_eval(f, zv, CTX, PLAN), want)


def test_cauchy_rejects_non_holomorphic():
    with pytest.raises(NotHolomorphic):
        cy.cauchy_eval(parse_expr("conj(z1)"), 3, CTX, PLAN)


def test_loop_vanishing():
    assert close(cy.loop_vanishing(parse_expr("z1^3 + 4"), 3, CTX, PLAN), 0)


@pytest.mark.parametrize("text,order,want", [
    ("z1^2", 2, 2),
    ("z1^2", 3, 0),
    ("1/(1 - z1)", 1, Fraction(1, (1 - P) ** 2)),
    ("1/(1 - z1)", 3, Fraction(math.factorial(3), (1 - P) ** 4)),
])
def test_taylor_coefficients(text, order, want):
    assert close(cy.taylor_coeff(parse_expr(text), P, order, CTX, PLAN), want)


def test_laurent_simple_pole():
    L = cy.laurent_coeffs(parse_expr("1/(z1 - 1/3)"), Fraction(1, 3), (-3, 3), CTX)
    for k, a in L.coeffs.items():
        assert close(a, 1 if k == -1 else 0, L.precision)
    assert cy.classify_critical_point(L) == ("pole", 1)


def test_laurent_linear_combination_and_window_independence():
    xi = 3
    f = parse_expr("3/(z1 - 3)^2 + 5 + (z1 - 3)")
    want = {-2: 3, 0: 5, 1: 1}
    L = cy.laurent_coeffs(f, xi, (-3, 3), CTX)
    for k in range(-3, 4):
        assert close(L.coeffs[k], want.get(k, 0), L.precision)
    L2 = cy.laurent_coeffs(f, xi, (-3, 3), CTX, R=L.R + 1)
    for k in range(-3, 4):
        assert close(L2.coeffs[k], want.get(k, 0), L.precision)
    assert cy.classify_critical_point(L) == ("pole", 2)


def test_classification_removable_and_essential():
    L = cy.laurent_coeffs(parse_expr("z1^2 + 1"), 0, (-3, 3), CTX)
    assert cy.classify_critical_point(L) == ("removable",)
    # truncated exp(1/z): sum_{k<=4} z^-k / k!
    surrogate = " + ".join(f"(1/{math.factorial(k)})*z1^(-{k})" for k in range(1, 5))
    L = cy.laurent_coeffs(parse_expr("1 + " + surrogate), 0, (-3, 3), CTX)
    assert cy.classify_critical_point(L) == ("essential-window",)


@pytest.mark.parametrize("a", [1, 5, Fraction(2, 7)])
def test_residue_of_simple_pole(a):
    f = parse_expr(f"({a})/(z1 - 3)")
    assert close(cy.residue(f, 3, CTX, PLAN), a)


def test_residue_of_polynomial_is_zero():
    assert close(cy.residue(parse_expr("z1^4 + z1"), 3, CTX, PLAN), 0)


def test_residue_theorem():
    one = cy.residue_theorem_check(parse_expr("2/(z1 - 3)"), [3], CTX, PLAN)
    assert one.ok
    none = cy.residue_theorem_check(parse_expr("z1^2"), [], CTX, PLAN)
    assert close(none.lhs, 0)
    two = cy.residue_theorem_check(parse_expr("1/(z1 - 3) + 4/(z1 - 1/3)"), [3, Fraction(1, 3)],
                                   CTX, PLAN)
    assert two.ok
    assert close(two.rhs, cy.cauchy_constant(CTX, PLAN) * 5)


def test_residue_sum_law():
    f = parse_expr("1/(z1 - 3) + 4/(z1 - 1/3)")
    at_a = cy.residue_at_A(f, CTX, PLAN, poles=[3, Fraction(1, 3)])
    assert close(at_a, -5)


@pytest.mark.parametrize("text,want", [("z1 - 3", 1), ("(z1 - 3)^2/(z1 - 9)", 1),
                                       ("exp(3*z1)", 0), ("(z1 - 3)^3*(z1 - 6)/(z1 - 9)^2", 2)])
def test_argument_principle(text, want):
    got, dist = cy.argument_principle(parse_expr(text), CTX, PLAN, points=[3, 6, 9])
    assert got == want and dist >= PLAN.N_out


def test_dbar_zero_data():
    zv = ExtElement.coerce(CTX, 3)
    f = parse_expr("0")
    u = lambda w: cy.dbar_solve_1d(f, 0, 0, w, 3, CTX, PLAN)
    assert close(cy.dbar_quotient(u, zv, 3, CTX), 0)


def test_dbar_incompatible_rejected():
    with pytest.raises(IncompatibleData):
        cy.dbar_solve_multi([parse_expr("conj(z2)"), parse_expr("0")], (0, 0), 0, (3, 3), 2, CTX, PLAN)
    assert cy.check_compatibility([parse_expr("1"), parse_expr("0")], CTX)


def test_dbar_sweep_stabilizes():
    zv = ExtElement.coerce(CTX, 3)
    f = parse_expr("1")
    r = cy.dbar_sweep(lambda e: cy.dbar_solve_1d(f, 0, 0, zv, e, CTX, PLAN), [1, 2, 3, 4], PLAN.N_out)
    assert r.stable
