import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from antideriv.antiderivation import (antiderive_between, antiderive_multi, antiderive_nested,
                                      antiderive_point, make_plan, power_rule_sum, sigma,
                                      truncation_level)
from antideriv.chains import agreement
from antideriv.expr import parse_expr, power, z
from antideriv.harness import algebra_integrands, fundamental_identity, sigma_laws
from antideriv.padic import PrecisionContext, random_unit_ball

CTX = PrecisionContext(3, 12)
PLAN = make_plan(CTX)


def test_sigma_example():
    assert sigma(2, CTX.padic(1 + 2 * 3 + 9), CTX) == CTX.padic(7)
    assert sigma(0, CTX.padic(17), CTX).is_zero()


def test_sigma_offset_variant_fixes_one():
    assert sigma(5, CTX.padic(1), CTX, "offset") == CTX.padic(1)


@pytest.mark.parametrize("N,L", [(12, 13), (4, 5)])
def test_truncation_level(N, L):
    assert truncation_level(PrecisionContext(3, N)) == L


def test_plan_output_precision():
    # N_out = N - v_p(n!)
    assert make_plan(CTX, n=1).N_out == 12
    assert make_plan(CTX, n=3).N_out == 11
    assert make_plan(CTX, n=6).N_out == 10


def test_antiderivative_of_one_is_identity():
    x = CTX.padic(Fraction(5, 7))
    assert antiderive_point(parse_expr("1"), x, CTX, PLAN, var="z1") == CTX.ext(x)
    assert antiderive_point(parse_expr("0"), x, CTX, PLAN, var="z1").is_zero()


def test_antiderivative_of_z_at_beta_by_direct_sum():
    # oracle: x_l = sigma_l(beta) = p^l - 1, sum of x_l (x_{l+1} - x_l); the tail past
    # 40 terms is far below p^-N
    p = 3
    total = sum(Fraction(p ** l - 1) * (p ** (l + 1) - p ** l) for l in range(40))
    got = antiderive_point(z(1), CTX.beta, CTX, PLAN, var="z1")
    assert agreement(got, CTX.ext(total)) >= PLAN.N_out
    # the operator is not the naive x^2/2
    assert agreement(got, CTX.ext(Fraction(1, 2))) < PLAN.N_out


def test_between_laws():
    f = parse_expr("z1^3 + 2")
    a, b = CTX.padic(4), CTX.padic(Fraction(2, 5))
    assert antiderive_between(f, a, a, CTX, PLAN, "z1").is_zero()
    assert antiderive_between(f, a, b, CTX, PLAN, "z1") == -antiderive_between(f, b, a, CTX, PLAN, "z1")
    assert antiderive_between(parse_expr("1"), a, b, CTX, PLAN, "z1") == CTX.ext(b - a)


def test_multi_of_one_is_beta_squared():
    assert antiderive_multi(parse_expr("1"), None, CTX, PLAN) == CTX.ext(CTX.beta * CTX.beta)


def test_operators_commute():
    f = parse_expr("x1^2*y1 + y1^3")
    ends = [CTX.padic(4), CTX.padic(7)]
    a = antiderive_nested(f, ["x1", "y1"], ends, CTX, PLAN)
    b = antiderive_nested(f, ["y1", "x1"], ends[::-1], CTX, PLAN)
    assert a == b


@pytest.mark.parametrize("t", range(7))
def test_power_rule_closed_form(t):
    x = random_unit_ball(CTX, random.Random(t), 12)
    for n in (1, 2, 3):
        plan = make_plan(CTX, n=n)
        assert antiderive_point(power(z(1), t), x, CTX, plan, var="z1") == power_rule_sum(t, x, CTX, n, plan.L)


def test_power_rule_exact_when_n_exceeds_degree():
    # the Taylor part is exact for t < n, so P^n z^t telescopes to x^(t+1)/(t+1)
    x = CTX.padic(Fraction(4, 5))
    for t in range(3):
        plan = make_plan(CTX, n=t + 1)
        got = antiderive_point(power(z(1), t), x, CTX, plan, var="z1")
        assert got == CTX.ext(x ** (t + 1) / (t + 1))


def test_sigma_laws_small():
    assert sigma_laws(CTX, 1, 100).failed == 0


def test_fundamental_identity_quick():
    x = random_unit_ball(CTX, random.Random(0), 12)
    for f in algebra_integrands(3)[:6]:
        assert all(d >= k for k, d in fundamental_identity(f, x, CTX, PLAN, ks=(3, 6)))


@given(st.integers(0, 3 ** 10 - 1), st.integers(0, 10), st.integers(0, 10))
@settings(max_examples=100, deadline=None)
def test_sigma_composition(u, l, m):
    x = CTX.padic(u)
    assert sigma(l, sigma(m, x, CTX), CTX) == sigma(min(l, m), x, CTX)
