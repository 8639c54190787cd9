import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from antideriv.errors import ConfigError, DivisionByZero, IndistinguishableAtPrecision
from antideriv.padic import (Ball, ExtElement, PAdicNumber, PrecisionContext, alpha_square,
                             beta_element, conjugate, dichotomy_holds, ext_wirtinger_coords,
                             field_arith, format_ext, random_unit_ball, triangle_compare, vp,
                             vp_factorial)

CTX3 = PrecisionContext(3, 12)
CTX5 = PrecisionContext(5, 12)


def residue_mod(x: Fraction, p: int, N: int) -> int:
    """x mod p^N for a p-integral rational, the oracle for digit checks."""
    m = p ** N
    return x.numerator * pow(x.denominator, -1, m) % m


def test_add_one_one():
    assert field_arith(CTX3.padic(1), CTX3.padic(1), "add") == CTX3.padic(2)


def test_geometric_series_division():
    q = field_arith(CTX3.padic(1), CTX3.padic(1 - 3), "div")
    assert q.digits(12) == [1] * 12


def test_conjugate_product():
    # p = 3 has alpha^2 = -1
    z = CTX3.ext(1, 1)
    w = CTX3.ext(1, -1)
    assert z * w == CTX3.ext(2)
    assert conjugate(z) == w


@pytest.mark.parametrize("p,d", [(3, -1), (7, -1), (11, -1), (5, 2), (13, 2), (17, 3)])
def test_alpha_square(p, d):
    assert alpha_square(p) == d


def test_p2_rejected():
    with pytest.raises(ConfigError):
        PrecisionContext(2, 8)
    with pytest.raises(ConfigError):
        PrecisionContext(9, 8)
    with pytest.raises(ConfigError):
        PrecisionContext(3, 3)


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        CTX3.ext(1) / CTX3.ext(0)


@pytest.mark.parametrize("k", [0, 1, 5, 9, 27, 100])
def test_vp_factorial_legendre(k):
    # oracle: direct valuation of the product
    prod = 1
    for i in range(1, k + 1):
        prod *= i
    assert vp_factorial(k, 3) == vp(prod, 3)


def test_triangle_compare_examples():
    assert triangle_compare(CTX3.padic(1), CTX3.padic(2)) == "less"
    x = CTX3.padic(7)
    assert triangle_compare(x, x) == "equal"
    assert triangle_compare(CTX3.padic(3), CTX3.padic(1)) == "less"


@pytest.mark.parametrize("ctx", [CTX3, CTX5])
def test_beta_is_minus_one(ctx):
    b = beta_element(ctx)
    assert b == ctx.padic(-1)
    assert b.digits(10) == [ctx.p - 1] * 10


def test_beta_is_maximum():
    rng = random.Random(3)
    b = beta_element(CTX3)
    for _ in range(1000):
        x = random_unit_ball(CTX3, rng, 10)
        if x == b:
            continue
        try:
            assert triangle_compare(x, b) == "less"
        except IndistinguishableAtPrecision:
            pass


def test_conjugate_of_real():
    x = CTX5.ext(Fraction(3, 7))
    assert conjugate(x) == x
    z = CTX5.ext(2, 3)
    assert conjugate(z) == CTX5.ext(2, -3)


def test_wirtinger_coords_roundtrip():
    z = CTX5.ext(Fraction(1, 2), 4)
    x, y = ext_wirtinger_coords(z)
    assert x == CTX5.padic(Fraction(1, 2))
    assert y == CTX5.padic(4)


def test_format_ext_digits():
    assert format_ext(CTX3.ext(5)).startswith("2 1 0")
    assert "α(" in format_ext(CTX3.ext(1, 1))


def test_ball_dichotomy_examples():
    a = Ball(CTX3.padic(0), -1)
    b = Ball(CTX3.padic(3), -1)
    c = Ball(CTX3.padic(1), -1)
    big = Ball(CTX3.padic(0), 0)
    assert a.relation(b) == "equal"
    assert a.relation(c) == "disjoint"
    assert a.relation(big) == "inside"
    assert all(dichotomy_holds(x, y) for x in (a, b, c, big) for y in (a, b, c, big))


p_integral = st.builds(Fraction, st.integers(-10**6, 10**6),
                       st.integers(1, 10**4).filter(lambda d: d % 3 != 0))


@given(p_integral, p_integral)
@settings(max_examples=200, deadline=None)
def test_arith_matches_rational_oracle(x, y):
    a, b = CTX3.padic(x), CTX3.padic(y)
    for op, ref in (("add", x + y), ("sub", x - y), ("mul", x * y)):
        got = field_arith(a, b, op)
        want = residue_mod(ref, 3, 12)
        assert residue_mod(got.to_fraction(), 3, 12) == want


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6), st.integers(-10**6, 10**6),
       st.integers(-10**6, 10**6))
@settings(max_examples=200, deadline=None)
def test_ext_field_laws(a, b, c, d):
    z, w = CTX5.ext(a, b), CTX5.ext(c, d)
    assert z * w == w * z
    assert (z + w).conjugate() == z.conjugate() + w.conjugate()
    if not z.is_zero() and not w.is_zero():
        assert (z * w).v == z.v + w.v
        assert (z * w) / w == z
    s = z + w
    if not s.is_zero() and not z.is_zero() and not w.is_zero():
        assert s.v >= min(z.v, w.v)


@given(st.integers(0, 3**8 - 1), st.integers(1, 6))
@settings(max_examples=100, deadline=None)
def test_padic_valuation(u, k):
    x = PAdicNumber.coerce(CTX3, u * 3 ** k)
    if u:
        assert x.valuation() == vp(u, 3) + k


def test_ext_coerce_tuple():
    assert ExtElement.coerce(CTX3, (1, 2)) == CTX3.ext(1, 2)
