import pytest

from antideriv.antiderivation import make_plan
from antideriv.chains import (Chain, Form, Simplex, agreement, boundary, canonical_border_ball,
                              chain_antiderive, cube, dt, dzeta, segment, stokes_check)
from antideriv.expr import antider, parse_expr
from antideriv.harness import stokes_cases
from antideriv.padic import ExtElement, PrecisionContext

CTX = PrecisionContext(3, 10)
PLAN = make_plan(CTX)


def test_segment_boundary():
    seg = segment(CTX, 1, 4)
    faces = boundary(Chain([(1, seg)]))
    signs = sorted((s, c.origin[0].key()) for s, c in faces.cells)
    assert signs == sorted([(1, CTX.ext(4).key()), (-1, CTX.ext(1).key())])


def test_boundary_of_boundary_is_empty():
    sq = cube(CTX, 2)
    assert boundary(boundary(Chain([(1, sq)]))).is_empty()
    c3 = cube(CTX, 3, [0, 1, 2])
    assert boundary(boundary(Chain([(1, c3)]))).is_empty()


def test_simplex_boundary_signs():
    s = Simplex(("v0", "v1", "v2"))
    assert s.boundary() == [(1, Simplex(("v1", "v2"))), (-1, Simplex(("v0", "v2"))),
                            (1, Simplex(("v0", "v1")))]


def test_canonical_border_shapes():
    loop = canonical_border_ball(CTX, 0, 0)
    assert len(loop) == 4
    corners = {c.origin[0].key() for _, c in loop.cells}
    b, a = CTX.ext(CTX.beta), CTX.alpha
    want = {(sx * b + sy * a * b).key() for sx in (1, -1) for sy in (1, -1)}
    assert corners == want
    two = canonical_border_ball(CTX, (0, 0), 0, m=2)
    assert len(two) == 8 and two.dims == {3}


def test_dzeta_over_closed_loop_vanishes():
    loop = canonical_border_ball(CTX, 0, 0)
    assert chain_antiderive(dzeta(1), loop, CTX, PLAN).is_zero()


def test_reversed_segment_negates():
    w = dzeta(1).scale(parse_expr("z1^2 + 1"))
    seg = Chain([(1, segment(CTX, 0, 3))])
    assert chain_antiderive(w, -seg, CTX, PLAN) == -chain_antiderive(w, seg, CTX, PLAN)
    # the reparametrized segment gives the negation once the Taylor part is exact
    plan = make_plan(CTX, n=3)
    a = chain_antiderive(w, seg, CTX, plan)
    b = chain_antiderive(w, Chain([(1, segment(CTX, 3, 0))]), CTX, plan)
    assert agreement(a, -b) >= plan.N_out
    # with n = 1 it does not: the defect is a genuine property of the operator
    a = chain_antiderive(w, seg, CTX, PLAN)
    b = chain_antiderive(w, Chain([(1, segment(CTX, 3, 0))]), CTX, PLAN)
    assert agreement(a, -b) == 3


def test_area_of_unit_square():
    w = Form.basis("dt1", "dt2")
    sq = cube(CTX, 2)
    assert chain_antiderive(w, Chain([(1, sq)]), CTX, PLAN) == CTX.ext(CTX.beta * CTX.beta)


def test_closed_form_has_zero_boundary_integral():
    w = dt(1).scale(3) + dt(2).scale(parse_expr("alpha"))
    r = stokes_check(w, cube(CTX, 2), CTX, PLAN)
    assert r.lhs.is_zero() and r.rhs.is_zero()


def test_stokes_dimension_one_is_fundamental_identity():
    F = antider(parse_expr("t1^3 + 1"), "t1", PLAN.n, PLAN.L)
    r = stokes_check(Form.scalar(F), cube(CTX, 1, [1]), CTX, PLAN)
    assert r.agree_to >= PLAN.N_out


@pytest.mark.parametrize("n", [1, 2])
def test_stokes_harness(n):
    plan = make_plan(CTX, n=n)
    for name, w, cell in stokes_cases(CTX, plan, seed=7, per_dim=3):
        r = stokes_check(w, cell, CTX, plan)
        assert r.agree_to >= plan.N_out, name


def test_wedge_antisymmetry():
    a, b = Form.basis("dx1"), Form.basis("dy1")
    assert (a ^ b).terms == (-(b ^ a)).terms
    assert (a ^ a).is_zero()


def test_agreement_exact_zero():
    assert agreement(CTX.ext(5), CTX.ext(5)) >= CTX.N
    assert agreement(CTX.ext(5), CTX.ext(5 + 27)) == 3
