import pytest

from antideriv import cauchy as cy
from antideriv import kernels as kn
from antideriv.chains import agreement
from antideriv.expr import parse_expr
from antideriv.kernels import BidegreeForm, KernelConfig
from antideriv.padic import ExtElement, PrecisionContext

CTX = PrecisionContext(3, 12)
CFG = KernelConfig(m=1)
PLAN = CFG.plan_for(CTX)
Z0 = ExtElement.coerce(CTX, 3)


def test_config_validation():
    with pytest.raises(ValueError):
        KernelConfig(m=3)
    with pytest.raises(ValueError):
        KernelConfig(v="user")


def test_q1_is_the_cauchy_constant():
    r = kn.q_m_constant(CTX, CFG)
    assert r.agree_to >= PLAN.N_out
    assert agreement(r.value, cy.cauchy_constant(CTX, PLAN)) >= PLAN.N_out


@pytest.mark.parametrize("m", [1, 2])
def test_kernel_routes_agree(m):
    c = KernelConfig(m=m)
    pt = ExtElement.coerce(CTX, 4)
    zeta = {"z1": pt} if m == 1 else {"z1": pt, "z2": pt * 2}
    a = kn.mb_kernel((0,) * m, c, CTX, "reduced").values(zeta, CTX)
    b = kn.mb_kernel((0,) * m, c, CTX, "definition").values(zeta, CTX)
    zero = ExtElement.zero(CTX)
    for key in set(a) | set(b):
        assert agreement(a.get(key, zero), b.get(key, zero)) >= CTX.N


@pytest.mark.parametrize("text", ["z1^2 + 1", "1/(z1 - 1/3)"])
def test_one_variable_bochner_is_cauchy(text):
    f = parse_expr(text)
    b = kn.bochner_ops(f, 0, 0, Z0, "B_boundary", CFG, CTX)
    c = cy.cauchy_eval(f, Z0, CTX, PLAN, border=cy.large_border(CTX, 0, 0))
    assert agreement(b, c) >= PLAN.N_out


def test_leray_conjugate_choice():
    f = parse_expr("z1^3 - 2*z1")
    L = kn.leray_ops(f, 0, 0, Z0, CFG, CTX)
    b = kn.bochner_ops(f, 0, 0, Z0, "B_boundary", CFG, CTX)
    assert agreement(L.L, b) >= PLAN.N_out
    r = L.R if isinstance(L.R, ExtElement) else ExtElement.zero(CTX)
    assert agreement(r, ExtElement.zero(CTX)) >= PLAN.N_out


def test_interior_operator_degenerate_degrees():
    f = parse_expr("z1")
    assert kn.bochner_ops(f, 0, 0, Z0, "B_interior", CFG, CTX).is_zero()
    two = BidegreeForm.dzeta(1).wedge(BidegreeForm.dzetabar(1))
    assert kn.bochner_ops(two, 0, 0, Z0, "B_interior", CFG, CTX) == {}
    with pytest.raises(ValueError):
        kn.bochner_ops(f, 0, 0, Z0, "B_sideways", CFG, CTX)


def test_bidegree_algebra():
    a, b = BidegreeForm.dzeta(1), BidegreeForm.dzetabar(1)
    assert a.wedge(a).is_zero()
    assert (a.wedge(b) + b.wedge(a)).is_zero()
    assert a.wedge(b).bidegrees() == {(1, 1)}
    # dbar of zbar is d zbar
    assert not BidegreeForm.scalar(parse_expr("zb1")).dbar().is_zero()
    assert BidegreeForm.scalar(parse_expr("z1^2")).dbar().is_zero()


def test_koppelman_zero_data():
    r = kn.koppelman_check(parse_expr("0"), 0, 0, Z0, CFG, CTX, eps=3)
    assert r.defect >= PLAN.N_out
