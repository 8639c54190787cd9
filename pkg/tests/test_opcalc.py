from fractions import Fraction

import pytest

from antideriv import opcalc as oc
from antideriv.antiderivation import make_plan
from antideriv.errors import BorderTouchesSpectrum, ConfigError, SingularAtEvaluation
from antideriv.expr import parse_expr
from antideriv.opcalc import MatrixOverExt
from antideriv.padic import ExtElement, PrecisionContext

CTX = PrecisionContext(3, 12)
PLAN = make_plan(CTX)
P = 3

DIAG = MatrixOverExt(CTX, [[1, 0], [0, 1 + P]])
JORDAN = MatrixOverExt(CTX, [[2, 1], [0, 2]])
TRI = MatrixOverExt(CTX, [[1, 1, 0], [0, 1 + P, 2], [0, 0, 1 + 2 * P]])


def mat(rows):
    return MatrixOverExt(CTX, rows, validate=False)


def test_resolvent_of_diagonal():
    z = ExtElement.from_parts(CTX, 7, 1)
    R = oc.resolvent_at(DIAG, z)
    want = mat([[1 / (z - 1), 0], [0, 1 / (z - (1 + P))]])
    assert R.agreement(want) >= CTX.N - 1


@pytest.mark.parametrize("T", [DIAG, JORDAN, TRI], ids=["diag", "jordan", "tri"])
def test_resolvent_inverts(T):
    z = ExtElement.from_parts(CTX, 11, 5)
    I = MatrixOverExt.identity(CTX, T.n)
    assert ((I * z - T) * oc.resolvent_at(T, z)).agreement(I) >= CTX.N - 2


def test_resolvent_singular_on_spectrum():
    with pytest.raises(SingularAtEvaluation):
        oc.resolvent_at(DIAG, 1)


def test_square_of_diagonal():
    F = oc.func_calc(parse_expr("z1^2"), DIAG, PLAN)
    assert F.agreement(mat([[1, 0], [0, (1 + P) ** 2]])) >= PLAN.N_out


@pytest.mark.parametrize("T", [DIAG, JORDAN, TRI], ids=["diag", "jordan", "tri"])
def test_unit_and_identity_functions(T):
    assert oc.func_calc(parse_expr("1"), T, PLAN).agreement(MatrixOverExt.identity(CTX, T.n)) >= PLAN.N_out
    assert oc.func_calc(parse_expr("z1"), T, PLAN).agreement(T) >= PLAN.N_out


def test_rational_function_of_jordan_block():
    # 1/(c - T) for T = [[2,1],[0,2]] is [[1/(c-2), 1/(c-2)^2], [0, 1/(c-2)]]
    F = oc.func_calc(parse_expr("1/(z1 - 1/3)"), JORDAN, PLAN)
    a = Fraction(1, 3) - 2
    want = mat([[-1 / a, -1 / a ** 2], [0, -1 / a]])
    assert F.agreement(want) >= PLAN.N_out


def test_calculus_laws():
    r = oc.calculus_laws_check(parse_expr("z1 + 1"), parse_expr("z1^2"), TRI, PLAN)
    assert r.ok
    assert min(r.linear, r.product, r.composition) >= r.target


def test_spectral_projection():
    E = oc.spectral_projection([1], DIAG, PLAN)
    assert E.agreement(mat([[1, 0], [0, 0]])) >= PLAN.N_out
    E2 = oc.spectral_projection([1 + P], DIAG, PLAN)
    assert (E + E2).agreement(MatrixOverExt.identity(CTX, 2)) >= PLAN.N_out
    Et = oc.spectral_projection([1], TRI, PLAN)
    assert (Et * Et).agreement(Et) >= PLAN.N_out - 2
    assert oc.spectral_projection([], TRI, PLAN).is_zero_mod(CTX.N)


@pytest.mark.parametrize("T,z0,order", [(DIAG, 1, 1), (JORDAN, 2, 2),
                                        (MatrixOverExt(CTX, [[5, 0], [0, 5]]), 5, 1)])
def test_pole_index(T, z0, order):
    r = oc.pole_index(z0, T, PLAN)
    assert r.order == order
    assert r.agree_to >= PLAN.N_out


def test_scalar_matrix_projection_is_identity():
    T = MatrixOverExt(CTX, [[5, 0], [0, 5]])
    assert oc.pole_index(5, T, PLAN).projection.agreement(MatrixOverExt.identity(CTX, 2)) >= PLAN.N_out


def test_restriction():
    r = oc.restrict(TRI, TRI.eigenvalues()[:2], PLAN, f=parse_expr("z1^2"))
    assert r.rank == 2
    assert r.spectrum_matches
    assert r.details["f_restriction_agree"] >= PLAN.N_out


def test_lattice():
    assert oc.projector_lattice_check(TRI, PLAN).ok


def test_border_touching_spectrum():
    with pytest.raises(BorderTouchesSpectrum):
        oc.func_calc(parse_expr("z1"), DIAG, PLAN, oc.spectral_set(DIAG, [1], k=1))


def test_spectrum_validation():
    with pytest.raises(ConfigError):
        MatrixOverExt(CTX, [[1, 1], [1, 1]], spectrum=[0, 3])
    with pytest.raises(ConfigError):
        MatrixOverExt(CTX, [[1, 0], [0, 2]], spectrum=[1])
    with pytest.raises(ConfigError):
        MatrixOverExt(CTX, [[1, 0]])
    with pytest.raises(ConfigError):
        oc.spectral_set(DIAG, [7])
    # a declared spectrum for a general matrix: [[1,1],[1,1]] has eigenvalues 0 and 2
    T = MatrixOverExt(CTX, [[1, 1], [1, 1]], spectrum=[0, 2])
    assert oc.func_calc(parse_expr("z1"), T, PLAN).agreement(T) >= PLAN.N_out
