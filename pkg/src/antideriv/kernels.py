"""Bochner-Martinelli, Leray and Koppelman kernel operators on polydiscs, m <= 2.

The canonical xi is xi_l(u) = Exp(p^shift * pi^-s * u_l) with
s = ord(zeta - z) read on the shell containing zeta (``Shell`` nodes), so
every logarithmic derivative collapses to p^shift pi^-s d u_l.  With the
default ``xi_shift = 0`` the exponential itself is never evaluable in K
(its argument has norm 1); only the logarithmic derivatives enter.

Forms that depend on the evaluation point carry formal symbols ``dzbK``
for d conj(z_K).  Operator values that are forms in z are returned as
dicts {(K_1, ..., K_t): value} over increasing index tuples; values of
degree 0 come back as plain elements.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .antiderivation import AntiderivationPlan, make_plan
from .cauchy import cauchy_constant
from .chains import (Cell, Chain, Form, agreement, canonical_border_ball, chain_antiderive,
                     polydisc_cell)
from .errors import NonConvergentSweep
from .expr import (ONE, ZERO, Const, Expr, add, chi, derive, evaluate, exp, ext_const, lift,
                   mul, recip, shell, var, z, zbar)
from .padic import ExtElement, PrecisionContext
from .series import cap_precision


def _perm_sort(seq: Sequence) -> tuple[tuple, int]:
    if len(set(seq)) != len(seq):
        return (), 0
    items, sign = list(seq), 1
    for i in range(len(items)):
        for j in range(len(items) - 1 - i):
            if items[j] > items[j + 1]:
                items[j], items[j + 1] = items[j + 1], items[j]
                sign = -sign
    return tuple(items), sign


class BidegreeForm:
    """sum of c_{I,J} d zeta^I ^ d conj(zeta)^J with increasing index tuples I, J."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, Expr] | None = None):
        out: dict = {}
        for (I, J), c in (terms or {}).items():
            c = lift(c)
            si, a = _perm_sort(I)
            sj, b = _perm_sort(J)
            if a * b == 0 or c == ZERO:
                continue
            c = c if a * b == 1 else mul(-1, c)
            out[(si, sj)] = add(out[(si, sj)], c) if (si, sj) in out else c
        self.terms = {k: v for k, v in out.items() if v != ZERO}

    @classmethod
    def scalar(cls, f) -> "BidegreeForm":
        return cls({((), ()): lift(f)})

    @classmethod
    def dzeta(cls, k: int) -> "BidegreeForm":
        return cls({((k,), ()): ONE})

    @classmethod
    def dzetabar(cls, k: int) -> "BidegreeForm":
        return cls({((), (k,)): ONE})

    def bidegrees(self) -> set[tuple[int, int]]:
        return {(len(I), len(J)) for I, J in self.terms}

    def degree(self) -> int:
        degs = {a + b for a, b in self.bidegrees()}
        if len(degs) > 1:
            raise ValueError("form is not homogeneous")
        return degs.pop() if degs else 0

    def component(self, b: int, c: int) -> "BidegreeForm":
        return BidegreeForm({k: v for k, v in self.terms.items()
                             if (len(k[0]), len(k[1])) == (b, c)})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, o: "BidegreeForm") -> "BidegreeForm":
        terms = dict(self.terms)
        for k, v in o.terms.items():
            terms[k] = add(terms[k], v) if k in terms else v
        return BidegreeForm(terms)

    def __neg__(self) -> "BidegreeForm":
        return BidegreeForm({k: mul(-1, v) for k, v in self.terms.items()})

    def __sub__(self, o: "BidegreeForm") -> "BidegreeForm":
        return self + (-o)

    def scale(self, f) -> "BidegreeForm":
        f = lift(f)
        return BidegreeForm({k: mul(f, v) for k, v in self.terms.items()})

    def wedge(self, o: "BidegreeForm") -> "BidegreeForm":
        out = BidegreeForm()
        for (I1, J1), c1 in self.terms.items():
            for (I2, J2), c2 in o.terms.items():
                # d zeta^I2 moves left past d conj(zeta)^J1
                sign = -1 if (len(J1) * len(I2)) % 2 else 1
                out = out + BidegreeForm({(I1 + I2, J1 + J2): mul(sign, c1, c2)})
        return out

    __xor__ = wedge

    def _coords(self) -> list[int]:
        ks = set()
        for I, J in self.terms:
            ks.update(I)
            ks.update(J)
        from .expr import free_vars, split_name
        for c in self.terms.values():
            for v in free_vars(c):
                kind, idx = split_name(v)
                if kind in ("z", "zb", "x", "y"):
                    ks.add(idx)
        return sorted(ks)

    def partial(self) -> "BidegreeForm":
        out = BidegreeForm()
        for (I, J), c in self.terms.items():
            for k in self._coords():
                dc = derive(c, f"z{k}")
                if dc != ZERO:
                    out = out + BidegreeForm({((k,) + I, J): dc})
        return out

    def dbar(self) -> "BidegreeForm":
        out = BidegreeForm()
        for (I, J), c in self.terms.items():
            sign = -1 if len(I) % 2 else 1
            for k in self._coords():
                dc = derive(c, f"zb{k}")
                if dc != ZERO:
                    out = out + BidegreeForm({(I, (k,) + J): mul(sign, dc)})
        return out

    def d(self) -> "BidegreeForm":
        return self.partial() + self.dbar()

    def to_form(self) -> Form:
        from .chains import dzeta, dzetabar
        out = Form()
        for (I, J), c in self.terms.items():
            f = Form.scalar(c)
            for i in I:
                f = f.wedge(dzeta(i))
            for j in J:
                f = f.wedge(dzetabar(j))
            out = out + f
        return out

    def values(self, point: Mapping[str, object], ctx: PrecisionContext) -> dict:
        return {k: evaluate(c, point, ctx) for k, c in self.terms.items()}

    def __repr__(self):
        parts = []
        for (I, J), c in sorted(self.terms.items()):
            mono = [f"dz{i}" for i in I] + [f"dzb{j}" for j in J]
            parts.append(f"({c})*{'^'.join(mono) if mono else '1'}")
        return " + ".join(parts) if parts else "0"


# configuration ---------------------------------------------------------

@dataclass(frozen=True)
class KernelConfig:
    """m: dimension; v: 'conjugate' or 'user' with ``v_map`` (z -> tuple of Exprs in zeta).

    ``v_zbar`` gives the d conj(z) derivatives of a user map as {(k, l): Expr}
    (empty for maps holomorphic in z).  ``xi_shift`` scales every xi argument
    by p^xi_shift; 0 is the canonical choice.
    """

    m: int = 1
    v: str = "conjugate"
    v_map: Callable | None = field(default=None, compare=False)
    v_zbar: Mapping | None = field(default=None, compare=False)
    xi_shift: int = 0
    plan: AntiderivationPlan | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.m not in (1, 2):
            raise ValueError("kernels are implemented for m <= 2")
        if self.v not in ("conjugate", "user"):
            raise ValueError("v is 'conjugate' or 'user'")
        if self.v == "user" and self.v_map is None:
            raise ValueError("a user v needs v_map")

    def plan_for(self, ctx: PrecisionContext) -> AntiderivationPlan:
        return self.plan or make_plan(ctx)


def _point(ctx: PrecisionContext, zv, m: int) -> tuple[ExtElement, ...]:
    pts = zv if isinstance(zv, (tuple, list)) else (zv,)
    if len(pts) != m:
        raise ValueError(f"expected a point with {m} coordinates")
    return tuple(ExtElement.coerce(ctx, c) for c in pts)


def _names(m: int) -> tuple[str, ...]:
    return tuple(f"z{i + 1}" for i in range(m))


# kernels ---------------------------------------------------------------

def mb_kernel(zv, config: KernelConfig, ctx: PrecisionContext,
              route: str = "reduced") -> BidegreeForm:
    """w(z, zeta) for the canonical xi, as a form in zeta.

    ``reduced``: sum_j (-1)^(j+1) (zeta_j - z_j)^-1 P^(2(m-1)) d zeta_j ^_{l != j}
    (d conj(zeta_l) ^ d zeta_l), P = p^shift pi^-s.  ``definition``: the
    logarithmic derivatives of xi are differentiated symbolically.
    """
    m = config.m
    zp = _point(ctx, zv, m)
    zc = [ext_const(c) for c in zp]
    total = BidegreeForm()
    if route == "reduced":
        P = shell(_names(m), tuple(zc), -2 * (m - 1))
        if config.xi_shift:
            P = mul(lift(ctx.p ** (2 * (m - 1) * config.xi_shift)), P)
        for j in range(1, m + 1):
            term = BidegreeForm.dzeta(j).scale(mul((-1) ** (j + 1), P,
                                                   recip(add(z(j), mul(-1, zc[j - 1])))))
            for l in range(1, m + 1):
                if l != j:
                    term = term.wedge(BidegreeForm.dzetabar(l).wedge(BidegreeForm.dzeta(l)))
            total = total + term
        return total
    if route != "definition":
        raise ValueError("route is 'reduced' or 'definition'")
    S = _xi_scale(config, zp, ctx)
    for j in range(1, m + 1):
        term = BidegreeForm.dzeta(j).scale(mul((-1) ** (j + 1), recip(add(z(j), mul(-1, zc[j - 1])))))
        for l in range(1, m + 1):
            if l == j:
                continue
            xb = exp(mul(S, add(zbar(l), mul(-1, ext_const(zp[l - 1].conjugate())))))
            xh = exp(mul(S, add(z(l), mul(-1, zc[l - 1]))))
            a = BidegreeForm.scalar(xb).dbar().scale(recip(xb))
            b = BidegreeForm.scalar(xh).d().scale(recip(xh))
            term = term.wedge(a.wedge(b))
        total = total + term
    return total


def _xi_scale(config: KernelConfig, zp: Sequence[ExtElement], ctx: PrecisionContext) -> Expr:
    S = shell(_names(len(zp)), tuple(ext_const(c) for c in zp), -1)
    if config.xi_shift:
        S = mul(lift(ctx.p ** config.xi_shift), S)
    return S


def w_tilde(zv, config: KernelConfig, ctx: PrecisionContext) -> Form:
    """Kernel with d-bar taken in (z, zeta): the d conj(z) parts appear as formal dzb symbols."""
    m = config.m
    zp = _point(ctx, zv, m)
    zc = [ext_const(c) for c in zp]
    S = _xi_scale(config, zp, ctx)
    from .chains import dzeta, dzetabar
    total = Form()
    for j in range(1, m + 1):
        term = dzeta(j).scale(mul((-1) ** (j + 1), recip(add(z(j), mul(-1, zc[j - 1])))))
        for l in range(1, m + 1):
            if l == j:
                continue
            a = (dzetabar(l) - Form.basis(f"dzb{l}")).scale(S)
            term = term.wedge(a.wedge(dzeta(l).scale(S)))
        total = total + term
    return total


def upsilon(kernel: Form, t: int) -> Form:
    """Part of a kernel of degree t in the formal d conj(z) symbols."""
    return Form({k: c for k, c in kernel.terms.items()
                 if sum(1 for s in k if s.startswith("dzb")) == t})


def _as_form(f) -> tuple[Form, int]:
    """(form, degree) of a 0-form Expr, a BidegreeForm or a Form; only the (0, deg) part."""
    if isinstance(f, BidegreeForm):
        deg = f.degree()
        return f.component(0, deg).to_form(), deg
    if isinstance(f, Form):
        degs = f.degrees()
        if len(degs) > 1:
            raise ValueError("form is not homogeneous")
        return f, (degs.pop() if degs else 0)
    return Form.scalar(f), 0


def _integrate_split(w: Form, chain: Chain, ctx: PrecisionContext,
                     plan: AntiderivationPlan) -> dict:
    """Antiderivation of the zeta part, grouped by the trailing formal dzb monomial."""
    groups: dict = {}
    for key, c in w.terms.items():
        formal = tuple(int(s[3:]) for s in key if s.startswith("dzb"))
        real = tuple(s for s in key if not s.startswith("dzb"))
        groups.setdefault(formal, {})[real] = c
    out = {}
    for formal, terms in sorted(groups.items()):
        val = chain_antiderive(Form(terms), chain, ctx, plan)
        if formal in out:
            out[formal] = out[formal] + val
        else:
            out[formal] = val
    return out


def _collapse(vals: dict, out_degree: int, ctx: PrecisionContext):
    if out_degree == 0:
        return vals.get((), ExtElement.zero(ctx))
    return {k: v for k, v in vals.items() if len(k) == out_degree}


# q_m -------------------------------------------------------------------

@dataclass
class QmResult:
    value: ExtElement
    closed_form: ExtElement
    agree_to: int
    k: int
    sweep: dict


def q_m_at(ctx: PrecisionContext, config: KernelConfig, k: int, zv=None,
           plan: AntiderivationPlan | None = None) -> ExtElement:
    """P^n of w over the canonical border of the polydisc B(z, p^-k)."""
    plan = plan or config.plan_for(ctx)
    zp = _point(ctx, zv if zv is not None else (0,) * config.m, config.m)
    w = mb_kernel(zp, config, ctx).to_form()
    return chain_antiderive(w, canonical_border_ball(ctx, zp, -k, m=config.m), ctx, plan)


def q_m_constant(ctx: PrecisionContext, config: KernelConfig, zv=None, k: int | None = None,
                 steps: int = 4) -> QmResult:
    """Radius sweep for q_m, compared with C m (2 alpha)^(m-1)."""
    plan = config.plan_for(ctx)
    m = config.m
    C = cauchy_constant(ctx, plan)
    closed = C * m * (ctx.alpha * 2) ** (m - 1)
    if config.xi_shift:
        closed = closed * ExtElement.coerce(ctx, ctx.p ** (2 * (m - 1) * config.xi_shift))
    start = k if k is not None else 1
    vals, prev = {}, None
    for kk in range(start, start + steps):
        vals[kk] = q_m_at(ctx, config, kk, zv, plan)
        if prev is not None and agreement(vals[kk - 1], vals[kk]) >= plan.N_out:
            value = cap_precision(vals[kk], plan.N_out)
            return QmResult(value, closed, min(agreement(value, closed), plan.N_out), kk, vals)
        prev = vals[kk]
    raise NonConvergentSweep("q_m radius sweep did not stabilize")


def _q(ctx: PrecisionContext, config: KernelConfig, plan: AntiderivationPlan) -> ExtElement:
    """q_m from the closed form (the sweep agrees with it, see q_m_constant)."""
    m = config.m
    q = cauchy_constant(ctx, plan) * m * (ctx.alpha * 2) ** (m - 1)
    if config.xi_shift:
        q = q * ExtElement.coerce(ctx, ctx.p ** (2 * (m - 1) * config.xi_shift))
    return q


# Bochner-Martinelli operators -------------------------------------------

def boundary_chain(ctx: PrecisionContext, center, K: int, m: int) -> Chain:
    return canonical_border_ball(ctx, _point(ctx, center, m), K, m=m)


def bochner_ops(f, center, K: int, zv, which: str, config: KernelConfig,
                ctx: PrecisionContext, eps: int | None = None):
    """B_boundary or B_interior on the polydisc M = B(center, p^K), evaluated at z.

    The interior operator excises the polydisc B(z, p^-eps); with eps None
    the excision radius is swept until three consecutive values agree.
    """
    plan = config.plan_for(ctx)
    m = config.m
    zp = _point(ctx, zv, m)
    fo, deg = _as_form(f)
    q = _q(ctx, config, plan)
    kern = w_tilde(zp, config, ctx)
    if which == "B_boundary":
        if deg >= m:
            return _collapse({}, deg, ctx) if deg else ExtElement.zero(ctx)
        vals = _integrate_split(fo.wedge(upsilon(kern, deg)), boundary_chain(ctx, center, K, m),
                                ctx, plan)
        return _collapse({k: v / q for k, v in vals.items()}, deg, ctx)
    if which != "B_interior":
        raise ValueError("which is 'B_boundary' or 'B_interior'")
    if deg == 0 or deg > m:
        return ExtElement.zero(ctx) if deg <= 1 else {}
    if fo.is_zero():
        return ExtElement.zero(ctx) if deg == 1 else {}
    cell = Chain([(1, polydisc_cell(ctx, _point(ctx, center, m), K))])

    def at(e: int):
        cut = chi(_names(m), tuple(ext_const(c) for c in zp), -e, outside=True)
        vals = _integrate_split(fo.wedge(upsilon(kern, deg - 1)).scale(cut), cell, ctx, plan)
        return _collapse({k: v / q for k, v in vals.items()}, deg - 1, ctx)

    if eps is not None:
        return at(eps)
    return _eps_sweep(at, _eps_start(zp, center, K, ctx), plan.N_out)


def _eps_start(zp, center, K: int, ctx: PrecisionContext) -> int:
    return max(-K + 1, 1)


def _eps_sweep(at: Callable, start: int, target: int, steps: int = 6):
    vals = [at(start + i) for i in range(3)]
    for i in range(steps):
        if _zagree(vals[-3], vals[-2]) >= target and _zagree(vals[-2], vals[-1]) >= target:
            return vals[-1]
        vals.append(at(start + 3 + i))
    raise NonConvergentSweep("excision sweep did not stabilize")


def _zagree(a, b) -> int:
    if isinstance(a, ExtElement):
        return agreement(a, b)
    keys = set(a) | set(b)
    if not keys:
        return 1 << 20
    ctx = next(iter((a or b).values())).ctx
    zero = ExtElement.zero(ctx)
    return min(agreement(a.get(k, zero), b.get(k, zero)) for k in keys)


# Leray operators --------------------------------------------------------

@dataclass
class LerayResult:
    L: object
    R: object


def _v_parts(zp: Sequence[ExtElement], config: KernelConfig) -> tuple[list[Expr], dict]:
    """v as Exprs in zeta plus its d conj(z) derivatives {(k, l): Expr}."""
    m = config.m
    if config.v == "conjugate":
        vs = [add(zbar(k), mul(-1, ext_const(zp[k - 1].conjugate()))) for k in range(1, m + 1)]
        return vs, {(k, k): Const(-1) for k in range(1, m + 1)}
    vs = [lift(e) for e in config.v_map(tuple(zp))]
    return vs, dict(config.v_zbar or {})


def _dbar_zz(g: Expr, k: int, dz: Mapping, S: Expr, m: int) -> Form:
    """(d-bar in zeta and z) of Exp(S v_k) divided by itself, for S locally constant."""
    from .chains import dzetabar
    out = Form()
    for l in range(1, m + 1):
        c = derive(g, f"zb{l}")
        if c != ZERO:
            out = out + dzetabar(l).scale(mul(S, c))
        c = dz.get((k, l), ZERO)
        if c != ZERO:
            out = out + Form.basis(f"dzb{l}").scale(mul(S, c))
    return out


def psi_tilde(zv, config: KernelConfig, ctx: PrecisionContext) -> Form:
    """Leray kernel of the v choice; equals w_tilde for v = conj(zeta) - conj(z)."""
    from .chains import dzeta
    m = config.m
    zp = _point(ctx, zv, m)
    zc = [ext_const(c) for c in zp]
    S = _xi_scale(config, zp, ctx)
    vs, dz = _v_parts(zp, config)
    total = Form()
    for j in range(1, m + 1):
        term = dzeta(j).scale(mul((-1) ** (j + 1), recip(add(z(j), mul(-1, zc[j - 1])))))
        for k in range(1, m + 1):
            if k != j:
                term = term.wedge(_dbar_zz(vs[k - 1], k, dz, S, m).wedge(dzeta(k).scale(S)))
        total = total + term
    return total


def gamma_tilde(zv, config: KernelConfig, ctx: PrecisionContext) -> Form:
    """Kernel on (zeta, lambda) built from eta = (1 - lam/beta) xi(v) + (lam/beta) xi(conj difference).

    For the conjugate choice both summands coincide, eta = xi(v) does not
    depend on lam and the kernel is psi_tilde with no d lam component.
    """
    if config.v == "conjugate":
        return psi_tilde(zv, config, ctx)
    from .chains import dzeta, dzetabar
    m = config.m
    zp = _point(ctx, zv, m)
    zc = [ext_const(c) for c in zp]
    S = _xi_scale(config, zp, ctx)
    vs, dz = _v_parts(zp, config)
    lam = var("lam")
    wgt = mul(lam, recip(lift(ctx.beta)))
    one_minus = add(1, mul(-1, wgt))
    total = Form()
    for j in range(1, m + 1):
        term = dzeta(j).scale(mul((-1) ** (j + 1), recip(add(z(j), mul(-1, zc[j - 1])))))
        for k in range(1, m + 1):
            if k == j:
                continue
            xv = exp(mul(S, vs[k - 1]))
            xc = exp(mul(S, add(zbar(k), mul(-1, ext_const(zp[k - 1].conjugate())))))
            eta = add(mul(one_minus, xv), mul(wgt, xc))
            dform = Form()
            for l in range(1, m + 1):
                c = derive(eta, f"zb{l}")
                if c != ZERO:
                    dform = dform + dzetabar(l).scale(c)
                cz = add(mul(one_minus, xv, S, dz.get((k, l), ZERO)),
                         mul(wgt, xc, S, Const(-1) if k == l else ZERO))
                if cz != ZERO:
                    dform = dform + Form.basis(f"dzb{l}").scale(cz)
            dl = derive(eta, "lam")
            if dl != ZERO:
                dform = dform + Form.basis("dlam").scale(dl)
            term = term.wedge(dform.scale(recip(eta)).wedge(dzeta(k).scale(S)))
        total = total + term
    return total


def _with_lambda(chain: Chain, ctx: PrecisionContext) -> Chain:
    """Product of every border cell with the lambda cell U (origin 0, edge 1)."""
    zero, one = ExtElement.zero(ctx), ExtElement.coerce(ctx, 1)
    cells = []
    for s, c in chain.cells:
        edges = tuple(tuple(E) + (zero,) for E in c.edges) + (tuple([zero] * len(c.names)) + (one,),)
        cells.append((s, Cell(tuple(c.names) + ("lam",), tuple(c.origin) + (zero,), edges)))
    return Chain(cells)


def leray_ops(f, center, K: int, zv, config: KernelConfig, ctx: PrecisionContext) -> LerayResult:
    """L and R operators of the configured v on the border of B(center, p^K)."""
    plan = config.plan_for(ctx)
    m = config.m
    zp = _point(ctx, zv, m)
    fo, deg = _as_form(f)
    q = _q(ctx, config, plan)
    border = boundary_chain(ctx, center, K, m)
    if deg >= m:
        L = _collapse({}, deg, ctx)
    else:
        vals = _integrate_split(fo.wedge(upsilon(psi_tilde(zp, config, ctx), deg)), border, ctx, plan)
        L = _collapse({k: v / q for k, v in vals.items()}, deg, ctx)
    if deg == 0 or deg > m:
        R = ExtElement.zero(ctx) if deg <= 1 else {}
    else:
        vals = _integrate_split(fo.wedge(upsilon(gamma_tilde(zp, config, ctx), deg - 1)),
                                _with_lambda(border, ctx), ctx, plan)
        R = _collapse({k: v / q for k, v in vals.items()}, deg - 1, ctx)
    return LerayResult(L, R)


# Koppelman -------------------------------------------------------------

@dataclass
class KoppelmanReport:
    t: int
    lhs: dict
    boundary: dict
    interior_dbar: dict
    dbar_interior: dict
    defect: int
    details: dict = field(default_factory=dict)


def _zdict(v, ctx: PrecisionContext) -> dict:
    if isinstance(v, ExtElement):
        return {(): v}
    return dict(v)


def _zadd(*parts: tuple[int, dict]) -> dict:
    out: dict = {}
    for s, d in parts:
        for k, v in d.items():
            v = v if s == 1 else -v
            out[k] = out[k] + v if k in out else v
    return out


def _dbar_z(g: Callable, zp: Sequence[ExtElement], h_exp: int, ctx: PrecisionContext) -> dict:
    """d-bar in z of a z-form valued function by first difference quotients."""
    h = ExtElement.coerce(ctx, ctx.p ** h_exp)
    g0 = _zdict(g(zp), ctx)
    out: dict = {}
    for l in range(len(zp)):
        sx = list(zp)
        sx[l] = sx[l] + h
        sy = list(zp)
        sy[l] = sy[l] + ctx.alpha * h
        gx, gy = _zdict(g(tuple(sx)), ctx), _zdict(g(tuple(sy)), ctx)
        for key in set(g0) | set(gx) | set(gy):
            zero = ExtElement.zero(ctx)
            a, bx, by = g0.get(key, zero), gx.get(key, zero), gy.get(key, zero)
            c = ((bx - a) / h - ((by - a) / h) / ctx.alpha) / 2
            skey, sign = _perm_sort((l + 1,) + key)
            if sign == 0:
                continue
            c = c if sign == 1 else -c
            out[skey] = out[skey] + c if skey in out else c
    return out


def koppelman_check(f, center, K: int, zv, config: KernelConfig, ctx: PrecisionContext,
                    eps: int, h_exp: int = 2) -> KoppelmanReport:
    """(-1)^t f(z) against B_dM f - B_M dbar f + dbar B_M f on M = B(center, p^K).

    The last term uses difference quotients in conj(z) with step p^h_exp;
    every interior operator excises B(z, p^-eps).  The defect is the
    valuation of the difference, minimized over components.
    """
    m = config.m
    zp = _point(ctx, zv, m)
    if isinstance(f, BidegreeForm):
        bf = f
    elif isinstance(f, Form):
        raise TypeError("pass (0,t)-forms as BidegreeForm")
    else:
        bf = BidegreeForm.scalar(f)
    t = bf.degree()
    if bf.bidegrees() - {(0, t)}:
        raise ValueError("koppelman_check expects a (0,t)-form")
    point = {f"z{i + 1}": c for i, c in enumerate(zp)}
    lhs = {J: evaluate(c, point, ctx) for (_, J), c in bf.terms.items()}
    if t % 2:
        lhs = {k: -v for k, v in lhs.items()}
    bnd = _zdict(bochner_ops(bf, center, K, zp, "B_boundary", config, ctx), ctx)
    db = bf.dbar()
    if db.is_zero():
        idb = {}
    else:
        idb = _zdict(bochner_ops(db, center, K, zp, "B_interior", config, ctx, eps), ctx)
    if t == 0 or bf.is_zero():
        dbi = {}
    else:
        dbi = _dbar_z(lambda pt: bochner_ops(bf, center, K, pt, "B_interior", config, ctx, eps),
                      zp, h_exp, ctx)
    rhs = _zadd((1, bnd), (-1, idb), (1, dbi))
    diff = _zadd((1, lhs), (-1, rhs))
    defect = min((agreement(v, ExtElement.zero(ctx)) for v in diff.values()), default=1 << 20)
    return KoppelmanReport(t, lhs, bnd, idb, dbi, defect, {"eps": eps, "h_exp": h_exp})
