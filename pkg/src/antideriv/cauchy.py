"""One-variable antiderivational complex analysis over K(alpha).

Radius conventions: a *small* border ``k`` is the canonical border of
B(center, p^-k) (k grows as the border shrinks); a *large* border ``K``
is the canonical border of B(center, p^K).  When no border is given the
functions sweep the radius until two consecutive values agree to the
plan's output precision, which is then attached to the result.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

from .antiderivation import AntiderivationPlan, make_plan
from .chains import (Cell, Chain, Form, agreement, canonical_border_ball, canonical_loop_segments,
                     chain_antiderive, dzeta, dzetabar, polydisc_cell, segment)
from .errors import (IncompatibleData, NonConvergentSweep, NotHolomorphic, PoleHit, PoleOnNode,
                     ZeroConstant, ZeroOnBorder)
from .expr import (ZERO, Expr, add, chi, derive, evaluate, ext_const, free_vars, is_holomorphic,
                   lift, mul, power, recip, split_name, substitute, var, z, zbar)
from .padic import ExtElement, PrecisionContext
from .series import cap_precision

SWEEP_STEPS = 12


# the constant ---------------------------------------------------------

@dataclass(frozen=True)
class CauchyConstant:
    value: ExtElement = field(compare=False)
    n: int
    k: int
    sigma: str
    nonzero: bool


def small_border(ctx: PrecisionContext, center, k: int) -> Chain:
    """Canonical border of B(center, p^-k)."""
    return canonical_border_ball(ctx, center, -k)


def large_border(ctx: PrecisionContext, center, K: int) -> Chain:
    """Canonical border of B(center, p^K)."""
    return canonical_border_ball(ctx, center, K)


def loop_integral(f: Expr, border: Chain, ctx: PrecisionContext,
                  plan: AntiderivationPlan) -> ExtElement:
    """P^n of f(zeta) d zeta over a border chain in the variable z1."""
    return chain_antiderive(dzeta(1).scale(f), border, ctx, plan)


def compute_C_alpha(ctx: PrecisionContext, n: int | None = None, k: int = 2, center=0,
                    plan: AntiderivationPlan | None = None,
                    sigma_variant: str = "canonical") -> CauchyConstant:
    """Loop antiderivation of (zeta - z)^-1 d zeta around B(z, p^-k)."""
    plan = plan or make_plan(ctx, n=n, sigma_variant=sigma_variant)
    c = ext_const(ExtElement.coerce(ctx, center))
    val = loop_integral(recip(add(z(1), mul(-1, c))), small_border(ctx, center, k), ctx, plan)
    nonzero = not val.is_zero() and val.v < plan.N_out
    return CauchyConstant(val, plan.n, k, plan.sigma, nonzero)


@lru_cache(maxsize=256)
def _constant(ctx: PrecisionContext, plan: AntiderivationPlan) -> ExtElement:
    return compute_C_alpha(ctx, plan=plan, k=1).value


def cauchy_constant(ctx: PrecisionContext, plan: AntiderivationPlan) -> ExtElement:
    C = _constant(ctx, plan)
    if C.is_zero() or C.v >= plan.N_out:
        raise ZeroConstant("the loop constant is indistinguishable from 0")
    return C


def constant_grid(ctx: PrecisionContext, ns: Iterable[int] = (1, 2, 3),
                  ks: Iterable[int] = (2, 3, 4, 5, 6), center=0,
                  sigma_variant: str = "canonical") -> dict:
    """Values over the (n, k) grid and the defects against the first entry."""
    values = {}
    for n in ns:
        for k in ks:
            plan = make_plan(ctx, n=n, sigma_variant=sigma_variant)
            values[(n, k)] = compute_C_alpha(ctx, k=k, center=center, plan=plan).value
    ref_key = next(iter(values))
    ref = values[ref_key]
    radius_defect = {}
    for n in ns:
        row = [values[(n, k)] for k in ks]
        radius_defect[n] = min(agreement(row[0], v) for v in row)
    n_defect = {}
    for (n, k), v in values.items():
        n_defect[(n, k)] = agreement(ref, v)
    return {"values": values, "radius_defect": radius_defect, "n_defect": n_defect,
            "reference": ref_key}


# radius sweeps ---------------------------------------------------------

def _start_small(plan: AntiderivationPlan, extra: int = 0) -> int:
    return max(1, -(-(plan.N_out + extra) // (plan.n + 1)))


def sweep(compute: Callable[[int], ExtElement], start: int, target: int,
          step: int = 1, steps: int = SWEEP_STEPS) -> tuple[ExtElement, int]:
    """First value whose successor agrees with it to valuation ``target``."""
    prev = None
    k = start
    for _ in range(steps):
        val = compute(k)
        if prev is not None and agreement(prev, val) >= target:
            return cap_precision(val, target), k
        prev = val
        k += step
    raise NonConvergentSweep(f"radius sweep from {start} did not stabilize to p^{target}")


def _zc(ctx: PrecisionContext, zv) -> Expr:
    return ext_const(ExtElement.coerce(ctx, zv))


def _check_holo(f: Expr) -> None:
    if not is_holomorphic(f):
        raise NotHolomorphic(f"{f} depends on conj(z)")


def cauchy_eval(f: Expr, zv, ctx: PrecisionContext, plan: AntiderivationPlan | None = None,
                border: Chain | None = None, k: int | None = None) -> ExtElement:
    """C^-1 P^n[f(zeta)(zeta - z)^-1 d zeta] over a border around z."""
    plan = plan or make_plan(ctx)
    _check_holo(f)
    C = cauchy_constant(ctx, plan)
    integrand = mul(f, recip(add(z(1), mul(-1, _zc(ctx, zv)))))

    def at(kk: int) -> ExtElement:
        return loop_integral(integrand, small_border(ctx, zv, kk), ctx, plan) / C

    if border is not None:
        return cap_precision(loop_integral(integrand, border, ctx, plan) / C, plan.N_out)
    if k is not None:
        return cap_precision(at(k), plan.N_out)
    return sweep(at, _start_small(plan), plan.N_out)[0]


def loop_vanishing(f: Expr, zv, ctx: PrecisionContext, plan: AntiderivationPlan | None = None,
                   k: int | None = None) -> ExtElement:
    """P^n[f d zeta] around a small border at z; 0 for holomorphic f."""
    plan = plan or make_plan(ctx)

    def at(kk: int) -> ExtElement:
        return loop_integral(f, small_border(ctx, zv, kk), ctx, plan)

    if k is not None:
        return cap_precision(at(k), plan.N_out)
    return sweep(at, _start_small(plan), plan.N_out)[0]


def _fact(m: int) -> int:
    out = 1
    for i in range(2, m + 1):
        out *= i
    return out


def torus_chain(ctx: PrecisionContext, centers: Sequence, k: int) -> Chain:
    """Product of small loops around each center (the distinguished boundary)."""
    loops = [canonical_loop_segments(ctx, c, -k) for c in centers]
    m = len(centers)
    names = tuple(f"z{i + 1}" for i in range(m))
    beta = ExtElement.coerce(ctx, ctx.beta)
    zero = ExtElement.zero(ctx)
    out = []
    for pieces in itertools.product(*loops):
        origin = tuple(a for a, _ in pieces)
        edges = []
        for i, (a, b) in enumerate(pieces):
            e = [zero] * m
            e[i] = (b - a) / beta
            edges.append(tuple(e))
        out.append((1, Cell(names, origin, tuple(edges))))
    return Chain(out)


def taylor_coeff(f: Expr, zv, order, ctx: PrecisionContext,
                 plan: AntiderivationPlan | None = None, k: int | None = None) -> ExtElement:
    """d^order f / dz^order at z via k! C^-m P^n[f prod (zeta_i - z_i)^(-k_i-1) d zeta]."""
    plan = plan or make_plan(ctx)
    _check_holo(f)
    C = cauchy_constant(ctx, plan)
    orders = tuple(order) if isinstance(order, (tuple, list)) else (order,)
    pts = tuple(zv) if isinstance(zv, (tuple, list)) else (zv,)
    m = len(orders)
    factors = [f]
    for i, (o, c) in enumerate(zip(orders, pts)):
        factors.append(power(add(z(i + 1), mul(-1, _zc(ctx, c))), -o - 1))
    integrand = mul(*factors)
    form = Form.scalar(integrand)
    for i in range(m):
        form = form.wedge(dzeta(i + 1))
    scale = 1
    for o in orders:
        scale *= _fact(o)
    Cm = C ** m

    def at(kk: int) -> ExtElement:
        chain = small_border(ctx, pts[0], kk) if m == 1 else torus_chain(ctx, pts, kk)
        return chain_antiderive(form, chain, ctx, plan) * scale / Cm

    if k is not None:
        return cap_precision(at(k), plan.N_out)
    # larger radii exponents lose absolute digits to the (zeta - z)^(-order-1) factor
    return sweep(at, _start_small(plan), plan.N_out)[0]


# Laurent series ----------------------------------------------------------

@dataclass
class LaurentSeries:
    center: ExtElement
    coeffs: dict
    window: tuple
    R: int
    annulus: tuple = (None, None)
    precision: int = 0

    def evaluate(self, zeta) -> ExtElement:
        ctx = self.center.ctx
        w = ExtElement.coerce(ctx, zeta) - self.center
        total = ExtElement.zero(ctx)
        for k, a in self.coeffs.items():
            total = total + a * (w ** k)
        return total

    @property
    def residue(self) -> ExtElement:
        return self.coeffs.get(-1, ExtElement.zero(self.center.ctx))

    def nonzero_indices(self) -> list[int]:
        return sorted(k for k, a in self.coeffs.items() if not a.is_zero())


def laurent_plan(ctx: PrecisionContext, n: int = 6) -> AntiderivationPlan:
    """Default Laurent plan: loops are exact on polynomials of degree < n, so n >= 6 covers [-3, 3]."""
    return make_plan(ctx, n=n)


def laurent_coeffs(f: Expr, xi, window: tuple[int, int], ctx: PrecisionContext,
                   R: int | None = None, plan: AntiderivationPlan | None = None,
                   annulus: tuple = (None, None)) -> LaurentSeries:
    """a_k = C^-1 P^n[(zeta - xi)^(-k-1) f d zeta] over the border of B(xi, p^R).

    ``annulus`` = (R1, R2) as radius exponents; R must lie strictly between.
    Without R the radius is swept upward (only allowed for an unbounded annulus).
    """
    plan = plan or laurent_plan(ctx)
    _check_holo(f)
    C = cauchy_constant(ctx, plan)
    xe = ExtElement.coerce(ctx, xi)
    w = add(z(1), mul(-1, ext_const(xe)))
    R1, R2 = annulus
    kmin, kmax = window

    def coeffs_at(RR: int) -> dict:
        border = large_border(ctx, xe, RR)
        return {k: loop_integral(mul(power(w, -k - 1), f), border, ctx, plan) / C
                for k in range(kmin, kmax + 1)}

    if R is not None:
        if (R1 is not None and R <= R1) or (R2 is not None and R >= R2):
            raise ValueError("R must lie inside the annulus")
        vals = coeffs_at(R)
        prec = plan.N_out
    else:
        if R2 is not None:
            raise ValueError("give R explicitly for a bounded annulus")
        # each coefficient is independent of the radius, so each one is taken at the
        # first radius where it stabilizes; high powers of a large radius eat absolute
        # precision, so a common radius need not exist
        start = (R1 + 1) if R1 is not None else 1
        prev, vals = None, {}
        RR = start
        for _ in range(SWEEP_STEPS):
            cur = coeffs_at(RR)
            if prev is not None:
                for k in cur:
                    if k not in vals and agreement(prev[k], cur[k]) >= plan.N_out:
                        vals[k] = cur[k]
            if len(vals) == kmax - kmin + 1:
                break
            prev = cur
            RR += 1
        else:
            raise NonConvergentSweep("Laurent radius sweep did not stabilize")
        R = RR
        prec = plan.N_out
    vals = {k: cap_precision(v, prec) for k, v in vals.items()}
    return LaurentSeries(xe, vals, window, R, annulus, prec)


def classify_critical_point(laurent: LaurentSeries) -> tuple:
    """('removable',), ('pole', order) or ('essential-window',), relative to the window."""
    neg = [k for k in laurent.nonzero_indices() if k < 0]
    if not neg:
        return ("removable",)
    low = min(neg)
    if low <= laurent.window[0]:
        return ("essential-window",)
    return ("pole", -low)


# residues ---------------------------------------------------------------

def residue(f: Expr, zv, ctx: PrecisionContext, plan: AntiderivationPlan | None = None,
            k: int | None = None) -> ExtElement:
    """C^-1 P^n[f d zeta] over a small border around z."""
    plan = plan or make_plan(ctx)
    C = cauchy_constant(ctx, plan)

    def at(kk: int) -> ExtElement:
        return loop_integral(f, small_border(ctx, zv, kk), ctx, plan) / C

    if k is not None:
        return cap_precision(at(k), plan.N_out)
    return sweep(at, _start_small(plan), plan.N_out)[0]


def _start_large(f: Expr, ctx: PrecisionContext, plan: AntiderivationPlan,
                 poles: Sequence = ()) -> int:
    vmin = min([ExtElement.coerce(ctx, c).v for c in poles if not ExtElement.coerce(ctx, c).is_zero()] + [0])
    return max(1, -vmin + 1)


def residue_at_A(f: Expr, ctx: PrecisionContext, plan: AntiderivationPlan | None = None,
                 K: int | None = None, poles: Sequence = ()) -> ExtElement:
    """-C^-1 P^n[f d zeta] over the border of a large ball B(0, p^K)."""
    plan = plan or make_plan(ctx)
    C = cauchy_constant(ctx, plan)

    def at(KK: int) -> ExtElement:
        return -loop_integral(f, large_border(ctx, 0, KK), ctx, plan) / C

    if K is not None:
        return cap_precision(at(K), plan.N_out)
    return sweep(at, _start_large(f, ctx, plan, poles), plan.N_out)[0]


@dataclass
class CheckReport:
    lhs: ExtElement
    rhs: ExtElement
    defect: int
    precision: int
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.defect >= self.precision


def residue_theorem_check(f: Expr, poles: Sequence, ctx: PrecisionContext,
                          plan: AntiderivationPlan | None = None, K: int | None = None) -> CheckReport:
    """P^n[f d zeta] over a border enclosing the poles against C * sum of residues."""
    plan = plan or make_plan(ctx)
    C = cauchy_constant(ctx, plan)
    if K is None:
        lhs, K = sweep(lambda KK: loop_integral(f, large_border(ctx, 0, KK), ctx, plan),
                       _start_large(f, ctx, plan, poles), plan.N_out)
    else:
        lhs = loop_integral(f, large_border(ctx, 0, K), ctx, plan)
    res = [residue(f, c, ctx, plan) for c in poles]
    rhs = ExtElement.zero(ctx)
    for r in res:
        rhs = rhs + r
    rhs = rhs * C
    return CheckReport(lhs, rhs, agreement(lhs, rhs), plan.N_out,
                       {"K": K, "residues": res})


def argument_principle(f: Expr, ctx: PrecisionContext, plan: AntiderivationPlan | None = None,
                       K: int | None = None, points: Sequence = (), bound: int = 64) -> tuple[int, int]:
    """N - P as C^-1 P^n[f'/f d zeta] over a large border, rounded to an integer.

    Returns (integer, valuation of the rounding distance).
    """
    plan = plan or make_plan(ctx)
    C = cauchy_constant(ctx, plan)
    integrand = mul(derive(f, "z1"), recip(f))

    def at(KK: int) -> ExtElement:
        try:
            return loop_integral(integrand, large_border(ctx, 0, KK), ctx, plan) / C
        except PoleHit as exc:
            raise ZeroOnBorder(str(exc)) from exc

    if K is None:
        val, K = sweep(at, _start_large(f, ctx, plan, points), plan.N_out)
    else:
        val = at(K)
    best, best_d = None, None
    for cand in range(-bound, bound + 1):
        d = agreement(val, ExtElement.coerce(ctx, cand))
        if best_d is None or d > best_d:
            best, best_d = cand, d
    return best, best_d


# d-bar solvers ---------------------------------------------------------

@dataclass
class DbarResult:
    value: ExtElement
    eps: int
    sweep: dict
    stable: bool


def _area_form(integrand: Expr) -> Form:
    return dzetabar(1).wedge(dzeta(1)).scale(integrand)


def dbar_solve_1d(f: Expr, center, K: int, zv, eps: int, ctx: PrecisionContext,
                  plan: AntiderivationPlan | None = None) -> ExtElement:
    """u(z) = conj(z) C^-1 P^n_dM[f (zeta-z)^-1 d zeta] - C^-1 P^n_M[f (zeta-z)^-1 dzetabar^dzeta].

    M = B(center, p^K); the area term omits B(z, p^-eps).
    """
    plan = plan or make_plan(ctx)
    C = cauchy_constant(ctx, plan)
    ze = ExtElement.coerce(ctx, zv)
    zc = ext_const(ze)
    kern = recip(add(z(1), mul(-1, zc)))
    boundary_term = loop_integral(mul(f, kern), large_border(ctx, center, K), ctx, plan)
    excised = mul(chi("z1", zc, -eps, outside=True), f, kern)
    area = chain_antiderive(_area_form(excised), Chain([(1, polydisc_cell(ctx, center, K))]), ctx, plan)
    return (ze.conjugate() * boundary_term - area) / C


def dbar_sweep(solver: Callable[[int], ExtElement], eps_values: Sequence[int],
               target: int) -> DbarResult:
    """Stabilization across three consecutive eps values is the convergence criterion."""
    vals = {e: solver(e) for e in eps_values}
    es = list(eps_values)
    stable = False
    for i in range(len(es) - 2):
        a, b, c = vals[es[i]], vals[es[i + 1]], vals[es[i + 2]]
        if agreement(a, b) >= target and agreement(b, c) >= target:
            stable = True
            return DbarResult(vals[es[i + 2]], es[i + 2], vals, True)
    return DbarResult(vals[es[-1]], es[-1], vals, stable)


def dbar_quotient(u: Callable[[ExtElement], ExtElement], zv, h_exp: int,
                  ctx: PrecisionContext) -> ExtElement:
    """(D_x - alpha^-1 D_y)/2 by first difference quotients with step p^h_exp."""
    ze = ExtElement.coerce(ctx, zv)
    h = ExtElement.coerce(ctx, ctx.p ** h_exp)
    u0 = u(ze)
    dx = (u(ze + h) - u0) / h
    dy = (u(ze + ctx.alpha * h) - u0) / h
    return (dx - dy / ctx.alpha) / 2


def check_compatibility(fs: Sequence[Expr], ctx: PrecisionContext, samples: int = 5,
                        seed: int = 0) -> bool:
    """d f_j/d conj(z_l) = d f_l/d conj(z_j): symbolic equality or identity on random points."""
    m = len(fs)
    rng = random.Random(seed)
    for j in range(m):
        for l in range(j + 1, m):
            a = derive(fs[j], f"zb{l + 1}")
            b = derive(fs[l], f"zb{j + 1}")
            if a == b:
                continue
            diff = add(a, mul(-1, b))
            for _ in range(samples):
                pt = {f"z{i + 1}": ExtElement._make(ctx, 0, rng.randrange(ctx.p ** 6),
                                                    rng.randrange(ctx.p ** 6), ctx.wp)
                      for i in range(m)}
                try:
                    if not evaluate(diff, pt, ctx).is_zero():
                        return False
                except PoleHit:
                    continue
    return True


def dbar_solve_multi(fs: Sequence[Expr], center, K: int, zv, eps: int, ctx: PrecisionContext,
                     plan: AntiderivationPlan | None = None) -> ExtElement:
    """u(z) = C^-1 sum_j conj(z_j) P^n_{dOmega_j}[f_j(..zeta..)(zeta - z_j)^-1 d zeta]
    - C^-1 P^n_{Omega_1}[f_1(zeta, z_2, ...)(zeta - z_1)^-1 dzetabar ^ d zeta]  (eps-excised).
    """
    plan = plan or make_plan(ctx)
    m = len(fs)
    if m > 2:
        raise ValueError("implemented for m <= 2")
    if not check_compatibility(fs, ctx):
        raise IncompatibleData("compatibility condition fails")
    C = cauchy_constant(ctx, plan)
    pts = [ExtElement.coerce(ctx, c) for c in (zv if isinstance(zv, (tuple, list)) else (zv,))]
    cen = [ExtElement.coerce(ctx, c) for c in (center if isinstance(center, (tuple, list)) else (center,))]
    total = ExtElement.zero(ctx)
    for j in range(1, m + 1):
        g = _slice(fs[j - 1], j, pts, ctx)
        kern = recip(add(z(1), mul(-1, ext_const(pts[j - 1]))))
        bt = loop_integral(mul(g, kern), large_border(ctx, cen[j - 1], K), ctx, plan)
        total = total + pts[j - 1].conjugate() * bt
    g1 = _slice(fs[0], 1, pts, ctx)
    zc = ext_const(pts[0])
    kern = recip(add(z(1), mul(-1, zc)))
    excised = mul(chi("z1", zc, -eps, outside=True), g1, kern)
    area = chain_antiderive(_area_form(excised), Chain([(1, polydisc_cell(ctx, cen[0], K))]), ctx, plan)
    return (total - area) / C


def _slice(f: Expr, j: int, pts: Sequence[ExtElement], ctx: PrecisionContext) -> Expr:
    """Restrict f to the j-th coordinate line through pts, renamed to z1."""
    frozen = {}
    for i, c in enumerate(pts, start=1):
        if i == j:
            continue
        frozen[f"z{i}"] = ext_const(c)
        frozen[f"zb{i}"] = ext_const(c.conjugate())
        frozen[f"x{i}"] = ext_const(ExtElement.coerce(ctx, c.re))
        frozen[f"y{i}"] = ext_const(ExtElement.coerce(ctx, c.im))
    g = substitute(f, frozen)
    if j == 1:
        return g
    return substitute(g, {f"{kind}{j}": var(f"{kind}1") for kind in ("z", "zb", "x", "y")})
