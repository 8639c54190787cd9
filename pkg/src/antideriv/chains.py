"""Differential forms, affine cells and chains, boundaries and canonical borders.

A cell is the affine image of U^k (U the unit ball of K): the point with
parameters (s_1, ..., s_k) is origin + sum_i s_i E_i, and every parameter
runs from 0 to beta.  A segment [a, b] therefore has E = (b - a)/beta.
Coordinates of the ambient space are either complex (``z1``, ``z2``) or
real (``t1``, ``t2``, ...).  Forms are written in the real basis
dx_k, dy_k, dt_k; d zeta_k = dx_k + alpha dy_k.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .antiderivation import AntiderivationPlan, grid_sum, make_plan
from .errors import DegreeMismatch
from .expr import (ALPHA, ONE, ZERO, Evaluator, Expr, add, derive, free_vars, lift, mul,
                   point_env, split_name)
from .padic import ExtElement, PrecisionContext

_SYM_RE = re.compile(r"^d(x|y|t|lam|zb)([0-9]*)$")
_KIND_RANK = {"x": 0, "y": 1}


def _sym_key(sym: str) -> tuple:
    m = _SYM_RE.match(sym)
    if not m:
        raise ValueError(f"unknown basis differential {sym!r}")
    kind, idx = m.group(1), int(m.group(2) or 0)
    if kind in ("x", "y"):
        return (0, idx, _KIND_RANK[kind])
    if kind == "t":
        return (1, idx, 0)
    if kind == "lam":
        return (2, 0, 0)
    return (3, idx, 0)  # formal differentials of the evaluation point


def _sort_sign(syms: Sequence[str]) -> tuple[tuple[str, ...], int]:
    """Sorted tuple and the sign of the sorting permutation (0 on repeats)."""
    if len(set(syms)) != len(syms):
        return (), 0
    items = list(syms)
    sign = 1
    for i in range(len(items)):
        for j in range(len(items) - 1 - i):
            if _sym_key(items[j]) > _sym_key(items[j + 1]):
                items[j], items[j + 1] = items[j + 1], items[j]
                sign = -sign
    return tuple(items), sign


class Form:
    """Finite sum of Expr coefficients times wedge monomials in basis differentials."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, Expr] | None = None):
        clean = {}
        for key, coeff in (terms or {}).items():
            coeff = lift(coeff)
            skey, sign = _sort_sign(key)
            if sign == 0 or coeff == ZERO:
                continue
            c = coeff if sign == 1 else mul(-1, coeff)
            clean[skey] = add(clean[skey], c) if skey in clean else c
        self.terms = {k: v for k, v in clean.items() if v != ZERO}

    @classmethod
    def scalar(cls, f) -> "Form":
        return cls({(): lift(f)})

    @classmethod
    def basis(cls, *syms: str) -> "Form":
        return cls({tuple(syms): ONE})

    def degrees(self) -> set[int]:
        return {len(k) for k in self.terms}

    def component(self, degree: int) -> "Form":
        return Form({k: v for k, v in self.terms.items() if len(k) == degree})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, o: "Form") -> "Form":
        terms = dict(self.terms)
        for k, v in o.terms.items():
            terms[k] = add(terms[k], v) if k in terms else v
        return Form(terms)

    def __neg__(self) -> "Form":
        return Form({k: mul(-1, v) for k, v in self.terms.items()})

    def __sub__(self, o: "Form") -> "Form":
        return self + (-o)

    def scale(self, f) -> "Form":
        f = lift(f)
        return Form({k: mul(f, v) for k, v in self.terms.items()})

    def wedge(self, o: "Form") -> "Form":
        out: dict = {}
        for (k1, v1), (k2, v2) in itertools.product(self.terms.items(), o.terms.items()):
            skey, sign = _sort_sign(k1 + k2)
            if sign == 0:
                continue
            c = mul(sign, v1, v2)
            out[skey] = add(out[skey], c) if skey in out else c
        return Form(out)

    __xor__ = wedge

    def d(self) -> "Form":
        """Exterior derivative in the real variables (formal dzb symbols are constants)."""
        out = Form()
        for key, coeff in self.terms.items():
            for sym, v in _differentials(coeff):
                dc = derive(coeff, v)
                if dc != ZERO:
                    out = out + Form({(sym,) + key: dc})
        return out

    def __repr__(self):
        parts = [f"({v})*{'^'.join(k) if k else '1'}" for k, v in sorted(self.terms.items(),
                 key=lambda kv: [_sym_key(s) for s in kv[0]])]
        return " + ".join(parts) if parts else "0"


def _differentials(coeff: Expr) -> list[tuple[str, str]]:
    out = set()
    for v in free_vars(coeff):
        kind, idx = split_name(v)
        if kind in ("z", "zb", "x", "y"):
            out.add((f"dx{idx}", f"x{idx}"))
            out.add((f"dy{idx}", f"y{idx}"))
        elif kind == "t":
            out.add((f"dt{idx}" if idx else "dt", v))
        else:
            out.add(("dlam", "lam"))
    return sorted(out, key=lambda sv: _sym_key(sv[0]))


def dzeta(k: int = 1) -> Form:
    return Form({(f"dx{k}",): ONE, (f"dy{k}",): ALPHA})


def dzetabar(k: int = 1) -> Form:
    return Form({(f"dx{k}",): ONE, (f"dy{k}",): mul(-1, ALPHA)})


def dt(k: int = 0) -> Form:
    return Form.basis(f"dt{k}" if k else "dt")


# cells and chains -------------------------------------------------------

def _point_key(pt: Sequence[ExtElement]) -> tuple:
    return tuple((x.v, x.a, x.b) if not x.is_zero() else ("0",) for x in pt)


@dataclass(frozen=True)
class Cell:
    """origin + sum_i s_i E_i for s in U^k, each s_i running from 0 to beta."""

    names: tuple
    origin: tuple
    edges: tuple = ()

    @property
    def dim(self) -> int:
        return len(self.edges)

    def key(self) -> tuple:
        return (self.names, _point_key(self.origin), tuple(_point_key(e) for e in self.edges))

    def point(self, params: Sequence) -> tuple:
        out = list(self.origin)
        for s, E in zip(params, self.edges):
            out = [o + e * s for o, e in zip(out, E)]
        return tuple(out)

    def faces(self) -> list[tuple[int, "Cell"]]:
        """Signed faces: sum_i (-1)^(i+1) (F_i^1 - F_i^0), i counted from 1."""
        ctx = self.origin[0].ctx
        beta = ExtElement.coerce(ctx, ctx.beta)
        out = []
        for i in range(self.dim):
            rest = self.edges[:i] + self.edges[i + 1:]
            far = tuple(o + e * beta for o, e in zip(self.origin, self.edges[i]))
            sgn = 1 if i % 2 == 0 else -1
            out.append((sgn, Cell(self.names, far, rest)))
            out.append((-sgn, Cell(self.names, self.origin, rest)))
        return out


class Chain:
    """Formal integer combination of cells."""

    __slots__ = ("cells",)

    def __init__(self, cells: Iterable[tuple[int, Cell]] = ()):
        self.cells = [(int(s), c) for s, c in cells if s != 0]

    def __add__(self, o: "Chain") -> "Chain":
        return Chain(self.cells + o.cells)

    def __neg__(self) -> "Chain":
        return Chain([(-s, c) for s, c in self.cells])

    def __sub__(self, o: "Chain") -> "Chain":
        return self + (-o)

    def scaled(self, k: int) -> "Chain":
        return Chain([(k * s, c) for s, c in self.cells])

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def dims(self) -> set[int]:
        return {c.dim for _, c in self.cells}

    def simplify(self) -> "Chain":
        acc: dict = {}
        order = []
        for s, c in self.cells:
            k = c.key()
            if k not in acc:
                acc[k] = [0, c]
                order.append(k)
            acc[k][0] += s
        return Chain([(acc[k][0], acc[k][1]) for k in order if acc[k][0] != 0])

    def is_empty(self) -> bool:
        return not self.simplify().cells


def boundary(c: Chain) -> Chain:
    out = []
    for s, cell in c.cells:
        if cell.dim == 0:
            raise ValueError("the boundary of a point chain is undefined here")
        for fs, face in cell.faces():
            out.append((s * fs, face))
    return Chain(out)


def _coerce_pt(ctx: PrecisionContext, pt) -> tuple:
    pts = pt if isinstance(pt, (tuple, list)) else (pt,)
    return tuple(ExtElement.coerce(ctx, x) for x in pts)


def segment(ctx: PrecisionContext, a, b, names: Sequence[str] = ("z1",)) -> Cell:
    """[a, b] with gamma(t) = (1 - t/beta) a + (t/beta) b."""
    a, b = _coerce_pt(ctx, a), _coerce_pt(ctx, b)
    beta = ExtElement.coerce(ctx, ctx.beta)
    return Cell(tuple(names), a, (tuple((y - x) / beta for x, y in zip(a, b)),))


def point_cell(ctx: PrecisionContext, a, names: Sequence[str] = ("z1",)) -> Cell:
    return Cell(tuple(names), _coerce_pt(ctx, a), ())


def parallelepiped(ctx: PrecisionContext, vertices: Sequence, names: Sequence[str]) -> Cell:
    """[v_0, v_1] x ... x [v_{k-1}, v_k]: edge i is (v_i - v_{i-1})/beta."""
    vs = [_coerce_pt(ctx, v) for v in vertices]
    beta = ExtElement.coerce(ctx, ctx.beta)
    edges = tuple(tuple((y - x) / beta for x, y in zip(vs[i - 1], vs[i])) for i in range(1, len(vs)))
    return Cell(tuple(names), vs[0], edges)


def cube(ctx: PrecisionContext, k: int, scale_exps: Sequence[int] | None = None,
         names: Sequence[str] | None = None) -> Cell:
    """[0, beta p^j_1] x ... in real coordinates t1..tk (edge i is p^j_i e_i)."""
    names = tuple(names or [f"t{i + 1}" for i in range(k)])
    scale_exps = list(scale_exps or [0] * k)
    zero = ExtElement.zero(ctx)
    edges = []
    for i in range(k):
        e = [zero] * k
        e[i] = ExtElement.coerce(ctx, ctx.p ** scale_exps[i])
        edges.append(tuple(e))
    return Cell(names, tuple([zero] * k), tuple(edges))


@dataclass(frozen=True)
class Simplex:
    vertices: tuple

    def boundary(self) -> list[tuple[int, "Simplex"]]:
        q = len(self.vertices) - 1
        return [((-1) ** l, Simplex(self.vertices[:l] + self.vertices[l + 1:])) for l in range(q + 1)]


def simplex_boundary_chain(s: Simplex) -> list[tuple[int, Simplex]]:
    return s.boundary()


# canonical borders ------------------------------------------------------

def _loop_corners(ctx: PrecisionContext) -> list[ExtElement]:
    """Corners (x, y) = (-b,-b), (b,-b), (b,b), (-b,b) with b = beta, as x + alpha y."""
    b = ExtElement.coerce(ctx, ctx.beta)
    a = ctx.alpha
    pairs = [(-1, -1), (1, -1), (1, 1), (-1, 1)]
    return [b * sx + a * b * sy for sx, sy in pairs]


def canonical_loop_segments(ctx: PrecisionContext, center, k: int) -> list[tuple[ExtElement, ExtElement]]:
    """Corner pairs of z + p^-k * (unit loop), the border of B(z, p^k)."""
    z0 = ExtElement.coerce(ctx, center)
    scale = ExtElement(ctx, -k, 1, 0, ctx.wp)
    cs = [z0 + scale * c for c in _loop_corners(ctx)]
    return [(cs[i], cs[(i + 1) % 4]) for i in range(4)]


def canonical_border_ball(ctx: PrecisionContext, center, k: int, m: int = 1) -> Chain:
    """Canonical oriented border of the ball (polydisc) of radius p^k around center.

    For m = 2 the border is sum_j (-1)^(j+1) B^(j-1) x dB x B^(m-j), where
    a ball factor around c is c + p^-k (s_a + alpha s_b), s in U^2.
    """
    centers = _coerce_pt(ctx, center)
    if m == 1 and len(centers) == 1:
        return Chain([(1, segment(ctx, a, b, ("z1",))) for a, b in
                      canonical_loop_segments(ctx, centers[0], k)])
    if len(centers) != m or m > 2:
        raise ValueError("polydisc borders are implemented for m <= 2")
    names = tuple(f"z{i + 1}" for i in range(m))
    zero = ExtElement.zero(ctx)
    scale = ExtElement(ctx, -k, 1, 0, ctx.wp)
    beta = ExtElement.coerce(ctx, ctx.beta)
    out = []
    for j in range(m):
        for a, b in canonical_loop_segments(ctx, centers[j], k):
            origin, edges = [], []
            for i in range(m):
                if i == j:
                    origin.append(a)
                else:
                    origin.append(centers[i])
            for i in range(m):
                if i < j:
                    for g in (scale, scale * ctx.alpha):
                        e = [zero] * m
                        e[i] = g
                        edges.append(tuple(e))
                elif i == j:
                    e = [zero] * m
                    e[i] = (b - a) / beta
                    edges.append(tuple(e))
                else:
                    pass
            for i in range(j + 1, m):
                for g in (scale, scale * ctx.alpha):
                    e = [zero] * m
                    e[i] = g
                    edges.append(tuple(e))
            out.append((1 if j % 2 == 0 else -1, Cell(names, tuple(origin), tuple(edges))))
    return Chain(out)


def polydisc_cell(ctx: PrecisionContext, center, k: int) -> Cell:
    """The polydisc B(center, p^k) as a 2m-cell c + p^-k (s_1 + alpha s_2, ...)."""
    centers = _coerce_pt(ctx, center)
    m = len(centers)
    zero = ExtElement.zero(ctx)
    scale = ExtElement(ctx, -k, 1, 0, ctx.wp)
    edges = []
    for i in range(m):
        for g in (scale, scale * ctx.alpha):
            e = [zero] * m
            e[i] = g
            edges.append(tuple(e))
    return Cell(tuple(f"z{i + 1}" for i in range(m)), centers, tuple(edges))


# pullback and antiderivation --------------------------------------------

def _coord_differentials(cell: Cell) -> dict[str, list[ExtElement]]:
    """d(ambient real coordinate) = sum_i c_i ds_i for each basis symbol."""
    out = {}
    for pos, name in enumerate(cell.names):
        kind, idx = split_name(name)
        if kind == "z":
            out[f"dx{idx}"] = [E[pos].re for E in cell.edges]
            out[f"dy{idx}"] = [E[pos].im for E in cell.edges]
        elif kind == "t":
            out[f"dt{idx}" if idx else "dt"] = [E[pos].re for E in cell.edges]
        else:
            out["dlam"] = [E[pos].re for E in cell.edges]
    return out


def _det(rows: list[list]) -> object:
    n = len(rows)
    if n == 0:
        return 1
    total = None
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = None
        for r, c in enumerate(perm):
            term = rows[r][c] if term is None else term * rows[r][c]
        if inv % 2:
            term = -term
        total = term if total is None else total + term
    return total


def pullback_coefficient(w: Form, cell: Cell) -> Expr:
    """Coefficient of ds_1 ^ ... ^ ds_k in the pullback of the degree-k part of w."""
    k = cell.dim
    diffs = _coord_differentials(cell)
    acc = []
    for key, coeff in w.component(k).terms.items():
        if any(s not in diffs for s in key):
            if any(_SYM_RE.match(s).group(1) == "zb" for s in key):
                continue  # formal differentials are not integrated
            raise DegreeMismatch(f"form uses {key} but the cell spans {cell.names}")
        rows = [diffs[s] for s in key]
        det = _det(rows)
        if det.is_zero():
            continue
        acc.append(mul(lift(ExtElement.coerce(det.ctx, det)), coeff))
    return add(*acc)


def cell_antiderive(w: Form, cell: Cell, ctx: PrecisionContext, plan: AntiderivationPlan,
                    at: Mapping[str, object] | None = None) -> ExtElement:
    """P^n of the pullback of w over one cell (0 when no component has the cell's degree)."""
    if cell.dim == 0:
        f = w.component(0).terms.get((), ZERO)
        point = dict(at or {})
        point.update({n: x for n, x in zip(cell.names, cell.origin)})
        return Evaluator(ctx, point_env(ctx, point))(f) if f != ZERO else ExtElement.zero(ctx)
    f = pullback_coefficient(w, cell)
    if f == ZERO:
        return ExtElement.zero(ctx)
    ambient = {name: (cell.origin[i], [E[i] for E in cell.edges]) for i, name in enumerate(cell.names)}
    labels = [f"t{i + 1}" for i in range(cell.dim)]
    return grid_sum(f, labels, [ctx.beta] * cell.dim, ctx, plan, at, ambient=ambient)


def chain_antiderive(w: Form, c: Chain, ctx: PrecisionContext,
                     plan: AntiderivationPlan | None = None,
                     at: Mapping[str, object] | None = None) -> ExtElement:
    """sum over cells of sign * P^n[pullback of w]; cells in canonical order."""
    plan = plan or make_plan(ctx)
    total = ExtElement.zero(ctx)
    for s, cell in c.cells:
        val = cell_antiderive(w, cell, ctx, plan, at)
        total = total + val * s
    return total


@dataclass
class StokesReport:
    lhs: ExtElement
    rhs: ExtElement
    agree_to: int

    @property
    def ok(self) -> bool:
        return self.agree_to >= 0


def agreement(a: ExtElement, b: ExtElement) -> int:
    """Valuation of a - b (its absolute precision when indistinguishable from 0)."""
    d = a - b
    return d.v if not d.is_zero() else min(d.v, 1 << 20)


def stokes_check(w: Form, tau: Cell, ctx: PrecisionContext,
                 plan: AntiderivationPlan | None = None) -> StokesReport:
    """P^n over tau of dw against P^n over the boundary of w."""
    plan = plan or make_plan(ctx)
    lhs = cell_antiderive(w.d(), tau, ctx, plan)
    rhs = chain_antiderive(w, boundary(Chain([(1, tau)])), ctx, plan)
    return StokesReport(lhs, rhs, agreement(lhs, rhs))
