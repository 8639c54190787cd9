"""Holomorphic functional calculus for small matrices over K(alpha).

f(T) = C^-1 sum over eigenvalues of the loop antiderivation of
f(zeta) R(zeta; T) d zeta around small canonical borders.  Spectra are
declared by the caller and validated against the characteristic
polynomial rather than computed.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .antiderivation import AntiderivationPlan, make_plan
from .cauchy import _start_small, cauchy_constant, loop_integral, small_border
from .chains import agreement
from .errors import (BorderTouchesSpectrum, ConfigError, NonConvergentSweep, RankDeficiency,
                     SingularAtEvaluation)
from .expr import (ONE, ZERO, Add, Const, Expr, Mul, Pow, Var, add, derive, evaluate, ext_const,
                   lift, mul, power, recip, substitute, z)
from .padic import ExtElement, PrecisionContext
from .series import cap_precision

MAX_SIZE = 4
BIG = 1 << 20


def _agree(a: ExtElement, b: ExtElement) -> int:
    return min(agreement(a, b), BIG)


class MatrixOverExt:
    """Square matrix with entries in K(alpha) and an optional declared spectrum.

    ``spectrum`` is a list of (eigenvalue, multiplicity); it is checked
    against det(zeta I - T) at construction.
    """

    def __init__(self, ctx: PrecisionContext, rows: Sequence[Sequence], spectrum=None,
                 validate: bool = True):
        n = len(rows)
        if n == 0 or n > MAX_SIZE or any(len(r) != n for r in rows):
            raise ConfigError(f"square matrices of size 1..{MAX_SIZE} only")
        self.ctx = ctx
        self.rows = [[ExtElement.coerce(ctx, x) for x in r] for r in rows]
        if spectrum is None and self.shape in ("diagonal", "triangular"):
            spectrum = [self.rows[i][i] for i in range(n)]
        self.spectrum = _merge_spectrum(ctx, spectrum) if spectrum is not None else None
        if validate and self.spectrum is not None:
            self._validate()

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> str:
        n = self.n
        off = [(i, j) for i in range(n) for j in range(n) if i != j and not self.rows[i][j].is_zero()]
        if not off:
            return "diagonal"
        if all(i < j for i, j in off) or all(i > j for i, j in off):
            return "triangular"
        return "general"

    def eigenvalues(self) -> list[ExtElement]:
        return [lam for lam, _ in self.spectrum]

    def _validate(self) -> None:
        ctx = self.ctx
        if sum(mult for _, mult in self.spectrum) != self.n:
            raise ConfigError("declared multiplicities do not add up to the size")
        for lam, _ in self.spectrum:
            d = char_poly_value(self, lam)
            if not d.is_zero() and d.v < ctx.N:
                raise ConfigError(f"det(lambda I - T) != 0 at declared eigenvalue {lam}")
        # two monic polynomials of degree n agreeing at n points coincide
        rng = random.Random(17)
        for _ in range(self.n):
            zeta = ExtElement.from_parts(ctx, rng.randrange(1, ctx.p ** 4), rng.randrange(ctx.p ** 4))
            lhs = char_poly_value(self, zeta)
            rhs = ExtElement.coerce(ctx, 1)
            for lam, mult in self.spectrum:
                rhs = rhs * (zeta - lam) ** mult
            if _agree(lhs, rhs) < ctx.N:
                raise ConfigError("declared spectrum does not match the characteristic polynomial")

    # arithmetic -----------------------------------------------------------
    @classmethod
    def identity(cls, ctx: PrecisionContext, n: int) -> "MatrixOverExt":
        return cls(ctx, [[1 if i == j else 0 for j in range(n)] for i in range(n)], validate=False)

    @classmethod
    def zero(cls, ctx: PrecisionContext, n: int) -> "MatrixOverExt":
        return cls(ctx, [[0] * n for _ in range(n)], validate=False)

    def __add__(self, o: "MatrixOverExt") -> "MatrixOverExt":
        return _raw(self.ctx, [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, o.rows)])

    def __sub__(self, o: "MatrixOverExt") -> "MatrixOverExt":
        return _raw(self.ctx, [[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, o.rows)])

    def __neg__(self) -> "MatrixOverExt":
        return _raw(self.ctx, [[-a for a in r] for r in self.rows])

    def __mul__(self, o) -> "MatrixOverExt":
        if isinstance(o, MatrixOverExt):
            n = self.n
            out = []
            for i in range(n):
                row = []
                for j in range(n):
                    acc = ExtElement.zero(self.ctx)
                    for k in range(n):
                        acc = acc + self.rows[i][k] * o.rows[k][j]
                    row.append(acc)
                out.append(row)
            return _raw(self.ctx, out)
        c = ExtElement.coerce(self.ctx, o)
        return _raw(self.ctx, [[a * c for a in r] for r in self.rows])

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "MatrixOverExt":
        out = MatrixOverExt.identity(self.ctx, self.n)
        for _ in range(k):
            out = out * self
        return out

    def agreement(self, o: "MatrixOverExt") -> int:
        """Minimum valuation of the entrywise difference."""
        return min(_agree(a, b) for r, s in zip(self.rows, o.rows) for a, b in zip(r, s))

    def is_zero_mod(self, prec: int) -> bool:
        return self.agreement(MatrixOverExt.zero(self.ctx, self.n)) >= prec

    def det(self) -> ExtElement:
        return _det([list(r) for r in self.rows], self.ctx)

    def __repr__(self):
        return "[" + "; ".join(", ".join(str(x) for x in r) for r in self.rows) + "]"


def _raw(ctx: PrecisionContext, rows) -> MatrixOverExt:
    m = MatrixOverExt.__new__(MatrixOverExt)
    m.ctx = ctx
    m.rows = [list(r) for r in rows]
    m.spectrum = None
    return m


def _merge_spectrum(ctx: PrecisionContext, spectrum) -> list[tuple[ExtElement, int]]:
    out: list[tuple[ExtElement, int]] = []
    for item in spectrum:
        lam, mult = item if isinstance(item, tuple) and len(item) == 2 and isinstance(item[1], int) \
            and not isinstance(item[0], int) else (item, 1)
        lam = ExtElement.coerce(ctx, lam)
        for i, (mu, k) in enumerate(out):
            if _agree(lam, mu) >= ctx.N:
                out[i] = (mu, k + mult)
                break
        else:
            out.append((lam, mult))
    return out


def _det(a: list[list], ctx: PrecisionContext) -> ExtElement:
    n = len(a)
    total = ExtElement.zero(ctx)
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = ExtElement.coerce(ctx, 1)
        for r, c in enumerate(perm):
            term = term * a[r][c]
        total = total - term if inv % 2 else total + term
    return total


def char_poly_value(T: MatrixOverExt, zeta) -> ExtElement:
    zeta = ExtElement.coerce(T.ctx, zeta)
    n = T.n
    return _det([[(zeta if i == j else 0) - T.rows[i][j] for j in range(n)] for i in range(n)], T.ctx)


def spectral_mapping_matrix(f: Expr, T: MatrixOverExt, F: MatrixOverExt) -> MatrixOverExt:
    """F with the declared spectrum {f(lambda)} of the same multiplicities (validated)."""
    spec = [(evaluate(f, {"z1": lam}, T.ctx), mult) for lam, mult in T.spectrum]
    return MatrixOverExt(T.ctx, F.rows, spectrum=spec)


# resolvent -------------------------------------------------------------

def _expr_det(a: list[list[Expr]]) -> Expr:
    n = len(a)
    if n == 0:
        return ONE
    terms = []
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        terms.append(mul(-1 if inv % 2 else 1, *[a[r][c] for r, c in enumerate(perm)]))
    return add(*terms)


def resolvent(T: MatrixOverExt, var: str = "z1") -> list[list[Expr]]:
    """Entries adj(zeta I - T)_ij / prod (zeta - lambda)^mult as expressions in zeta."""
    if T.spectrum is None:
        raise ConfigError("the resolvent needs a declared spectrum")
    n = T.n
    zeta = Var(var)
    M = [[add(zeta if i == j else ZERO, mul(-1, ext_const(T.rows[i][j]))) for j in range(n)]
         for i in range(n)]
    den = mul(*[power(add(zeta, mul(-1, ext_const(lam))), mult) for lam, mult in T.spectrum])
    inv_den = recip(den)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            minor = [[M[r][c] for c in range(n) if c != i] for r in range(n) if r != j]
            cof = _expr_det(minor)
            row.append(mul(-1 if (i + j) % 2 else 1, cof, inv_den))
        out.append(row)
    return out


def resolvent_at(T: MatrixOverExt, zeta) -> MatrixOverExt:
    """R(zeta; T) at a point; SingularAtEvaluation on the spectrum."""
    ctx = T.ctx
    zeta = ExtElement.coerce(ctx, zeta)
    for lam, _ in T.spectrum or []:
        if _agree(zeta, lam) >= ctx.N:
            raise SingularAtEvaluation(f"{zeta} lies on the spectrum")
    R = resolvent(T)
    return _raw(ctx, [[evaluate(e, {"z1": zeta}, ctx) for e in r] for r in R])


# spectral sets and borders ---------------------------------------------

@dataclass
class SpectralSet:
    """Eigenvalues V with one canonical border B(lambda, p^-k) each."""

    V: list
    k: int | None = None
    separation: int = 0

    def border_k(self, plan: AntiderivationPlan) -> int:
        return self.k if self.k is not None else max(self.separation + 1, _start_small(plan))


def _separation(T: MatrixOverExt) -> int:
    """Largest valuation of a difference of distinct eigenvalues (-BIG for one eigenvalue)."""
    lams = T.eigenvalues()
    vals = [(a - b).v for a, b in itertools.combinations(lams, 2)]
    return max(vals) if vals else -BIG


def spectral_set(T: MatrixOverExt, V: Iterable, k: int | None = None) -> SpectralSet:
    ctx = T.ctx
    lams = T.eigenvalues()
    chosen = []
    for v in V:
        v = ExtElement.coerce(ctx, v)
        hit = [lam for lam in lams if _agree(lam, v) >= ctx.N]
        if not hit:
            raise ConfigError(f"{v} is not a declared eigenvalue")
        chosen.append(hit[0])
    sep = _separation(T)
    if k is not None:
        _check_borders(T, chosen, k)
    return SpectralSet(chosen, k, max(sep, 0))


def _check_borders(T: MatrixOverExt, V: Sequence[ExtElement], k: int) -> None:
    for lam in V:
        for mu in T.eigenvalues():
            if mu is lam:
                continue
            d = mu - lam
            if d.is_zero() or d.v >= k:
                raise BorderTouchesSpectrum(f"border B({lam}, p^-{k}) meets eigenvalue {mu}")


def _loop_sum(f: Expr, T: MatrixOverExt, V: Sequence[ExtElement], k: int,
              ctx: PrecisionContext, plan: AntiderivationPlan) -> MatrixOverExt:
    _check_borders(T, V, k)
    R = resolvent(T)
    C = cauchy_constant(ctx, plan)
    out = []
    for r in R:
        row = []
        for e in r:
            acc = ExtElement.zero(ctx)
            for lam in V:
                acc = acc + loop_integral(mul(f, e), small_border(ctx, lam, k), ctx, plan)
            row.append(acc / C)
        out.append(row)
    return _raw(ctx, out)


def _sweep_matrix(compute, start: int, target: int, steps: int = 10) -> tuple[MatrixOverExt, int]:
    prev = None
    for k in range(start, start + steps):
        cur = compute(k)
        if prev is not None and prev.agreement(cur) >= target:
            return _cap(cur, target), k
        prev = cur
    raise NonConvergentSweep("border sweep for the functional calculus did not stabilize")


def _cap(M: MatrixOverExt, prec: int) -> MatrixOverExt:
    return _raw(M.ctx, [[cap_precision(x, prec) for x in r] for r in M.rows])


def func_calc(f, T: MatrixOverExt, plan: AntiderivationPlan | None = None,
              borders: SpectralSet | None = None) -> MatrixOverExt:
    """f(T) from loop antiderivations of f(zeta) R(zeta; T) around every eigenvalue."""
    ctx = T.ctx
    plan = plan or make_plan(ctx)
    f = lift(f)
    V = borders.V if borders is not None else T.eigenvalues()
    if borders is not None and borders.k is not None:
        return _cap(_loop_sum(f, T, V, borders.k, ctx, plan), plan.N_out)
    start = max(_separation(T) + 1, _start_small(plan))
    return _sweep_matrix(lambda k: _loop_sum(f, T, V, k, ctx, plan), start, plan.N_out)[0]


def poly_coeffs(f: Expr, ctx: PrecisionContext, var: str = "z1", max_degree: int = 64) -> list[ExtElement]:
    """Taylor coefficients at 0 of a polynomial expression (ValueError otherwise)."""
    if not _is_polynomial(f, var):
        raise ValueError(f"{f} is not a polynomial in {var}")
    out, g, fact = [], f, 1
    for k in range(max_degree + 1):
        if g == ZERO:
            return out
        out.append(evaluate(g, {var: 0}, ctx) / fact)
        g = derive(g, var)
        fact *= k + 1
    raise ValueError("degree bound exceeded")


def _is_polynomial(e: Expr, var: str) -> bool:
    from .expr import Alpha
    if isinstance(e, (Const, Alpha)):
        return True
    if isinstance(e, Var):
        return e.name == var
    if isinstance(e, Add):
        return all(_is_polynomial(t, var) for t in e.terms)
    if isinstance(e, Mul):
        return all(_is_polynomial(t, var) for t in e.factors)
    if isinstance(e, Pow):
        return e.k >= 0 and _is_polynomial(e.arg, var)
    return False


def poly_of_matrix(coeffs: Sequence[ExtElement], T: MatrixOverExt) -> MatrixOverExt:
    """sum_k a_k T^k by Horner's rule."""
    n = T.n
    out = MatrixOverExt.zero(T.ctx, n)
    for a in reversed(list(coeffs)):
        out = out * T + MatrixOverExt.identity(T.ctx, n) * a
    return out


# laws ------------------------------------------------------------------

@dataclass
class LawsReport:
    linear: int
    product: int
    composition: int
    spectral_mapping: bool
    target: int
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (min(self.linear, self.product, self.composition) >= self.target
                and self.spectral_mapping)


def calculus_laws_check(f, g, T: MatrixOverExt, plan: AntiderivationPlan | None = None,
                        a=1, b=2) -> LawsReport:
    """Sum, product and composition homomorphism defects plus spectral mapping for f."""
    ctx = T.ctx
    plan = plan or make_plan(ctx)
    f, g = lift(f), lift(g)
    Ff, Fg = func_calc(f, T, plan), func_calc(g, T, plan)
    lin = func_calc(add(mul(a, f), mul(b, g)), T, plan)
    d_lin = lin.agreement(Ff * a + Fg * b)
    d_prod = (Ff * Fg).agreement(func_calc(mul(f, g), T, plan))
    try:
        Fs = spectral_mapping_matrix(f, T, Ff)
        mapping = True
    except ConfigError:
        Fs, mapping = None, False
    if Fs is not None:
        h = substitute(g, {"z1": f})
        d_comp = func_calc(h, T, plan).agreement(func_calc(g, Fs, plan))
    else:
        d_comp = -BIG
    return LawsReport(d_lin, d_prod, d_comp, mapping, plan.N_out)


# projections -----------------------------------------------------------

def spectral_projection(V, T: MatrixOverExt, plan: AntiderivationPlan | None = None) -> MatrixOverExt:
    """E(V; T): loops of the resolvent around the eigenvalues of V only."""
    ctx = T.ctx
    plan = plan or make_plan(ctx)
    S = V if isinstance(V, SpectralSet) else spectral_set(T, V)
    if not S.V:
        return MatrixOverExt.zero(ctx, T.n)
    return func_calc(ONE, T, plan, S)


@dataclass
class PoleIndex:
    order: int
    projection: MatrixOverExt
    laurent: dict
    closed_form: dict
    agree_to: int


def pole_index(z0, T: MatrixOverExt, plan: AntiderivationPlan | None = None) -> PoleIndex:
    """Smallest j with (z0 I - T)^j E(z0) = 0, plus the principal Laurent coefficients of R.

    a_-m = C^-1 loop of (zeta - z0)^(m-1) R(zeta) is compared with (T - z0 I)^(m-1) E(z0).
    """
    ctx = T.ctx
    plan = plan or make_plan(ctx)
    S = spectral_set(T, [z0])
    lam = S.V[0]
    E = spectral_projection(S, T, plan)
    A = MatrixOverExt.identity(ctx, T.n) * lam - T
    order = None
    P = E
    for j in range(1, T.n + 1):
        P = A * P
        if P.is_zero_mod(plan.N_out):
            order = j
            break
    if order is None:
        raise RankDeficiency("no nilpotency index found up to the matrix size")
    laurent, closed = {}, {}
    agree = BIG
    B = T - MatrixOverExt.identity(ctx, T.n) * lam
    for m in range(1, order + 1):
        weight = power(add(z(1), mul(-1, ext_const(lam))), m - 1)
        laurent[-m] = func_calc(weight, T, plan, S)
        closed[-m] = (B ** (m - 1)) * E
        agree = min(agree, laurent[-m].agreement(closed[-m]))
    return PoleIndex(order, E, laurent, closed, agree)


# restriction -----------------------------------------------------------

def _column_basis(P: MatrixOverExt, prec: int) -> tuple[list[int], list[int]]:
    """Pivot columns and rows of P by elimination with largest-norm pivots."""
    ctx = P.ctx
    A = [list(r) for r in P.rows]
    n = len(A)
    rows_used, cols = [], []
    for c in range(n):
        best, best_v = None, None
        for r in range(n):
            if r in rows_used:
                continue
            x = A[r][c]
            if x.is_zero() or x.v >= prec:
                continue
            if best is None or x.v < best_v:
                best, best_v = r, x.v
        if best is None:
            continue
        rows_used.append(best)
        cols.append(c)
        piv = A[best][c]
        for r in range(n):
            if r == best:
                continue
            factor = A[r][c] / piv
            A[r] = [A[r][j] - factor * A[best][j] for j in range(n)]
    return cols, rows_used


def _solve(M: list[list[ExtElement]], B: list[list[ExtElement]]) -> list[list[ExtElement]]:
    """M X = B by Gauss-Jordan (M square, invertible)."""
    n = len(M)
    A = [list(M[i]) + list(B[i]) for i in range(n)]
    for c in range(n):
        piv = min((r for r in range(c, n) if not A[r][c].is_zero()), key=lambda r: A[r][c].v)
        A[c], A[piv] = A[piv], A[c]
        inv = A[c][c].inverse()
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and not A[r][c].is_zero():
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [row[n:] for row in A]


@dataclass
class Restriction:
    rank: int
    compressed: MatrixOverExt
    spectrum_matches: bool
    basis_cols: list
    details: dict = field(default_factory=dict)


def compress(M: MatrixOverExt, cols: Sequence[int], rows: Sequence[int], P: MatrixOverExt) -> MatrixOverExt:
    """Matrix of M on the range of P in the basis of P's pivot columns."""
    ctx = M.ctx
    Bm = [[P.rows[i][c] for c in cols] for i in range(P.n)]
    MB = [[sum((M.rows[i][k] * Bm[k][j] for k in range(P.n)), ExtElement.zero(ctx))
           for j in range(len(cols))] for i in range(P.n)]
    X = _solve([[Bm[r][j] for j in range(len(cols))] for r in rows], [MB[r] for r in rows])
    return _raw(ctx, X)


def restrict(T: MatrixOverExt, V, plan: AntiderivationPlan | None = None, f=None) -> Restriction:
    """T compressed to the range of E(V; T); RankDeficiency when the rank disagrees."""
    ctx = T.ctx
    plan = plan or make_plan(ctx)
    S = V if isinstance(V, SpectralSet) else spectral_set(T, V)
    E = spectral_projection(S, T, plan)
    cols, rows = _column_basis(E, plan.N_out)
    want = sum(mult for lam, mult in T.spectrum if any(lam is v for v in S.V))
    if len(cols) != want:
        raise RankDeficiency(f"projector rank {len(cols)} but multiplicities add to {want}")
    TV = compress(T, cols, rows, E)
    spec = [(lam, mult) for lam, mult in T.spectrum if any(lam is v for v in S.V)]
    try:
        TV = MatrixOverExt(ctx, TV.rows, spectrum=spec)
        matches = True
    except ConfigError:
        matches = False
    details = {}
    if f is not None and matches:
        fT = func_calc(f, T, plan)
        details["f_restriction_agree"] = compress(fT, cols, rows, E).agreement(func_calc(f, TV, plan))
    return Restriction(len(cols), TV, matches, cols, details)


@dataclass
class LatticeReport:
    intersection: int
    union: int
    complement: int
    partition: int
    idempotent: int
    commutes: int
    target: int

    @property
    def ok(self) -> bool:
        return min(self.intersection, self.union, self.complement, self.partition,
                   self.idempotent, self.commutes) >= self.target


def projector_lattice_check(T: MatrixOverExt, plan: AntiderivationPlan | None = None) -> LatticeReport:
    """Boolean-algebra laws of V -> E(V; T) over all subsets of the spectrum."""
    ctx = T.ctx
    plan = plan or make_plan(ctx)
    lams = T.eigenvalues()
    if len(lams) > 3:
        raise ConfigError("lattice checks are limited to 3 eigenvalues")
    n = T.n
    I = MatrixOverExt.identity(ctx, n)
    subsets = [frozenset(s) for r in range(len(lams) + 1) for s in itertools.combinations(range(len(lams)), r)]
    E = {s: spectral_projection([lams[i] for i in sorted(s)], T, plan) for s in subsets}
    full = frozenset(range(len(lams)))
    d_int = d_uni = d_idem = d_comm = BIG
    for s1, s2 in itertools.product(subsets, repeat=2):
        d_int = min(d_int, (E[s1] * E[s2]).agreement(E[s1 & s2]))
        d_uni = min(d_uni, (E[s1] + E[s2] - E[s1] * E[s2]).agreement(E[s1 | s2]))
    for s in subsets:
        d_idem = min(d_idem, (E[s] * E[s]).agreement(E[s]))
        d_comm = min(d_comm, (E[s] * T).agreement(T * E[s]))
    d_comp = min((I - E[s]).agreement(E[full - s]) for s in subsets)
    total = MatrixOverExt.zero(ctx, n)
    for i in range(len(lams)):
        total = total + E[frozenset([i])]
    d_part = total.agreement(I)
    # products of projectors with entries of valuation v < 0 keep only N_out + v digits
    vmin = min((x.v for M in E.values() for r in M.rows for x in r if not x.is_zero()), default=0)
    return LatticeReport(d_int, d_uni, d_comp, d_part, d_idem, d_comm, plan.N_out + min(0, vmin))
