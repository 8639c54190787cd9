"""Closed symbolic algebra of integrands.

Leaves are rational constants, the generator ``alpha`` and variables:
``zk`` (complex coordinate), ``zbk`` (its conjugate, written ``conj(zk)``),
``xk`` / ``yk`` (real coordinates, zk = xk + alpha*yk), path parameters
``t``, ``tk`` and ``lam``.  Interior nodes are sums, products,
reciprocals, integer powers, exp, log, characteristic functions of
balls, the locally constant shell factor ``p^(e*ord(v - c))`` and the
antiderivative node ``antider(u, x)`` (P^n of u in the real variable x).

Smart constructors keep every tree in a normal form (flattened sums and
products, folded rational constants) so that printing and parsing are
exact inverses.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import ArityError, ExprSyntaxError, PoleHit
from .padic import EXACT, ExtElement, PAdicNumber, PrecisionContext, ppow


class Expr:
    """Base class; operators build normalized trees."""

    def __add__(self, o):
        return add(self, lift(o))

    def __radd__(self, o):
        return add(lift(o), self)

    def __sub__(self, o):
        return add(self, neg(lift(o)))

    def __rsub__(self, o):
        return add(lift(o), neg(self))

    def __mul__(self, o):
        return mul(self, lift(o))

    def __rmul__(self, o):
        return mul(lift(o), self)

    def __truediv__(self, o):
        return mul(self, recip(lift(o)))

    def __rtruediv__(self, o):
        return mul(lift(o), recip(self))

    def __neg__(self):
        return neg(self)

    def __pow__(self, k: int):
        return power(self, k)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: Fraction

    __str__ = Expr.__str__


@dataclass(frozen=True)
class Alpha(Expr):
    __str__ = Expr.__str__


@dataclass(frozen=True)
class Var(Expr):
    name: str

    __str__ = Expr.__str__


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple

    __str__ = Expr.__str__


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple

    __str__ = Expr.__str__


@dataclass(frozen=True)
class Recip(Expr):
    arg: Expr

    __str__ = Expr.__str__


@dataclass(frozen=True)
class Pow(Expr):
    arg: Expr
    k: int

    __str__ = Expr.__str__


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr

    __str__ = Expr.__str__


@dataclass(frozen=True)
class Log(Expr):
    arg: Expr

    __str__ = Expr.__str__


@dataclass(frozen=True)
class Chi(Expr):
    """Indicator of max_i |v_i - c_i| <= p^k (of its complement when ``outside``)."""

    vars: tuple
    center: tuple
    k: int
    outside: bool = False

    __str__ = Expr.__str__


@dataclass(frozen=True)
class Shell(Expr):
    """p^(e * s) with s = min_i ord(v_i - c_i); locally constant off the center."""

    vars: tuple
    center: tuple
    e: int

    __str__ = Expr.__str__


@dataclass(frozen=True)
class PInt(Expr):
    """x -> P^n[u](x) from 0 in the real variable ``var``."""

    arg: Expr
    var: str
    n: int | None = None
    levels: int | None = None

    __str__ = Expr.__str__


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
ALPHA = Alpha()

_VAR_RE = re.compile(r"^(z|zb|x|y)([1-9][0-9]*)$|^t([1-9][0-9]*)?$|^lam$")


def split_name(name: str) -> tuple[str, int]:
    m = _VAR_RE.match(name)
    if not m:
        raise ValueError(f"bad variable name {name!r}")
    if m.group(1):
        return m.group(1), int(m.group(2))
    if name == "lam":
        return "lam", 0
    return "t", int(m.group(3) or 0)


def z(k: int = 1) -> Var:
    return Var(f"z{k}")


def zbar(k: int = 1) -> Var:
    return Var(f"zb{k}")


def var(name: str) -> Var:
    split_name(name)
    return Var(name)


def lift(o) -> Expr:
    if isinstance(o, Expr):
        return o
    if isinstance(o, (int, Fraction)):
        return Const(Fraction(o))
    if isinstance(o, ExtElement):
        return ext_const(o)
    raise TypeError(f"cannot lift {type(o).__name__} into an expression")


def ext_const(zv: ExtElement) -> Expr:
    """Exact constant a + b*alpha from the canonical rational representatives."""
    return add(Const(zv.re.to_fraction()), mul(Const(zv.im.to_fraction()), ALPHA))


def const_pair(re_: Fraction, im_: Fraction = Fraction(0)) -> Expr:
    return add(Const(Fraction(re_)), mul(Const(Fraction(im_)), ALPHA))


# smart constructors -------------------------------------------------------

def add(*terms) -> Expr:
    flat, c = [], Fraction(0)
    for t in terms:
        t = lift(t)
        parts = t.terms if isinstance(t, Add) else (t,)
        for q in parts:
            if isinstance(q, Const):
                c += q.value
            else:
                flat.append(q)
    if c != 0:
        flat.append(Const(c))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def mul(*factors) -> Expr:
    flat, c = [], Fraction(1)
    for f in factors:
        f = lift(f)
        parts = f.factors if isinstance(f, Mul) else (f,)
        for q in parts:
            if isinstance(q, Const):
                c *= q.value
            else:
                flat.append(q)
    if c == 0:
        return ZERO
    # X * X^-1 cancels structurally (logarithmic derivatives of Exp rely on this)
    for q in [q for q in flat if isinstance(q, Recip)]:
        if q in flat and q.arg in flat:
            flat.remove(q)
            flat.remove(q.arg)
    if c != 1:
        flat.insert(0, Const(c))
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    return Mul(tuple(flat))


def neg(e: Expr) -> Expr:
    return mul(Const(Fraction(-1)), e)


def recip(e: Expr) -> Expr:
    e = lift(e)
    if isinstance(e, Const):
        if e.value == 0:
            raise PoleHit("reciprocal of the zero constant")
        return Const(1 / e.value)
    return Recip(e)


def power(e: Expr, k: int) -> Expr:
    e = lift(e)
    if not isinstance(k, int):
        raise ArityError("exponents must be integers")
    if k == 0:
        return ONE
    if k == 1:
        return e
    if isinstance(e, Const):
        if e.value == 0 and k < 0:
            raise PoleHit("negative power of zero")
        return Const(e.value ** k)
    return Pow(e, k)


def exp(e) -> Expr:
    e = lift(e)
    if e == ZERO:
        return ONE
    return Exp(e)


def log(e) -> Expr:
    e = lift(e)
    if e == ONE:
        return ZERO
    return Log(e)


def chi(vars_: Sequence[str] | str, center, k: int, outside: bool = False) -> Expr:
    if isinstance(vars_, str):
        vars_ = (vars_,)
    center = tuple(lift(c) for c in (center if isinstance(center, (tuple, list)) else (center,)))
    if len(center) != len(vars_):
        raise ArityError("ball center and variable tuple differ in length")
    for c in center:
        if free_vars(c):
            raise ExprSyntaxError("ball centers must be constant")
    return Chi(tuple(vars_), center, int(k), bool(outside))


def shell(vars_: Sequence[str] | str, center, e: int) -> Expr:
    if isinstance(vars_, str):
        vars_ = (vars_,)
    center = tuple(lift(c) for c in (center if isinstance(center, (tuple, list)) else (center,)))
    if len(center) != len(vars_):
        raise ArityError("shell center and variable tuple differ in length")
    if e == 0:
        return ONE
    return Shell(tuple(vars_), center, int(e))


def antider(u, var_: str, n: int | None = None, levels: int | None = None) -> Expr:
    kind, _ = split_name(var_)
    if kind not in ("x", "y", "t", "lam"):
        raise ArityError("antider integrates in a real variable")
    u = lift(u)
    if u == ZERO:
        return ZERO
    return PInt(u, var_, n, levels)


# structure queries -------------------------------------------------------

def children(e: Expr) -> tuple:
    if isinstance(e, Add):
        return e.terms
    if isinstance(e, Mul):
        return e.factors
    if isinstance(e, (Recip, Pow, Exp, Log, PInt)):
        return (e.arg,)
    return ()


def free_vars(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, (Chi, Shell)):
        return frozenset(e.vars)
    out = frozenset()
    for c in children(e):
        out |= free_vars(c)
    if isinstance(e, PInt):
        out |= {e.var}
    return out


def is_constant(e: Expr) -> bool:
    return not free_vars(e)


# printing ----------------------------------------------------------------

def _const_text(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator) if c >= 0 else f"({c.numerator})"
    return f"({c.numerator}/{c.denominator})"


def _var_text(name: str) -> str:
    kind, k = split_name(name)
    if kind == "zb":
        return f"conj(z{k})"
    return name


def _is_negative(e: Expr) -> bool:
    if isinstance(e, Const):
        return e.value < 0
    return isinstance(e, Mul) and isinstance(e.factors[0], Const) and e.factors[0].value < 0


def _atom_text(e: Expr) -> str:
    s = to_text(e)
    if isinstance(e, (Var, Alpha, Exp, Log, Chi, Shell, PInt)):
        return s
    if isinstance(e, Const) and e.value >= 0 and e.value.denominator == 1:
        return s
    if isinstance(e, Const):
        return s  # already parenthesized
    return f"({s})"


def _tuple_text(items: Sequence[str]) -> str:
    return items[0] if len(items) == 1 else "(" + ", ".join(items) + ")"


def to_text(e: Expr) -> str:
    """Canonical text; parse_expr(to_text(e)) == e."""
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Alpha):
        return "alpha"
    if isinstance(e, Var):
        return _var_text(e.name)
    if isinstance(e, Add):
        out = []
        for i, t in enumerate(e.terms):
            if _is_negative(t):
                body = to_text(neg(t))
                if isinstance(neg(t), Add):
                    body = f"({body})"
                out.append(("-" if i == 0 else " - ") + body)
            else:
                out.append(("" if i == 0 else " + ") + to_text(t))
        return "".join(out)
    if isinstance(e, Mul):
        if _is_negative(e):
            pos = neg(e)
            body = _factor_text(pos) if not isinstance(pos, Mul) else to_text(pos)
            return "-" + body
        return "*".join(_factor_text(f) for f in e.factors)
    if isinstance(e, Recip):
        return f"1/({to_text(e.arg)})"
    if isinstance(e, Pow):
        ex = str(e.k) if e.k >= 0 else f"({e.k})"
        return f"{_atom_text(e.arg)}^{ex}"
    if isinstance(e, Exp):
        return f"exp({to_text(e.arg)})"
    if isinstance(e, Log):
        return f"log({to_text(e.arg)})"
    if isinstance(e, Chi):
        vs = _tuple_text([_var_text(v) for v in e.vars])
        cs = _tuple_text([to_text(c) for c in e.center])
        kk = str(e.k) if e.k >= 0 else f"({e.k})"
        tail = ", outside" if e.outside else ""
        return f"chi({vs}, B({cs}; p^{kk}){tail})"
    if isinstance(e, Shell):
        vs = _tuple_text([_var_text(v) for v in e.vars])
        cs = _tuple_text([to_text(c) for c in e.center])
        return f"shell({vs}, {cs}, {e.e})"
    if isinstance(e, PInt):
        extra = "" if e.n is None else f", {e.n}, {e.levels}"
        return f"antider({to_text(e.arg)}, {e.var}{extra})"
    raise TypeError(type(e).__name__)


def _factor_text(f: Expr) -> str:
    if isinstance(f, Add):
        return f"({to_text(f)})"
    if isinstance(f, Mul):
        return f"({to_text(f)})"
    return to_text(f)


# parsing -----------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            break
        start = m.start(m.lastindex) if m.lastindex else pos
        if m.group(1):
            out.append(("num", m.group(1), start))
        elif m.group(2):
            out.append(("id", m.group(2), start))
        elif m.group(3):
            ch = m.group(3)
            if ch not in "+-*/^(),;":
                raise ExprSyntaxError(f"unexpected character {ch!r}", start)
            out.append(("op", ch, start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


_FUNCS = {"conj", "exp", "log", "chi", "shell", "antider"}


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, value: str | None = None, kind: str | None = None) -> bool:
        k, v, _ = self.toks[self.i]
        return (value is None or v == value) and (kind is None or k == kind)

    def take(self, value: str | None = None, kind: str | None = None):
        k, v, pos = self.toks[self.i]
        if (value is not None and v != value) or (kind is not None and k != kind):
            want = value or kind
            raise ExprSyntaxError(f"expected {want!r}, found {v or 'end of input'!r}", pos)
        self.i += 1
        return v

    @property
    def pos(self) -> int:
        return self.toks[self.i][2]

    def parse(self) -> Expr:
        e = self.expr()
        if not self.peek(kind="end"):
            raise ExprSyntaxError(f"trailing input {self.toks[self.i][1]!r}", self.pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek("+") or self.peek("-"):
            op = self.take()
            t = self.term()
            e = add(e, t) if op == "+" else add(e, neg(t))
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek("*") or self.peek("/"):
            op = self.take()
            f = self.unary()
            e = mul(e, f) if op == "*" else mul(e, recip(f))
        return e

    def unary(self) -> Expr:
        if self.peek("-"):
            self.take()
            return neg(self.unary())
        return self.power()

    def signed_int(self) -> int:
        if self.peek("("):
            self.take("(")
            v = self.signed_int()
            self.take(")")
            return v
        sign = 1
        if self.peek("-"):
            self.take()
            sign = -1
        return sign * int(self.take(kind="num"))

    def power(self) -> Expr:
        base = self.atom()
        if self.peek("^"):
            self.take()
            return power(base, self.signed_int())
        return base

    def var_name(self) -> str:
        pos = self.pos
        if self.peek("conj"):
            self.take()
            self.take("(")
            name = self.take(kind="id")
            self.take(")")
            kind, k = self._check_var(name, pos)
            if kind != "z":
                raise ExprSyntaxError("conj() applies to complex coordinates zk", pos)
            return f"zb{k}"
        name = self.take(kind="id")
        self._check_var(name, pos)
        return name

    def _check_var(self, name: str, pos: int):
        try:
            return split_name(name)
        except ValueError:
            raise ExprSyntaxError(f"unknown identifier {name!r}", pos) from None

    def var_tuple(self) -> tuple[str, ...]:
        if self.peek("("):
            self.take("(")
            names = [self.var_name()]
            while self.peek(","):
                self.take(",")
                names.append(self.var_name())
            self.take(")")
            return tuple(names)
        return (self.var_name(),)

    def const_tuple(self) -> tuple[Expr, ...]:
        # a parenthesized comma list is a tuple; otherwise a single expression
        save = self.i
        if self.peek("("):
            self.take("(")
            first = self.expr()
            if self.peek(","):
                items = [first]
                while self.peek(","):
                    self.take(",")
                    items.append(self.expr())
                self.take(")")
                return tuple(items)
            self.i = save
        return (self.expr(),)

    def args(self, fname: str, pos: int) -> list[Expr]:
        self.take("(")
        items = [self.expr()]
        while self.peek(","):
            self.take(",")
            items.append(self.expr())
        self.take(")")
        return items

    def atom(self) -> Expr:
        pos = self.pos
        if self.peek(kind="num"):
            return Const(Fraction(int(self.take())))
        if self.peek("("):
            self.take("(")
            e = self.expr()
            self.take(")")
            return e
        if self.peek(kind="id"):
            name = self.toks[self.i][1]
            if name == "alpha":
                self.take()
                return ALPHA
            if name == "conj":
                return Var(self.var_name())
            if name in _FUNCS:
                self.take()
                return self.call(name, pos)
            return Var(self.var_name())
        raise ExprSyntaxError(f"unexpected token {self.toks[self.i][1] or 'end of input'!r}", pos)

    def call(self, name: str, pos: int) -> Expr:
        if name in ("exp", "log"):
            items = self.args(name, pos)
            if len(items) != 1:
                raise ArityError(f"{name}() takes one argument, got {len(items)}")
            return exp(items[0]) if name == "exp" else log(items[0])
        if name == "chi":
            self.take("(")
            if self.peek("B"):
                vars_ = ("z1",)
            else:
                vars_ = self.var_tuple()
                self.take(",")
            self.take("B")
            self.take("(")
            center = self.const_tuple()
            self.take(";")
            if self.take(kind="id") != "p":
                raise ExprSyntaxError("ball radius must be written p^k", self.pos)
            self.take("^")
            k = self.signed_int()
            self.take(")")
            outside = False
            if self.peek(","):
                self.take(",")
                self.take("outside")
                outside = True
            self.take(")")
            if len(center) != len(vars_):
                raise ArityError("ball center arity differs from the variable tuple")
            return chi(vars_, center, k, outside)
        if name == "shell":
            self.take("(")
            vars_ = self.var_tuple()
            self.take(",")
            center = self.const_tuple()
            self.take(",")
            e = self.signed_int()
            self.take(")")
            if len(center) != len(vars_):
                raise ArityError("shell center arity differs from the variable tuple")
            return shell(vars_, center, e)
        if name == "antider":
            self.take("(")
            u = self.expr()
            self.take(",")
            v = self.var_name()
            n = levels = None
            if self.peek(","):
                self.take(",")
                n = self.signed_int()
                self.take(",")
                levels = self.signed_int()
            self.take(")")
            return antider(u, v, n, levels)
        raise ExprSyntaxError(f"unknown function {name!r}", pos)


def parse_expr(text: str) -> Expr:
    """Parse the published grammar into a normalized tree."""
    return _Parser(text).parse()


# derivatives -------------------------------------------------------------

_HALF = Fraction(1, 2)


def _leaf_derivative(leaf: str, wrt: str) -> Expr:
    if leaf == wrt:
        return ONE
    lk, li = split_name(leaf)
    wk, wi = split_name(wrt)
    if li != wi or lk not in ("z", "zb", "x", "y") or wk not in ("z", "zb", "x", "y"):
        return ZERO
    inv2a = mul(Const(_HALF), recip(ALPHA))
    table = {
        ("z", "zb"): ZERO, ("z", "x"): Const(_HALF), ("z", "y"): inv2a,
        ("zb", "z"): ZERO, ("zb", "x"): Const(_HALF), ("zb", "y"): neg(inv2a),
        ("x", "z"): ONE, ("x", "zb"): ONE, ("x", "y"): ZERO,
        ("y", "z"): ALPHA, ("y", "zb"): neg(ALPHA), ("y", "x"): ZERO,
    }
    # table[(w, l)] = d(leaf l)/d(w)
    return table[(wk, lk)]


@lru_cache(maxsize=65536)
def _derive1(e: Expr, wrt: str) -> Expr:
    if isinstance(e, (Const, Alpha, Chi, Shell)):
        return ZERO
    if isinstance(e, Var):
        return _leaf_derivative(e.name, wrt)
    if isinstance(e, Add):
        return add(*[_derive1(t, wrt) for t in e.terms])
    if isinstance(e, Mul):
        terms = []
        fs = e.factors
        for i, f in enumerate(fs):
            df = _derive1(f, wrt)
            if df != ZERO:
                terms.append(mul(*fs[:i], df, *fs[i + 1:]))
        return add(*terms)
    if isinstance(e, Recip):
        du = _derive1(e.arg, wrt)
        if du == ZERO:
            return ZERO
        return mul(Const(Fraction(-1)), du, recip(power(e.arg, 2)))
    if isinstance(e, Pow):
        du = _derive1(e.arg, wrt)
        if du == ZERO:
            return ZERO
        return mul(Const(Fraction(e.k)), power(e.arg, e.k - 1), du)
    if isinstance(e, Exp):
        du = _derive1(e.arg, wrt)
        return ZERO if du == ZERO else mul(e, du)
    if isinstance(e, Log):
        du = _derive1(e.arg, wrt)
        return ZERO if du == ZERO else mul(du, recip(e.arg))
    if isinstance(e, PInt):
        if wrt == e.var:
            return e.arg
        kind_w, idx_w = split_name(wrt)
        kind_v, idx_v = split_name(e.var)
        if kind_w in ("z", "zb") and kind_v in ("x", "y") and idx_w == idx_v:
            # d/dz = (d/dx + alpha^-1 d/dy)/2 with the PInt variable among x, y
            dx = _derive1(e, f"x{idx_w}")
            dy = _derive1(e, f"y{idx_w}")
            sign = 1 if kind_w == "z" else -1
            return mul(Const(_HALF), add(dx, mul(Const(Fraction(sign)), recip(ALPHA), dy)))
        return antider(_derive1(e.arg, wrt), e.var, e.n, e.levels)
    raise TypeError(type(e).__name__)


def derive(e: Expr, wrt: str, order: int = 1) -> Expr:
    """Exact symbolic derivative; characteristic and shell factors are locally constant."""
    split_name(wrt)
    for _ in range(order):
        e = _derive1(e, wrt)
    return e


def wirtinger(e: Expr, which: str, j: int = 1) -> Expr:
    """(d/dx + alpha^-1 d/dy)/2 for d_zeta, with a minus sign for d_zetabar."""
    dx = derive(e, f"x{j}")
    dy = derive(e, f"y{j}")
    sign = {"d_zeta": 1, "d_zetabar": -1}[which]
    return mul(Const(_HALF), add(dx, mul(Const(Fraction(sign)), recip(ALPHA), dy)))


def is_holomorphic(e: Expr) -> bool:
    """Symbolic check that d/d conj(zk) vanishes for every coordinate present."""
    idx = {split_name(v)[1] for v in free_vars(e) if split_name(v)[0] in ("z", "zb", "x", "y")}
    return all(derive(e, f"zb{k}") == ZERO for k in idx)


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace variables by expressions (used for affine pullbacks)."""
    if isinstance(e, Var):
        return lift(mapping.get(e.name, e))
    if isinstance(e, (Const, Alpha)):
        return e
    if isinstance(e, Add):
        return add(*[substitute(t, mapping) for t in e.terms])
    if isinstance(e, Mul):
        return mul(*[substitute(t, mapping) for t in e.factors])
    if isinstance(e, Recip):
        return recip(substitute(e.arg, mapping))
    if isinstance(e, Pow):
        return power(substitute(e.arg, mapping), e.k)
    if isinstance(e, Exp):
        return exp(substitute(e.arg, mapping))
    if isinstance(e, Log):
        return log(substitute(e.arg, mapping))
    if isinstance(e, (Chi, Shell, PInt)):
        if free_vars(e) & set(mapping):
            raise ValueError(f"cannot substitute inside {type(e).__name__}")
        return e
    raise TypeError(type(e).__name__)


# evaluation --------------------------------------------------------------

@lru_cache(maxsize=4096)
def _const_value(ctx: PrecisionContext, c: Fraction) -> ExtElement:
    return ExtElement.coerce(ctx, c)


def point_env(ctx: PrecisionContext, point: Mapping[str, object]) -> dict:
    """Complete an assignment so every leaf spelling (z, zb, x, y) is bound."""
    env: dict = {}
    coords: dict[int, dict[str, ExtElement]] = {}
    for name, val in point.items():
        kind, k = split_name(name)
        v = val if not isinstance(val, (int, Fraction, tuple, PAdicNumber)) else ExtElement.coerce(ctx, val)
        if kind in ("z", "zb", "x", "y"):
            coords.setdefault(k, {})[kind] = v
        else:
            env[name] = v
    for k, have in coords.items():
        if "z" in have:
            zv = have["z"]
            zb = zv.conjugate() if isinstance(zv, ExtElement) else None
        elif "x" in have and "y" in have:
            zv = have["x"] + ctx.alpha * have["y"]
            zb = have["x"] - ctx.alpha * have["y"]
        else:
            # partial binding; the missing real coordinate is supplied later (a moving jet)
            env.update({f"{kk}{k}": vv for kk, vv in have.items()})
            continue
        if not isinstance(zv, ExtElement):
            # jets must be supplied with every spelling already
            env.update({f"{kk}{k}": vv for kk, vv in have.items()})
            continue
        env[f"z{k}"] = zv
        env[f"zb{k}"] = zb
        env[f"x{k}"] = ExtElement.coerce(ctx, zv.re)
        env[f"y{k}"] = ExtElement.coerce(ctx, zv.im)
    return env


def _scalar(v) -> ExtElement | None:
    if isinstance(v, ExtElement):
        return v
    return v.c[0]


def _is_zero_value(v) -> bool:
    s = _scalar(v)
    return s is None or s.is_zero()


def _ball_member(vals: Sequence[ExtElement], center: Sequence[ExtElement], k: int) -> bool:
    for x, c in zip(vals, center):
        dlt = x - c
        if not dlt.is_zero() and dlt.v < -k:
            return False
    return True


class Evaluator:
    """Evaluates a tree on scalars or jets with per-call memoization."""

    def __init__(self, ctx: PrecisionContext, env: Mapping[str, object], pint_hook=None):
        self.ctx = ctx
        self.env = env
        self.memo: dict[int, object] = {}
        self.pint_hook = pint_hook

    def const(self, c: Fraction) -> ExtElement:
        return _const_value(self.ctx, c)

    def __call__(self, e: Expr):
        key = id(e)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        val = self._eval(e)
        self.memo[key] = val
        return val

    def _eval(self, e: Expr):
        ctx = self.ctx
        if isinstance(e, Const):
            return self.const(e.value)
        if isinstance(e, Alpha):
            return ctx.alpha
        if isinstance(e, Var):
            try:
                return self.env[e.name]
            except KeyError:
                raise ValueError(f"variable {e.name} is not bound") from None
        if isinstance(e, Add):
            it = iter(e.terms)
            acc = self(next(it))
            for t in it:
                acc = acc + self(t)
            return acc
        if isinstance(e, Mul):
            # locally constant indicator factors first, so excised poles are never touched
            fs = sorted(e.factors, key=lambda f: 0 if isinstance(f, Chi) else 1)
            acc = None
            for f in fs:
                val = self(f)
                if isinstance(f, Chi) and val.is_zero():
                    return ExtElement.zero(ctx)
                acc = val if acc is None else acc * val
            return acc
        if isinstance(e, Recip):
            u = self(e.arg)
            if _is_zero_value(u):
                raise PoleHit(f"reciprocal of a value indistinguishable from 0: {to_text(e.arg)}")
            return u.inverse()
        if isinstance(e, Pow):
            u = self(e.arg)
            if e.k < 0 and _is_zero_value(u):
                raise PoleHit(f"negative power of a value indistinguishable from 0: {to_text(e.arg)}")
            return u ** e.k
        if isinstance(e, Exp):
            u = self(e.arg)
            if isinstance(u, ExtElement):
                from .series import exp_scalar
                return exp_scalar(u)
            return u.exp()
        if isinstance(e, Log):
            u = self(e.arg)
            if isinstance(u, ExtElement):
                from .series import log_scalar
                return log_scalar(u)
            return u.log()
        if isinstance(e, Chi):
            vals = [_scalar(self.env[v]) for v in e.vars]
            cen = [_scalar(self(c)) for c in e.center]
            inside = _ball_member(vals, cen, e.k)
            return ExtElement.coerce(ctx, 1 if inside != e.outside else 0)
        if isinstance(e, Shell):
            vals = [_scalar(self.env[v]) for v in e.vars]
            cen = [_scalar(self(c)) for c in e.center]
            diffs = [x - c for x, c in zip(vals, cen)]
            if all(dl.is_zero() for dl in diffs):
                raise PoleHit("shell factor evaluated at its center")
            s = min(dl.v for dl in diffs if not dl.is_zero())
            return ExtElement(ctx, e.e * s, 1, 0, ctx.wp)
        if isinstance(e, PInt):
            if self.pint_hook is None:
                from .antiderivation import pint_value
                return pint_value(self, e)
            return self.pint_hook(self, e)
        raise TypeError(type(e).__name__)


def evaluate(e: Expr, point: Mapping[str, object], ctx: PrecisionContext) -> ExtElement:
    """Value of e at a point given as {'z1': ..., 't': ...} (or x/y pairs)."""
    return Evaluator(ctx, point_env(ctx, point))(e)


def difference_quotient(e: Expr, point: Mapping[str, object], h, ctx: PrecisionContext,
                        wrt: str = "z1", order: int = 1) -> ExtElement:
    """u-fold forward difference quotient (Delta_h)^u f / h^u in the coordinate ``wrt``."""
    h = ExtElement.coerce(ctx, h)
    env0 = point_env(ctx, point)
    kind, k = split_name(wrt)

    def shifted(i: int) -> ExtElement:
        env = dict(env0)
        step = h * i
        if kind == "z":
            zv = env[f"z{k}"] + step
            env.update(point_env(ctx, {f"z{k}": zv}))
        elif kind == "zb":
            zv = env[f"z{k}"] + step.conjugate()
            env.update(point_env(ctx, {f"z{k}": zv}))
        elif kind in ("x", "y"):
            x = env[f"x{k}"] + (step if kind == "x" else 0)
            y = env[f"y{k}"] + (step if kind == "y" else 0)
            env.update(point_env(ctx, {f"x{k}": x, f"y{k}": y}))
        else:
            env[wrt] = env[wrt] + step
        return Evaluator(ctx, env)(e)

    total = ExtElement.zero(ctx)
    binom = 1
    for i in range(order + 1):
        term = shifted(i) * binom
        total = total + term if (order - i) % 2 == 0 else total - term
        binom = binom * (order - i) // (i + 1)
    return total / (h ** order)


# regions -----------------------------------------------------------------

@dataclass(frozen=True)
class GridDomain:
    """Finite union of disjoint balls (polydiscs) in the listed variables.

    Each ball is (center tuple of constants, radius exponent k), meaning
    max_i |v_i - c_i| <= p^k.
    """

    vars: tuple
    balls: tuple

    def normalized(self, ctx: PrecisionContext) -> "GridDomain":
        from .padic import Ball
        bs = [Ball(tuple(_const_value(ctx, Fraction(0)) + evaluate(lift(c), {}, ctx) for c in cen), k)
              for cen, k in self.balls]
        keep = []
        for i, b in enumerate(bs):
            covered = False
            for j, o in enumerate(bs):
                if i == j:
                    continue
                rel = b.relation(o)
                if rel == "inside" or (rel == "equal" and j < i):
                    covered = True
                    break
            if not covered:
                keep.append(self.balls[i])
        return GridDomain(self.vars, tuple(keep))

    def indicator(self) -> Expr:
        return add(*[chi(self.vars, tuple(cen), k) for cen, k in self.balls])


def chi_product(terms: Iterable[Expr]) -> Expr:
    return mul(*terms)
