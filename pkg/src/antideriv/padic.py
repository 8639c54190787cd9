"""Capped-precision arithmetic in Q_p and in its unramified quadratic extension.

A nonzero element is stored as ``p^v * unit`` with the unit known modulo
``p^r`` (relative precision ``r``).  Zero carries only an absolute
precision.  Every operation propagates precision, so the absolute
precision ``v + r`` reported by a result is honest.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Union

from .errors import ConfigError, DivisionByZero, IndistinguishableAtPrecision

INF = float("inf")
# absolute precision carried by an exact zero
EXACT = 1 << 30


@lru_cache(maxsize=None)
def ppow(p: int, r: int) -> int:
    return p ** r


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("vp(0) is infinite")
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def vp_fraction(x: Fraction, p: int) -> float:
    if x == 0:
        return INF
    return vp(x.numerator, p) - vp(x.denominator, p)


def vp_factorial(k: int, p: int) -> int:
    """Legendre's formula for v_p(k!)."""
    s, q = 0, p
    while q <= k:
        s += k // q
        q *= p
    return s


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def alpha_square(p: int) -> int:
    """d with alpha^2 = d: -1 when p = 3 mod 4, else the least non-residue."""
    if p % 4 == 3:
        return -1
    for d in range(2, p):
        if pow(d, (p - 1) // 2, p) == p - 1:
            return d
    raise ConfigError(f"no non-residue mod {p}")


@dataclass(frozen=True)
class PrecisionContext:
    """Prime, target absolute precision N, smoothness n and the sigma constant rho.

    ``guard`` extra digits of relative precision are carried internally so
    that cancellation in large loop sums does not eat the target precision.
    """

    p: int
    N: int
    n: int = 1
    rho: Fraction | None = None
    guard: int | None = None
    d: int = field(init=False)

    def __post_init__(self):
        if not isinstance(self.p, int) or not _is_prime(self.p):
            raise ConfigError(f"p={self.p!r} is not a prime")
        if self.p == 2:
            raise ConfigError("p = 2 is excluded (formulas divide by 2 and 2*alpha)")
        if self.N < 4:
            raise ConfigError("absolute precision N must be >= 4")
        if self.n < 1:
            raise ConfigError("smoothness n must be >= 1")
        if self.rho is None:
            # the largest simple rational for which the sigma properties hold on levels 1..N
            object.__setattr__(self, "rho", Fraction(self.N * self.p + 1, self.N * self.p * self.p))
        rho = Fraction(self.rho)
        if not (Fraction(1, self.p) < rho < 1):
            raise ConfigError("rho must lie in (1/p, 1)")
        object.__setattr__(self, "rho", rho)
        if self.guard is None:
            object.__setattr__(self, "guard", self.N + 16)
        object.__setattr__(self, "d", alpha_square(self.p))

    @property
    def wp(self) -> int:
        """Working relative precision."""
        return self.N + self.guard

    def with_(self, **kw) -> "PrecisionContext":
        return replace(self, **kw)

    # constructors ---------------------------------------------------------
    def padic(self, x) -> "PAdicNumber":
        return PAdicNumber.coerce(self, x)

    def ext(self, x, y=0) -> "ExtElement":
        if isinstance(x, ExtElement) and not y:
            return x
        return ExtElement.from_parts(self, x, y)

    @property
    def alpha(self) -> "ExtElement":
        return ExtElement._make(self, 0, 0, 1, EXACT)

    @property
    def beta(self) -> "PAdicNumber":
        return beta_element(self)


Scalar = Union[int, Fraction, "PAdicNumber"]


class PAdicNumber:
    """Element of Q_p at finite precision."""

    __slots__ = ("ctx", "v", "u", "r")

    def __init__(self, ctx: PrecisionContext, v: int, u: int, r: int):
        self.ctx = ctx
        self.v = v
        self.u = u
        self.r = r

    # construction ---------------------------------------------------------
    @staticmethod
    def _make(ctx: PrecisionContext, v: int, u: int, absprec: int) -> "PAdicNumber":
        p = ctx.p
        if u == 0:
            return PAdicNumber(ctx, absprec, 0, 0)
        while u % p == 0:
            u //= p
            v += 1
        r = min(absprec - v, ctx.wp)
        if r <= 0:
            return PAdicNumber(ctx, absprec, 0, 0)
        return PAdicNumber(ctx, v, u % ppow(p, r), r)

    @classmethod
    def zero(cls, ctx: PrecisionContext, absprec: int = EXACT) -> "PAdicNumber":
        return cls(ctx, absprec, 0, 0)

    @classmethod
    def coerce(cls, ctx: PrecisionContext, x) -> "PAdicNumber":
        if isinstance(x, PAdicNumber):
            return x
        if isinstance(x, ExtElement):
            if not x.im.is_zero():
                raise ValueError("element has a nonzero alpha-part")
            return x.re
        if isinstance(x, int):
            return cls._make(ctx, 0, x, EXACT)
        if isinstance(x, Fraction):
            if x == 0:
                return cls.zero(ctx)
            p = ctx.p
            num, den = x.numerator, x.denominator
            k = vp(den, p)
            den //= ppow(p, k)
            u = num * pow(den, -1, ppow(p, ctx.wp + 2 * ctx.N + 8 + vp(num, p)))
            return cls._make(ctx, -k, u, EXACT)
        raise TypeError(f"cannot coerce {type(x).__name__} to PAdicNumber")

    @classmethod
    def from_digits(cls, ctx: PrecisionContext, digits: Sequence[int], v: int = 0,
                    absprec: int | None = None) -> "PAdicNumber":
        p = ctx.p
        u = 0
        for i, dgt in enumerate(digits):
            if not 0 <= dgt < p:
                raise ValueError(f"digit {dgt} out of range")
            u += dgt * ppow(p, i)
        if absprec is None:
            absprec = v + len(digits)
        return cls._make(ctx, v, u, absprec)

    # inspection -----------------------------------------------------------
    def is_zero(self) -> bool:
        return self.u == 0

    @property
    def absprec(self) -> int:
        return self.v + self.r

    def valuation(self) -> float:
        return INF if self.u == 0 else self.v

    def norm(self) -> Fraction:
        if self.u == 0:
            return Fraction(0)
        return Fraction(self.ctx.p) ** (-self.v)

    def digit(self, i: int) -> int:
        """Canonical digit at index i (coefficient of p^i)."""
        if i >= self.absprec:
            raise IndistinguishableAtPrecision(f"digit {i} beyond precision {self.absprec}")
        if self.u == 0 or i < self.v:
            return 0
        return (self.u // ppow(self.ctx.p, i - self.v)) % self.ctx.p

    def digits(self, count: int | None = None) -> list[int]:
        """Digits from index v onward (count defaults to the relative precision)."""
        if self.u == 0:
            return []
        count = self.r if count is None else min(count, self.r)
        p, u, out = self.ctx.p, self.u, []
        for _ in range(count):
            out.append(u % p)
            u //= p
        return out

    def to_fraction(self) -> Fraction:
        """The canonical rational representative p^v * unit."""
        if self.u == 0:
            return Fraction(0)
        return Fraction(self.u) * Fraction(self.ctx.p) ** self.v

    def to_int(self) -> int:
        if self.u == 0:
            return 0
        if self.v < 0:
            raise ValueError("not integral")
        return self.u * ppow(self.ctx.p, self.v)

    def key(self) -> tuple:
        return (self.v, self.u, self.r)

    # arithmetic -----------------------------------------------------------
    def _other(self, o) -> "PAdicNumber":
        if isinstance(o, PAdicNumber):
            return o
        if isinstance(o, (int, Fraction)):
            return PAdicNumber.coerce(self.ctx, o)
        return NotImplemented

    def __add__(self, o):
        if isinstance(o, ExtElement):
            return ExtElement.coerce(self.ctx, self) + o
        o = self._other(o)
        if o is NotImplemented:
            return o
        if self.u == 0:
            return PAdicNumber._make(self.ctx, o.v, o.u, min(self.v, o.absprec))
        if o.u == 0:
            return PAdicNumber._make(self.ctx, self.v, self.u, min(o.v, self.absprec))
        p = self.ctx.p
        v = min(self.v, o.v)
        u = self.u * ppow(p, self.v - v) + o.u * ppow(p, o.v - v)
        return PAdicNumber._make(self.ctx, v, u, min(self.absprec, o.absprec))

    __radd__ = __add__

    def __neg__(self):
        if self.u == 0:
            return self
        return PAdicNumber(self.ctx, self.v, (-self.u) % ppow(self.ctx.p, self.r), self.r)

    def __sub__(self, o):
        if isinstance(o, ExtElement):
            return ExtElement.coerce(self.ctx, self) - o
        o = self._other(o)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if isinstance(o, ExtElement):
            return ExtElement.coerce(self.ctx, self) * o
        o = self._other(o)
        if o is NotImplemented:
            return o
        if self.u == 0 or o.u == 0:
            return PAdicNumber.zero(self.ctx, self.v + o.v)
        r = min(self.r, o.r)
        return PAdicNumber(self.ctx, self.v + o.v, (self.u * o.u) % ppow(self.ctx.p, r), r)

    __rmul__ = __mul__

    def inverse(self) -> "PAdicNumber":
        if self.u == 0:
            raise DivisionByZero(f"division by zero at precision {self.v}")
        return PAdicNumber(self.ctx, -self.v, pow(self.u, -1, ppow(self.ctx.p, self.r)), self.r)

    def __truediv__(self, o):
        if isinstance(o, ExtElement):
            return ExtElement.coerce(self.ctx, self) / o
        o = self._other(o)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, o):
        return self.inverse() * o

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = PAdicNumber.coerce(self.ctx, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, o):
        """Equality at the available precision."""
        if isinstance(o, ExtElement):
            return o == self
        o = self._other(o)
        if o is NotImplemented:
            return o
        return (self - o).is_zero()

    __hash__ = None

    def __repr__(self):
        return format_padic(self)


def format_padic(x: PAdicNumber) -> str:
    """Digit string ``d_v d_{v+1} ...*p^v``; zero prints as O(p^absprec)."""
    p = x.ctx.p
    if x.u == 0:
        return f"O({p}^{x.v})" if x.v < EXACT // 2 else "0"
    return " ".join(str(dg) for dg in x.digits()) + f"·{p}^{x.v}"


class ExtElement:
    """Element p^v (a + alpha b) of K(alpha), alpha^2 = d, unit part known mod p^r."""

    __slots__ = ("ctx", "v", "a", "b", "r")

    def __init__(self, ctx: PrecisionContext, v: int, a: int, b: int, r: int):
        self.ctx = ctx
        self.v = v
        self.a = a
        self.b = b
        self.r = r

    @staticmethod
    def _make(ctx: PrecisionContext, v: int, a: int, b: int, absprec: int) -> "ExtElement":
        p = ctx.p
        if a == 0 and b == 0:
            return ExtElement(ctx, absprec, 0, 0, 0)
        while a % p == 0 and b % p == 0:
            a //= p
            b //= p
            v += 1
        r = min(absprec - v, ctx.wp)
        if r <= 0:
            return ExtElement(ctx, absprec, 0, 0, 0)
        m = ppow(p, r)
        return ExtElement(ctx, v, a % m, b % m, r)

    @classmethod
    def zero(cls, ctx: PrecisionContext, absprec: int = EXACT) -> "ExtElement":
        return cls(ctx, absprec, 0, 0, 0)

    @classmethod
    def coerce(cls, ctx: PrecisionContext, x) -> "ExtElement":
        if isinstance(x, ExtElement):
            return x
        if isinstance(x, tuple):
            return cls.from_parts(ctx, *x)
        xp = PAdicNumber.coerce(ctx, x)
        if xp.u == 0:
            return cls.zero(ctx, xp.v)
        return cls(ctx, xp.v, xp.u, 0, xp.r)

    @classmethod
    def from_parts(cls, ctx: PrecisionContext, x, y=0) -> "ExtElement":
        xp = PAdicNumber.coerce(ctx, x)
        yp = PAdicNumber.coerce(ctx, y)
        p = ctx.p
        if xp.u == 0 and yp.u == 0:
            return cls.zero(ctx, min(xp.v, yp.v))
        if xp.u == 0:
            return cls._make(ctx, yp.v, 0, yp.u, min(xp.v, yp.absprec))
        if yp.u == 0:
            return cls._make(ctx, xp.v, xp.u, 0, min(yp.v, xp.absprec))
        v = min(xp.v, yp.v)
        return cls._make(ctx, v, xp.u * ppow(p, xp.v - v), yp.u * ppow(p, yp.v - v),
                         min(xp.absprec, yp.absprec))

    # inspection -----------------------------------------------------------
    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    @property
    def absprec(self) -> int:
        return self.v + self.r

    def valuation(self) -> float:
        return INF if self.is_zero() else self.v

    def norm(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        return Fraction(self.ctx.p) ** (-self.v)

    @property
    def re(self) -> PAdicNumber:
        if self.is_zero():
            return PAdicNumber.zero(self.ctx, self.v)
        return PAdicNumber._make(self.ctx, self.v, self.a, self.absprec)

    @property
    def im(self) -> PAdicNumber:
        if self.is_zero():
            return PAdicNumber.zero(self.ctx, self.v)
        return PAdicNumber._make(self.ctx, self.v, self.b, self.absprec)

    def conjugate(self) -> "ExtElement":
        if self.is_zero():
            return self
        return ExtElement(self.ctx, self.v, self.a, (-self.b) % ppow(self.ctx.p, self.r), self.r)

    def is_real(self) -> bool:
        return self.b == 0

    def key(self) -> tuple:
        return (self.v, self.a, self.b, self.r)

    # arithmetic -----------------------------------------------------------
    def _other(self, o) -> "ExtElement":
        if isinstance(o, ExtElement):
            return o
        if isinstance(o, (int, Fraction, PAdicNumber)):
            return ExtElement.coerce(self.ctx, o)
        return NotImplemented

    def __add__(self, o):
        o = self._other(o)
        if o is NotImplemented:
            return o
        ctx = self.ctx
        if self.a == 0 and self.b == 0:
            return ExtElement._make(ctx, o.v, o.a, o.b, min(self.v, o.absprec))
        if o.a == 0 and o.b == 0:
            return ExtElement._make(ctx, self.v, self.a, self.b, min(o.v, self.absprec))
        p = ctx.p
        if self.v <= o.v:
            v, s = self.v, ppow(p, o.v - self.v)
            a, b = self.a + o.a * s, self.b + o.b * s
        else:
            v, s = o.v, ppow(p, self.v - o.v)
            a, b = o.a + self.a * s, o.b + self.b * s
        return ExtElement._make(ctx, v, a, b, min(self.v + self.r, o.v + o.r))

    __radd__ = __add__

    def __neg__(self):
        if self.r == 0:
            return self
        m = ppow(self.ctx.p, self.r)
        return ExtElement(self.ctx, self.v, (-self.a) % m, (-self.b) % m, self.r)

    def __sub__(self, o):
        o = self._other(o)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        o = self._other(o)
        if o is NotImplemented:
            return o
        if self.r == 0 or o.r == 0:
            return ExtElement(self.ctx, self.v + o.v, 0, 0, 0)
        r = self.r if self.r < o.r else o.r
        m = ppow(self.ctx.p, r)
        a1, b1, a2, b2 = self.a, self.b, o.a, o.b
        if b1 == 0 and b2 == 0:
            return ExtElement(self.ctx, self.v + o.v, (a1 * a2) % m, 0, r)
        return ExtElement(self.ctx, self.v + o.v, (a1 * a2 + self.ctx.d * b1 * b2) % m,
                          (a1 * b2 + a2 * b1) % m, r)

    __rmul__ = __mul__

    def scale_p(self, k: int) -> "ExtElement":
        """Multiply by p^k exactly."""
        if self.r == 0:
            return ExtElement(self.ctx, self.v + k, 0, 0, 0)
        return ExtElement(self.ctx, self.v + k, self.a, self.b, self.r)

    def inverse(self) -> "ExtElement":
        if self.r == 0:
            raise DivisionByZero(f"division by zero at precision {self.v}")
        m = ppow(self.ctx.p, self.r)
        nrm = (self.a * self.a - self.ctx.d * self.b * self.b) % m
        inv = pow(nrm, -1, m)
        return ExtElement(self.ctx, -self.v, (self.a * inv) % m, (-self.b * inv) % m, self.r)

    def __truediv__(self, o):
        o = self._other(o)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, o):
        return self.inverse() * o

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = ExtElement.coerce(self.ctx, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, o):
        o = self._other(o)
        if o is NotImplemented:
            return o
        return (self - o).is_zero()

    __hash__ = None

    def __repr__(self):
        return format_ext(self)


def format_ext(z: ExtElement) -> str:
    if z.b == 0 or z.is_zero():
        return format_padic(z.re)
    if z.a == 0:
        return f"α({format_padic(z.im)})"
    return f"{format_padic(z.re)} + α({format_padic(z.im)})"


def conjugate(z: ExtElement) -> ExtElement:
    return z.conjugate()


def ext_wirtinger_coords(z: ExtElement) -> tuple[PAdicNumber, PAdicNumber]:
    """(x, y) with z = x + alpha y, computed as (z + zbar)/2 and (z - zbar)/(2 alpha)."""
    zb = z.conjugate()
    x = (z + zb) / 2
    y = (z - zb) / (2 * z.ctx.alpha)
    return x.re, y.re


def field_arith(a, b, op: str):
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def beta_element(ctx: PrecisionContext) -> PAdicNumber:
    """beta = (p-1)/(1-p) = -1, the maximum of the unit ball for the digit ordering."""
    return PAdicNumber.coerce(ctx, Fraction(ctx.p - 1, 1 - ctx.p))


def triangle_compare(a: PAdicNumber, b: PAdicNumber) -> str:
    """Digit-lexicographic ordering starting from the lowest index present."""
    if a.u == 0 and b.u == 0 and a.v == b.v:
        return "equal"
    start = min(a.v, b.v)
    stop = min(a.absprec, b.absprec)
    for i in range(start, stop):
        da, db = a.digit(i), b.digit(i)
        if da != db:
            return "less" if da < db else "greater"
    if a.key() == b.key():
        return "equal"
    raise IndistinguishableAtPrecision(f"digits agree through p^{stop}")


@dataclass(frozen=True)
class Ball:
    """Closed ball {x : |x - center| <= p^k}; center may be a tuple (polydisc)."""

    center: object
    k: int

    def _centers(self) -> tuple:
        return self.center if isinstance(self.center, tuple) else (self.center,)

    def contains(self, x) -> bool:
        xs = x if isinstance(x, tuple) else (x,)
        return all((xi - ci).valuation() >= -self.k for xi, ci in zip(xs, self._centers()))

    def relation(self, other: "Ball") -> str:
        """One of disjoint, equal, inside (self in other), contains (other in self)."""
        small, big = (self, other) if self.k <= other.k else (other, self)
        if not big.contains(small.center):
            return "disjoint"
        if self.k == other.k:
            return "equal"
        return "inside" if small is self else "contains"

    def intersection(self, other: "Ball") -> "Ball | None":
        rel = self.relation(other)
        if rel == "disjoint":
            return None
        return self if rel in ("equal", "inside") else other


def dichotomy_holds(b1: Ball, b2: Ball) -> bool:
    """Ultrametric dichotomy: exactly one relation and it is consistent both ways."""
    r12, r21 = b1.relation(b2), b2.relation(b1)
    pairs = {("disjoint", "disjoint"), ("equal", "equal"), ("inside", "contains"),
             ("contains", "inside")}
    return (r12, r21) in pairs


def random_unit_ball(ctx: PrecisionContext, rng, digits: int | None = None) -> PAdicNumber:
    """Uniform element of Z_p truncated to ``digits`` digits (exact)."""
    digits = ctx.N if digits is None else digits
    return PAdicNumber._make(ctx, 0, rng.randrange(ppow(ctx.p, digits)), EXACT)


def random_ext(ctx: PrecisionContext, rng, digits: int | None = None, vmin: int = 0) -> ExtElement:
    digits = ctx.N if digits is None else digits
    m = ppow(ctx.p, digits)
    return ExtElement._make(ctx, vmin, rng.randrange(m), rng.randrange(m), EXACT)


def as_ext_tuple(ctx: PrecisionContext, xs: Iterable) -> tuple[ExtElement, ...]:
    return tuple(ExtElement.coerce(ctx, x) for x in xs)
