"""Truncated multivariate Taylor jets over K(alpha).

A jet in k variables of order n stores the Taylor coefficients
f^(e)/e! for every multi-index e with each entry below n.  Jets are the
automatic-differentiation carrier that feeds derivatives into the
antiderivation series.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .padic import ExtElement
from .series import exp_scalar, log_scalar


@lru_cache(maxsize=None)
def _mul_table(n: int, k: int) -> tuple[tuple[int, int, int], ...]:
    idx = []
    for flat in range(n ** k):
        e, f = [], flat
        for _ in range(k):
            e.append(f % n)
            f //= n
        idx.append(tuple(e))
    out = []
    for i, ei in enumerate(idx):
        for j, ej in enumerate(idx):
            s = [a + b for a, b in zip(ei, ej)]
            if all(x < n for x in s):
                out.append((i, j, sum(x * n ** m for m, x in enumerate(s))))
    return tuple(out)


@lru_cache(maxsize=None)
def _index(n: int, e: tuple[int, ...]) -> int:
    return sum(x * n ** m for m, x in enumerate(e))


class Jet:
    """Coefficients are ExtElement or None (an exact structural zero)."""

    __slots__ = ("n", "k", "c")

    def __init__(self, n: int, k: int, c: list):
        self.n = n
        self.k = k
        self.c = c

    @classmethod
    def const(cls, n: int, k: int, value: ExtElement) -> "Jet":
        c = [None] * (n ** k)
        c[0] = value
        return cls(n, k, c)

    @classmethod
    def affine(cls, n: int, k: int, value: ExtElement, slopes: Sequence) -> "Jet":
        """value + sum_i slopes[i] * eps_i."""
        c = [None] * (n ** k)
        c[0] = value
        if n > 1:
            for i, s in enumerate(slopes):
                if s is not None and not (s.is_zero() and s.v > 1 << 29):
                    c[n ** i] = s
        return cls(n, k, c)

    @property
    def value(self) -> ExtElement:
        return self.c[0]

    def coeff(self, e: Sequence[int]) -> ExtElement | None:
        return self.c[_index(self.n, tuple(e))]

    def _like(self, c):
        return Jet(self.n, self.k, c)

    # arithmetic -----------------------------------------------------------
    def __add__(self, o):
        if isinstance(o, Jet):
            c = [x if y is None else (y if x is None else x + y) for x, y in zip(self.c, o.c)]
            return self._like(c)
        c = list(self.c)
        c[0] = o if c[0] is None else c[0] + o
        return self._like(c)

    __radd__ = __add__

    def __neg__(self):
        return self._like([None if x is None else -x for x in self.c])

    def __sub__(self, o):
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if isinstance(o, Jet):
            c = [None] * len(self.c)
            a, b = self.c, o.c
            for i, j, t in _mul_table(self.n, self.k):
                x, y = a[i], b[j]
                if x is None or y is None:
                    continue
                prod = x * y
                c[t] = prod if c[t] is None else c[t] + prod
            return self._like(c)
        return self._like([None if x is None else x * o for x in self.c])

    __rmul__ = __mul__

    def nilpotent(self) -> "Jet":
        c = list(self.c)
        c[0] = None
        return self._like(c)

    @property
    def depth(self) -> int:
        """Power beyond which the nilpotent part vanishes."""
        return self.k * (self.n - 1) + 1

    def _series(self, coeffs: Sequence) -> "Jet":
        """sum_m coeffs[m] * w^m with w the nilpotent part."""
        w = self.nilpotent()
        out = Jet.const(self.n, self.k, coeffs[0])
        power = None
        for m in range(1, min(len(coeffs), self.depth)):
            power = w if power is None else power * w
            if coeffs[m] is not None:
                out = out + power * coeffs[m]
        return out

    def inverse(self) -> "Jet":
        c0 = self.c[0]
        inv = c0.inverse()
        w = self.nilpotent() * (-inv)
        out = Jet.const(self.n, self.k, ExtElement.coerce(c0.ctx, 1))
        power = None
        for _ in range(1, self.depth):
            power = w if power is None else power * w
            out = out + power
        return out * inv

    def __truediv__(self, o):
        return self * o.inverse()

    def __rtruediv__(self, o):
        return self.inverse() * o

    def __pow__(self, m: int):
        if m < 0:
            return self.inverse() ** (-m)
        out = Jet.const(self.n, self.k, ExtElement.coerce(self.c[0].ctx, 1))
        base = self
        while m:
            if m & 1:
                out = out * base
            m >>= 1
            if m:
                base = base * base
        return out

    def exp(self) -> "Jet":
        e0 = exp_scalar(self.c[0])
        coeffs, fact = [], 1
        for m in range(self.depth):
            fact = fact * max(m, 1)
            coeffs.append(e0 * ExtElement.coerce(e0.ctx, Fraction(1, fact)))
        return self._series(coeffs)

    def log(self) -> "Jet":
        c0 = self.c[0]
        l0 = log_scalar(c0)
        inv = c0.inverse()
        w = self.nilpotent() * inv
        out = Jet.const(self.n, self.k, l0)
        power = None
        for m in range(1, self.depth):
            power = w if power is None else power * w
            scale = ExtElement.coerce(c0.ctx, Fraction(1 if m % 2 else -1, m))
            out = out + power * scale
        return out

    # layout helpers ---------------------------------------------------------
    def extend(self) -> "Jet":
        """Embed into a jet with one extra (last) variable."""
        return Jet(self.n, self.k + 1, self.c + [None] * (len(self.c) * (self.n - 1)))

    def slice_last(self, j: int) -> "Jet":
        """Coefficient of eps_last^j as a jet in the first k-1 variables."""
        size = self.n ** (self.k - 1)
        return Jet(self.n, self.k - 1, self.c[j * size:(j + 1) * size])

    def __repr__(self):
        return f"Jet(n={self.n}, k={self.k}, c={self.c})"


def zero_if_none(x, ctx):
    return ExtElement.zero(ctx) if x is None else x
