"""exp and log power series on their p-adic convergence domains."""
from __future__ import annotations

from fractions import Fraction

from .errors import ExpDomainError, LogDomainError
from .padic import ExtElement, vp_factorial


def exp_truncation_index(v: int, p: int, N: int) -> int:
    """Smallest T with |z|^T / |T!| <= p^(-N-2) for |z| = p^-v."""
    T = 1
    while T * v - vp_factorial(T, p) < N + 2:
        T += 1
    return T


def exp_tail_index(v: int, p: int, target: int) -> int:
    """Smallest T such that every term k >= T has valuation >= target.

    Uses v_p(k!) <= (k-1)/(p-1), so the bound is monotone in k.  It is
    never smaller than exp_truncation_index at the same target.
    """
    T = 1
    while Fraction(T * v) - Fraction(T - 1, p - 1) < target:
        T += 1
    return T


def log_tail_index(v: int, p: int, target: int) -> int:
    """Smallest T such that every term w^k/k, k >= T, has valuation >= target."""
    T = 1
    while True:
        ok = True
        # k v - v_p(k) >= k v - log_p(k) which is increasing for v >= 1
        k, lg = T, 0
        while p ** (lg + 1) <= k:
            lg += 1
        if k * v - lg < target:
            ok = False
        if ok:
            return T
        T += 1


def in_exp_domain(z: ExtElement) -> bool:
    """|z| < p^(1/(1-p)); for integral valuations and odd p this is v >= 1."""
    return z.is_zero() or z.v >= 1


def cap_precision(x: ExtElement, absprec: int) -> ExtElement:
    if x.absprec <= absprec:
        return x
    return ExtElement._make(x.ctx, x.v, x.a, x.b, absprec)


def exp_scalar(z: ExtElement) -> ExtElement:
    ctx = z.ctx
    if not in_exp_domain(z):
        raise ExpDomainError(f"exp argument of valuation {z.v} outside the convergence domain")
    one = ExtElement.coerce(ctx, 1)
    if z.is_zero():
        return one + z
    target = ctx.wp
    T = exp_tail_index(z.v, ctx.p, target)
    total, term = one, one
    for k in range(1, T):
        term = term * z / k
        total = total + term
    return cap_precision(total, target)


def log_scalar(x: ExtElement) -> ExtElement:
    ctx = x.ctx
    w = x - 1
    if not in_exp_domain(w):
        raise LogDomainError("log argument outside 1 + E")
    if w.is_zero():
        return w
    target = ctx.wp + w.v
    T = log_tail_index(w.v, ctx.p, target)
    total, power = ExtElement.zero(ctx), ExtElement.coerce(ctx, 1)
    for k in range(1, T):
        power = power * w
        term = power / k
        total = total + term if k % 2 else total - term
    return cap_precision(total, target)
