"""Verification harnesses shared by the command-line suites and the tests.

Each function builds its inputs from a seeded ``random.Random`` and
returns plain data (counts, valuations, values) so callers decide what
counts as a pass.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .antiderivation import (AntiderivationPlan, antiderive_point, make_plan, power_rule_sum,
                             sigma)
from .chains import Cell, Form, agreement, cube, dt, stokes_check
from .errors import AntiderivError
from .expr import (Expr, add, antider, const_pair, evaluate, exp, log, mul, parse_expr, power,
                   recip, var, z)
from .padic import (Ball, ExtElement, PAdicNumber, PrecisionContext, dichotomy_holds, random_ext,
                    random_unit_ball)

BIG = 1 << 20


def _rand_ext(ctx: PrecisionContext, rng: random.Random) -> ExtElement:
    """Random element with valuation in [-2, 3] and a few zero components."""
    kind = rng.randrange(6)
    digits = ctx.N
    if kind == 0:
        return ExtElement.coerce(ctx, random_unit_ball(ctx, rng, digits)).scale_p(rng.randrange(-2, 4))
    x = random_ext(ctx, rng, digits)
    if x.is_zero():
        return ExtElement.coerce(ctx, 1)
    return x.scale_p(rng.randrange(-2, 4))


@dataclass
class LawTally:
    checks: int = 0
    failures: dict = field(default_factory=dict)

    def record(self, name: str, ok: bool) -> None:
        self.checks += 1
        if not ok:
            self.failures[name] = self.failures.get(name, 0) + 1

    @property
    def failed(self) -> int:
        return sum(self.failures.values())


def _same(a: ExtElement, b: ExtElement) -> bool:
    return (a - b).is_zero()


def arithmetic_laws(ctx: PrecisionContext, seed: int, count: int) -> LawTally:
    """Field laws, conjugation and the ultrametric inequality on random triples.

    Every triple contributes ten checks, so ``count`` is rounded to a multiple of ten.
    """
    rng = random.Random(seed)
    tally = LawTally()
    for _ in range(max(1, count // 10)):
        a, b, c = _rand_ext(ctx, rng), _rand_ext(ctx, rng), _rand_ext(ctx, rng)
        tally.record("add-assoc", _same((a + b) + c, a + (b + c)))
        tally.record("mul-assoc", _same((a * b) * c, a * (b * c)))
        tally.record("add-comm", _same(a + b, b + a))
        tally.record("mul-comm", _same(a * b, b * a))
        tally.record("distributive", _same(a * (b + c), a * b + a * c))
        tally.record("inverse", a.is_zero() or _same(a * a.inverse(), ExtElement.coerce(ctx, 1)))
        s = a + b
        tally.record("ultrametric", s.is_zero() or s.v >= min(a.v, b.v))
        tally.record("norm-multiplicative", (a * b).v == a.v + b.v)
        tally.record("conjugate-multiplicative", _same((a * b).conjugate(), a.conjugate() * b.conjugate()))
        x, y = a.re, a.im
        nrm = a * a.conjugate()
        d = ExtElement.coerce(ctx, ctx.d)
        tally.record("norm-form", _same(nrm, ExtElement.coerce(ctx, x * x) - d * ExtElement.coerce(ctx, y * y)))
    return tally


def ball_laws(ctx: PrecisionContext, seed: int, count: int) -> LawTally:
    rng = random.Random(seed)
    tally = LawTally()
    for _ in range(count):
        c1 = random_unit_ball(ctx, rng, 4)
        c2 = c1 + PAdicNumber.coerce(ctx, ctx.p ** rng.randrange(0, 4)) * rng.randrange(ctx.p)
        b1, b2 = Ball(c1, -rng.randrange(0, 4)), Ball(c2, -rng.randrange(0, 4))
        tally.record("dichotomy", dichotomy_holds(b1, b2))
    return tally


def sigma_laws(ctx: PrecisionContext, seed: int, count: int,
               variant: str = "canonical") -> LawTally:
    """Approximation-of-identity properties on random points for levels 0..N."""
    rng = random.Random(seed)
    tally = LawTally()
    p, N, rho = ctx.p, ctx.N, ctx.rho
    for _ in range(count):
        x = random_unit_ball(ctx, rng, N + 4)
        tally.record("(i) sigma_0 = 0", sigma(0, x, ctx, variant).is_zero())
        l, m = rng.randrange(N + 1), rng.randrange(N + 1)
        lhs = sigma(l, sigma(m, x, ctx, variant), ctx, variant)
        tally.record("(ii) composition", _same(ExtElement.coerce(ctx, lhs),
                                                ExtElement.coerce(ctx, sigma(min(l, m), x, ctx, variant))))
        m = rng.randrange(1, N + 1)
        # smallest j with p^-j < rho^m, then y = x + p^j u stays within rho^m of x
        j = 0
        while Fraction(1, p ** j) >= rho ** m:
            j += 1
        y = x + PAdicNumber.coerce(ctx, p ** j) * random_unit_ball(ctx, rng, 4)
        tally.record("(iii) locally constant", _same(ExtElement.coerce(ctx, sigma(m, x, ctx, variant)),
                                                      ExtElement.coerce(ctx, sigma(m, y, ctx, variant))))
        dlt = ExtElement.coerce(ctx, sigma(m, x, ctx, variant)) - ExtElement.coerce(ctx, x)
        tally.record("(iv) approximation", dlt.is_zero() or Fraction(1, p ** dlt.v) < rho ** m)
    return tally


# antiderivation ---------------------------------------------------------

def algebra_integrands(p: int) -> list[Expr]:
    """Twenty members of the integrand algebra, pole-free and convergent on the unit ball."""
    texts = [
        "1", "z1", "z1^2", "z1^3 - 2*z1", "3*z1^4 + z1 + 1", "z1^5", "z1^6 - z1^2",
        "alpha*z1^2 + 1", "(z1 + 1)^3", "z1*(z1 - 1)*(z1 + 2)",
        "exp(P*z1)", "exp(P*z1^2) + z1", "log(1 + P*z1)", "z1*exp(P*z1)",
        "1/(z1 - 1/P)", "1/(P*z1 + 1)", "z1^2/(1 + P*z1)", "(2 + z1)/(1 - P*z1)",
        "exp(Q*z1)*(1 + z1^2)", "log(1 + Q*z1^2) + z1^3",
    ]
    return [parse_expr(t.replace("Q", str(p * p)).replace("P", str(p))) for t in texts]


def fundamental_identity(f: Expr, x, ctx: PrecisionContext, plan: AntiderivationPlan,
                         ks: Sequence[int] = range(3, 9)) -> list[tuple[int, int]]:
    """(k, valuation of (P f(x + p^k) - P f(x))/p^k - f(x)) for each k."""
    xe = ExtElement.coerce(ctx, x)
    F0 = antiderive_point(f, xe, ctx, plan, var="z1")
    fx = evaluate(f, {"z1": xe}, ctx)
    out = []
    for k in ks:
        h = ExtElement.coerce(ctx, ctx.p ** k)
        q = (antiderive_point(f, xe + h, ctx, plan, var="z1") - F0) / h
        out.append((k, min(agreement(q, fx), BIG)))
    return out


def power_rule_agreement(t: int, x, ctx: PrecisionContext, plan: AntiderivationPlan) -> int:
    a = antiderive_point(power(z(1), t), x, ctx, plan, var="z1")
    b = power_rule_sum(t, x, ctx, plan.n, plan.L)
    return min(agreement(a, b), BIG)


# Stokes -----------------------------------------------------------------

def _rand_poly(rng: random.Random, names: Sequence[str], degree: int = 3) -> Expr:
    terms = []
    for _ in range(rng.randrange(1, 4)):
        c = rng.randrange(-4, 5) or 1
        mono = [power(var(n), rng.randrange(0, degree + 1)) for n in names]
        terms.append(mul(c, *mono))
    return add(*terms)


def stokes_cases(ctx: PrecisionContext, plan: AntiderivationPlan, seed: int,
                 per_dim: int = 5) -> list[tuple[str, Form, Cell]]:
    """(k-1)-forms on cubes [0, beta p^j]^k, k = 1, 2, whose coefficients are P^n-antiderivatives.

    For k = 1 the 0-form is F = P^n_t1 g; for k = 2 the 1-form is
    F1 dt2 + F2 dt1 with F1 = P^n_t1 g1 + h1(t2) and F2 = P^n_t2 g2 + h2(t1).
    """
    rng = random.Random(seed)
    out = []
    for i in range(per_dim):
        g = _rand_poly(rng, ["t1"])
        if i % 2:
            g = add(g, exp(mul(ctx.p, var("t1"))))
        F = antider(g, "t1", plan.n, plan.L)
        out.append((f"k1-{i}", Form.scalar(F), cube(ctx, 1, [i % 3])))
    for i in range(per_dim):
        g1 = _rand_poly(rng, ["t1", "t2"])
        g2 = _rand_poly(rng, ["t1", "t2"])
        F1 = add(antider(g1, "t1", plan.n, plan.L), _rand_poly(rng, ["t2"]))
        F2 = add(antider(g2, "t2", plan.n, plan.L), _rand_poly(rng, ["t1"]))
        w = dt(2).scale(F1) + dt(1).scale(F2)
        out.append((f"k2-{i}", w, cube(ctx, 2, [i % 3, (i + 1) % 3])))
    return out


# Cauchy ---------------------------------------------------------------------

def random_polynomial(ctx: PrecisionContext, rng: random.Random, degree: int) -> Expr:
    terms = []
    for k in range(degree + 1):
        a, b = rng.randrange(-9, 10), rng.randrange(-9, 10)
        if a or b:
            terms.append(mul(const_pair(Fraction(a), Fraction(b)), power(z(1), k)))
    return add(*terms) if terms else z(1)


def cauchy_cases(ctx: PrecisionContext, seed: int, polys: int = 20,
                 rationals: int = 5) -> list[tuple[str, Expr, ExtElement]]:
    """Random polynomials of degree <= 5 and rational functions with poles off B(0, 1)."""
    rng = random.Random(seed)
    cases = []
    for i in range(polys):
        f = random_polynomial(ctx, rng, rng.randrange(0, 6))
        zv = ExtElement.coerce(ctx, rng.randrange(ctx.p ** 4))
        cases.append((f"poly{i:02d}", f, zv))
    for i in range(rationals):
        # pole at 1/p^j (j >= 1), outside the unit ball
        j = 1 + i % 2
        pole = Fraction(1 + rng.randrange(ctx.p - 1), ctx.p ** j)
        f = mul(rng.randrange(1, 9), recip(add(z(1), mul(-1, pole))))
        if i % 2:
            f = add(f, power(z(1), 2))
        zv = ExtElement.coerce(ctx, rng.randrange(ctx.p ** 4))
        cases.append((f"rational{i}", f, zv))
    return cases


def laurent_cases() -> list[tuple[str, Expr, Fraction, dict]]:
    """Constructed Laurent polynomials sum_k c_k (z - xi)^k on the window [-3, 3]."""
    specs = [
        (Fraction(0), {-3: 7, -2: 3, 0: 5, 1: 1, 3: 1}),
        (Fraction(1), {-1: 1}),
        (Fraction(3), {-2: 3, 0: 5, 1: 1}),
        (Fraction(1, 3), {-3: 2, -1: -4, 2: 6}),
    ]
    out = []
    for i, (xi, coeffs) in enumerate(specs):
        w = add(z(1), mul(-1, xi))
        f = add(*[mul(c, power(w, k)) for k, c in coeffs.items()])
        out.append((f"laurent{i}", f, xi, coeffs))
    return out


def argument_cases(ctx: PrecisionContext, seed: int, count: int = 10) -> list[tuple[str, Expr, int, list]]:
    """f = prod (z - a_i)^e_i / prod (z - b_j)^e_j with points in p Z_p and orders <= 3."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        zeros = [(ctx.p * (1 + rng.randrange(ctx.p ** 2)), 1 + rng.randrange(3))
                 for _ in range(rng.randrange(1, 3))]
        poles = [(ctx.p ** 2 * (1 + rng.randrange(ctx.p)), 1 + rng.randrange(3))
                 for _ in range(i % 2 + rng.randrange(0, 2))]
        zeros = _distinct(zeros, [])
        poles = _distinct(poles, [a for a, _ in zeros])
        num = [power(add(z(1), -a), e) for a, e in zeros]
        den = [power(add(z(1), -b), e) for b, e in poles]
        f = mul(*num) if not den else mul(*num, recip(mul(*den)))
        expected = sum(e for _, e in zeros) - sum(e for _, e in poles)
        pts = [a for a, _ in zeros] + [b for b, _ in poles]
        out.append((f"argument{i}", f, expected, pts))
    return out


def _distinct(items: list, taken: list) -> list:
    seen, out = set(taken), []
    for a, e in items:
        if a in seen:
            continue
        seen.add(a)
        out.append((a, e))
    return out


def safe(fn, *args, **kw):
    """(value, None) or (None, error text) for library errors."""
    try:
        return fn(*args, **kw), None
    except AntiderivError as exc:
        return None, f"{type(exc).__name__}: {exc}"
