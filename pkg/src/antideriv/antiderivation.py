"""The antiderivation operator P^n built from an approximation of the identity.

For a point x of the unit ball U the nodes are x_l = sigma_l(x) for
l = 0..L, closed by x_{L+1} := x, and

    P^n f(x) = sum_l sum_{j<n} f^(j)(x_l) (x_{l+1} - x_l)^(j+1) / (j+1)!.

Derivatives come from truncated Taylor jets, so f^(j)/j! is read off as
a jet coefficient.  Several variables are handled by the iterated sum
over the product grid of nodes, with mixed Taylor coefficients.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import OutOfDomain, PoleHit, PoleOnNode, PrecisionExhausted
from .expr import (Evaluator, Expr, GridDomain, PInt, antider, free_vars, mul, point_env,
                   split_name)
from .jets import Jet
from .padic import EXACT, ExtElement, PAdicNumber, PrecisionContext, ppow, vp_factorial

SIGMA_VARIANTS = ("canonical", "offset")


# approximation of the identity ------------------------------------------

def _as_unit_ball_ext(ctx: PrecisionContext, x) -> ExtElement:
    xe = ExtElement.coerce(ctx, x)
    if not xe.is_zero() and xe.v < 0:
        raise OutOfDomain(f"point of valuation {xe.v} lies outside the unit ball")
    return xe


def _truncate(ctx: PrecisionContext, xe: ExtElement, l: int) -> ExtElement:
    """Keep the digits of index < l (componentwise on re and im)."""
    if l <= 0 or xe.is_zero():
        if l > 0 and xe.absprec < l:
            raise PrecisionExhausted(f"digit {l - 1} requested beyond precision {xe.absprec}")
        return ExtElement.zero(ctx)
    if xe.absprec < l:
        raise PrecisionExhausted(f"digit {l - 1} requested beyond precision {xe.absprec}")
    if xe.v >= l:
        return ExtElement.zero(ctx)
    m = ppow(ctx.p, l - xe.v)
    return ExtElement._make(ctx, xe.v, xe.a % m, xe.b % m, EXACT)


def sigma(l: int, x, ctx: PrecisionContext | None = None, variant: str = "canonical"):
    """sigma_l(x): truncation of the canonical expansion below index l.

    The ``offset`` variant is sigma_l(x - 1) + 1, another approximation of
    the identity on U used to probe sigma-dependence.
    """
    if ctx is None:
        ctx = x.ctx
    if l < 0:
        raise ValueError("level must be non-negative")
    xe = _as_unit_ball_ext(ctx, x)
    if variant == "canonical":
        out = _truncate(ctx, xe, l)
    elif variant == "offset":
        out = _truncate(ctx, xe - 1, l) + 1
    else:
        raise ValueError(f"unknown sigma variant {variant!r}")
    if isinstance(x, PAdicNumber) or isinstance(x, int):
        return out.re
    return out


# plans ------------------------------------------------------------------

def truncation_level(ctx: PrecisionContext, bound: int = 0, n: int | None = None) -> int:
    """Least L with p^(-l(j+1) + (j+1)/(p-1) + bound) <= p^-N for l >= L and all j < n."""
    n = ctx.n if n is None else n
    p, N = ctx.p, ctx.N
    L = 0
    for j in range(n):
        # l (j+1) >= N + bound + (j+1)/(p-1)
        need = Fraction(N + bound) + Fraction(j + 1, p - 1)
        lj = -((-need) // (j + 1))
        L = max(L, int(lj))
    return L


@dataclass(frozen=True)
class AntiderivationPlan:
    n: int
    L: int
    N_out: int
    sigma: str = "canonical"
    descending: bool = False
    notes: tuple = field(default=(), compare=False)


def make_plan(ctx: PrecisionContext, n: int | None = None, bound: int = 0,
              L: int | None = None, sigma_variant: str = "canonical",
              descending: bool = False) -> AntiderivationPlan:
    n = ctx.n if n is None else n
    if n < 1:
        raise ValueError("smoothness n must be positive")
    if sigma_variant not in SIGMA_VARIANTS:
        raise ValueError(f"unknown sigma variant {sigma_variant!r}")
    if L is None:
        L = truncation_level(ctx, bound, n)
    margin = vp_factorial(n, ctx.p)
    return AntiderivationPlan(n, L, ctx.N - margin, sigma_variant, descending)


def _levels(ctx: PrecisionContext, X: ExtElement, L: int, variant: str, start: int = 0):
    """Nodes x_start..x_L and steps to the next node (the last step ends at X)."""
    nodes = [sigma(l, X, ctx, variant) for l in range(start, L + 1)]
    deltas = [nodes[i + 1] - nodes[i] for i in range(len(nodes) - 1)]
    deltas.append(X - nodes[-1])
    return nodes, deltas


def _step_weights(ctx: PrecisionContext, deltas: Sequence, n: int) -> list[list]:
    """w[l][j] = delta_l^(j+1) / (j+1)."""
    out = []
    for d in deltas:
        row, pw = [], d
        for j in range(n):
            row.append(pw / (j + 1))
            pw = pw * d
        out.append(row)
    return out


# environments for jets ---------------------------------------------------

def jet_env(ctx: PrecisionContext, n: int, k: int, moving: Mapping[str, object],
            base: Mapping[str, ExtElement]) -> dict:
    """Bind every leaf spelling; ``moving`` maps real variables to jets.

    A moving ``zk`` means motion along the real direction (x moves, y fixed at 0).
    """
    env = dict(base)
    coords: dict[int, dict[str, object]] = {}
    for name, val in moving.items():
        kind, idx = split_name(name)
        if kind == "z":
            coords.setdefault(idx, {})["x"] = val
            coords[idx]["y"] = ExtElement.zero(ctx)
        elif kind in ("x", "y"):
            coords.setdefault(idx, {})[kind] = val
        elif kind == "zb":
            raise ValueError("integrate along zk or xk/yk, not the conjugate")
        else:
            env[name] = val
    alpha = ctx.alpha
    for idx, have in coords.items():
        x = have.get("x", base.get(f"x{idx}"))
        y = have.get("y", base.get(f"y{idx}"))
        if x is None or y is None:
            raise ValueError(f"coordinate {idx} is only partly bound")
        ay = y * alpha if isinstance(y, Jet) else alpha * y
        env[f"x{idx}"] = x
        env[f"y{idx}"] = y
        env[f"z{idx}"] = x + ay
        env[f"zb{idx}"] = x - ay
    return env


def _multi_indices(n: int, k: int) -> list[tuple[int, ...]]:
    out = []
    for flat in range(n ** k):
        e, f = [], flat
        for _ in range(k):
            e.append(f % n)
            f //= n
        out.append(tuple(e))
    return out


def _ambient_jets(ctx: PrecisionContext, params: Sequence[Jet], ambient: Mapping) -> dict:
    """Affine image origin + sum_i s_i E_i of the parameter jets, split into real coordinates."""
    moving = {}
    for name, (origin, edges) in ambient.items():
        kind, idx = split_name(name)
        parts = [("x", lambda e: e.re), ("y", lambda e: e.im)] if kind == "z" else [(None, lambda e: e.re)]
        for tag, comp in parts:
            acc = ExtElement.coerce(ctx, comp(ExtElement.coerce(ctx, origin)))
            for P, E in zip(params, edges):
                c = comp(ExtElement.coerce(ctx, E))
                if not c.is_zero():
                    acc = P * ExtElement.coerce(ctx, c) + acc
            moving[name if tag is None else f"{tag}{idx}"] = acc
    return moving


def grid_sum(f: Expr, vars_: Sequence[str], endpoints: Sequence, ctx: PrecisionContext,
             plan: AntiderivationPlan, base: Mapping[str, object] | None = None,
             start_levels: Sequence[int] | None = None,
             ambient: Mapping | None = None) -> ExtElement:
    """P^n_{v_1} ... P^n_{v_k} f evaluated at the given endpoints (all from 0).

    With ``ambient`` ({coordinate: (origin, edges)}) the ``vars_`` are only
    parameter labels and f is evaluated on origin + sum_i v_i * edges[i].
    """
    k = len(vars_)
    n = plan.n
    base_env = point_env(ctx, base or {})
    starts = start_levels or [0] * k
    per = []
    for X, s0 in zip(endpoints, starts):
        Xe = _as_unit_ball_ext(ctx, X)
        nodes, deltas = _levels(ctx, Xe, plan.L, plan.sigma, s0)
        per.append((nodes, _step_weights(ctx, deltas, n)))
    idxs = _multi_indices(n, k)
    total = ExtElement.zero(ctx)
    ranges = [range(len(nodes)) for nodes, _ in per]
    combos = list(itertools.product(*ranges))
    if plan.descending:
        combos.reverse()
    one = ExtElement.coerce(ctx, 1)
    for combo in combos:
        params = []
        for i, l in enumerate(combo):
            slopes = [None] * k
            slopes[i] = one
            params.append(Jet.affine(n, k, per[i][0][l], slopes))
        if ambient is None:
            moving = dict(zip(vars_, params))
        else:
            moving = _ambient_jets(ctx, params, ambient)
        env = jet_env(ctx, n, k, moving, base_env)
        try:
            J = Evaluator(ctx, env)(f)
        except PoleHit as exc:
            where = {v: str(per[i][0][l]) for i, (v, l) in enumerate(zip(vars_, combo))}
            raise PoleOnNode(f"node {where}: {exc}") from exc
        coeffs = J.c if isinstance(J, Jet) else [J] + [None] * (len(idxs) - 1)
        for e, c in zip(idxs, coeffs):
            if c is None or c.is_zero() and c.v >= EXACT // 2:
                continue
            w = c
            for i, (l, ei) in enumerate(zip(combo, e)):
                w = w * per[i][1][l][ei]
            total = total + w
    return total


def _pick_var(f: Expr, var: str | None) -> str:
    if var is not None:
        return var
    fv = sorted(free_vars(f))
    coords = {split_name(v)[1] for v in fv if split_name(v)[0] in ("z", "zb", "x", "y")}
    others = [v for v in fv if split_name(v)[0] in ("t", "lam")]
    if not fv:
        return "z1"
    if len(coords) == 1 and not others:
        return f"z{coords.pop()}"
    if len(others) == 1 and not coords:
        return others[0]
    raise ValueError(f"ambiguous integration variable among {fv}")


def antiderive_point(f: Expr, x, ctx: PrecisionContext, plan: AntiderivationPlan | None = None,
                     var: str | None = None, at: Mapping[str, object] | None = None,
                     start_level: int = 0) -> ExtElement:
    """P^n f(x) from 0 along the real variable ``var``; other variables fixed by ``at``.

    ``start_level`` > 0 restricts the operator to the ball of radius
    p^-start_level around sigma_start(x): only levels >= start contribute.
    """
    plan = plan or make_plan(ctx)
    v = _pick_var(f, var)
    return grid_sum(f, [v], [x], ctx, plan, at, [start_level])


def antiderive_between(f: Expr, a, b, ctx: PrecisionContext,
                       plan: AntiderivationPlan | None = None, var: str | None = None,
                       at: Mapping[str, object] | None = None) -> ExtElement:
    """P^n f |_a^b."""
    return (antiderive_point(f, b, ctx, plan, var, at)
            - antiderive_point(f, a, ctx, plan, var, at))


def antiderive_multi(f: Expr, region: GridDomain | None, ctx: PrecisionContext,
                     plan: AntiderivationPlan | None = None,
                     vars_: Sequence[str] = ("x1", "y1"), endpoints: Sequence | None = None,
                     at: Mapping[str, object] | None = None) -> ExtElement:
    """Iterated P^n over the real variables of f * chi_region, each at the beta endpoint."""
    plan = plan or make_plan(ctx)
    if region is not None:
        f = mul(f, region.indicator())
    if endpoints is None:
        endpoints = [ctx.beta] * len(vars_)
    return grid_sum(f, list(vars_), list(endpoints), ctx, plan, at)


def antiderive_nested(f: Expr, vars_: Sequence[str], endpoints: Sequence, ctx: PrecisionContext,
                      plan: AntiderivationPlan | None = None,
                      at: Mapping[str, object] | None = None) -> ExtElement:
    """Same quantity as ``grid_sum`` but built as nested antider nodes (outermost first)."""
    plan = plan or make_plan(ctx)
    g = f
    for v in reversed(vars_[1:]):
        g = antider(g, v, plan.n, plan.L)
    point = dict(at or {})
    for v, X in zip(vars_[1:], endpoints[1:]):
        point[v] = X
    return grid_sum(g, [vars_[0]], [endpoints[0]], ctx, plan, point)


# the antider node -------------------------------------------------------

def pint_value(ev: Evaluator, node: PInt):
    """Value (scalar or jet) of P^n[arg] in node.var at the evaluator's point."""
    ctx = ev.ctx
    env = ev.env
    X = env[node.var]
    sample = next((val for val in env.values() if isinstance(val, Jet)), None)
    k = sample.k if sample is not None else 0
    n = node.n or (sample.n if sample is not None else ctx.n)
    if sample is not None and sample.n != n:
        raise ValueError("nested antiderivative order differs from the outer jet order")
    L = node.levels if node.levels is not None else truncation_level(ctx, 0, n)
    Xs = X if isinstance(X, ExtElement) else X.c[0]
    if Xs is None:
        Xs = ExtElement.zero(ctx)
    nodes, deltas = _levels(ctx, _as_unit_ball_ext(ctx, Xs), L, "canonical")
    deltas[-1] = X - nodes[-1]
    one = ExtElement.coerce(ctx, 1)
    lifted = {}
    for name, val in env.items():
        lifted[name] = val.extend() if isinstance(val, Jet) else Jet.const(n, k + 1, val)
    kind, idx = split_name(node.var)
    total = None
    for l, xl in enumerate(nodes):
        slopes = [None] * (k + 1)
        slopes[k] = one
        s = Jet.affine(n, k + 1, xl, slopes)
        env_l = dict(lifted)
        env_l[node.var] = s
        if kind in ("x", "y"):
            xj = s if kind == "x" else lifted[f"x{idx}"]
            yj = s if kind == "y" else lifted[f"y{idx}"]
            ay = yj * ctx.alpha
            env_l[f"z{idx}"] = xj + ay
            env_l[f"zb{idx}"] = xj - ay
        J = Evaluator(ctx, env_l, ev.pint_hook)(node.arg)
        if not isinstance(J, Jet):
            J = Jet.const(n, k + 1, J)
        d = deltas[l]
        pw = d
        for j in range(n):
            cj = J.slice_last(j)
            term_c = cj.c[0] if k == 0 else cj
            if term_c is not None:
                term = term_c * (pw / (j + 1)) if isinstance(pw, ExtElement) else (pw * (1 / ExtElement.coerce(ctx, j + 1))) * term_c
                total = term if total is None else total + term
            pw = pw * d
    return total if total is not None else ExtElement.zero(ctx)


# closed-form oracle -----------------------------------------------------

def power_rule_sum(t: int, x, ctx: PrecisionContext, n: int, L: int) -> ExtElement:
    """sum_{j<n, l} t(t-1)...(t-j+1) x_l^(t-j) (x_{l+1}-x_l)^(j+1) / (j+1)! computed directly."""
    X = _as_unit_ball_ext(ctx, x)
    nodes, deltas = _levels(ctx, X, L, "canonical")
    total = ExtElement.zero(ctx)
    for xl, d in zip(nodes, deltas):
        falling = 1
        for j in range(n):
            if falling == 0:
                break
            if t - j < 0 and xl.is_zero():
                raise PoleOnNode("power rule node at 0 with negative exponent")
            coeff = Fraction(falling, _fact(j + 1))
            total = total + (xl ** (t - j)) * (d ** (j + 1)) * ExtElement.coerce(ctx, coeff)
            falling *= (t - j)
    return total


def _fact(m: int) -> int:
    out = 1
    for i in range(2, m + 1):
        out *= i
    return out
