"""Command-line front end.

    python3 -m antideriv --prime 3 --precision 12 --suite constants --out run.jsonl
    python3 -m antideriv eval residue --text "1/(z1 - 3)" --at 3 --k 2

Exit codes: 0 all hard checks pass, 1 a hard check failed, 2 configuration
error, 3 an experimental record regressed against the golden report.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import cauchy as cy
from . import opcalc as oc
from .antiderivation import make_plan
from .errors import AntiderivError, ConfigError
from .expr import evaluate, parse_expr, to_text
from .padic import ExtElement, PrecisionContext, format_ext
from .report import SUITES, RunConfig, apply_golden
from .series import cap_precision
from .suites import run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_REGRESS = 0, 1, 2, 3


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of integers, got {text!r}")


def _common(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--prime", type=int, default=3)
    ap.add_argument("--precision", type=int, default=12, help="absolute precision N")
    ap.add_argument("--smoothness", type=_int_list, default=(1,), help="comma list of n")
    ap.add_argument("--sigma", choices=("canonical", "offset"), default="canonical")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="antideriv", description="Run the verification suites.")
    _common(ap)
    ap.add_argument("--radius-grid", type=_int_list, default=(2, 3, 4, 5, 6))
    ap.add_argument("--suite", choices=SUITES + ("all",), default="all")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="report path (stdout when omitted)")
    ap.add_argument("--golden", help="golden report for experimental records")
    ap.add_argument("--expr", help="file of extra integrands, one expression per line")
    return ap


def build_eval_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="antideriv eval", description="Run one computation.")
    ap.add_argument("command", choices=("residue", "laurent", "cauchy", "funcalc", "constant"))
    _common(ap)
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--expr", help="file holding the expression")
    src.add_argument("--text", help="the expression itself")
    ap.add_argument("--at", default="0", help="point (any constant expression, e.g. 1/3 or 2+alpha)")
    ap.add_argument("--n", type=int, help="smoothness (defaults to the first --smoothness value)")
    ap.add_argument("--k", type=int, help="border radius exponent")
    ap.add_argument("--window", default="-3,3", help="Laurent index window lo,hi")
    ap.add_argument("--R", type=int, help="Laurent border radius exponent")
    ap.add_argument("--matrix", help="JSON rows of integers for funcalc")
    return ap


def run(argv: list[str]) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(prime=args.prime, precision=args.precision, smoothness=args.smoothness,
                    radius_grid=args.radius_grid, sigma=args.sigma, suite=args.suite,
                    seed=args.seed, out=args.out, golden=args.golden, expr=args.expr)
    try:
        report = run_suite(cfg)
        if cfg.golden:
            apply_golden(report, cfg.golden)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = report.dumps()
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    for r in report.hard_failures():
        print(f"FAIL {r.id} ({r.anchor}) defect={r.defect} precision={r.precision}"
              + (f" {r.note}" if r.note else ""), file=sys.stderr)
    for r in report.regressions():
        print(f"REGRESS {r.id} ({r.anchor})", file=sys.stderr)
    return report.exit_code()


def _read_expr(args):
    if args.text is not None:
        return parse_expr(args.text)
    if args.expr is not None:
        return parse_expr(Path(args.expr).read_text().strip())
    return None


def eval_once(argv: list[str]) -> int:
    args = build_eval_parser().parse_args(argv)
    try:
        ctx = PrecisionContext(args.prime, args.precision)
        n = args.n if args.n is not None else args.smoothness[0]
        plan = make_plan(ctx, n=n, sigma_variant=args.sigma)
        f = _read_expr(args)
        at = evaluate(parse_expr(args.at), {}, ctx)
        if args.command in ("residue", "laurent", "cauchy", "funcalc") and f is None:
            raise ConfigError(f"{args.command} needs --expr or --text")
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    header = {"command": args.command, "prime": ctx.p, "precision": ctx.N, "n": plan.n,
              "sigma": plan.sigma, "guaranteed": plan.N_out}
    if f is not None:
        header["expr"] = to_text(f)
    try:
        lines = _eval(args, ctx, plan, f, at, header)
    except (ConfigError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AntiderivError as exc:
        print(f"# {json.dumps(header, sort_keys=True, ensure_ascii=False)}")
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"# {json.dumps(header, sort_keys=True, ensure_ascii=False)}")
    for ln in lines:
        print(ln)
    return EXIT_OK


def _val(x: ExtElement, prec: int) -> str:
    x = cap_precision(x, prec)
    v = "inf" if x.is_zero() else str(int(x.v))
    return f"{format_ext(x)}  (valuation {v}, precision {prec})"


def _eval(args, ctx, plan, f, at, header) -> list[str]:
    prec = plan.N_out
    if args.command == "constant":
        k = args.k if args.k is not None else 2
        c = cy.compute_C_alpha(ctx, plan=plan, k=k)
        header["k"] = k
        return [_val(c.value, prec), f"nonzero: {c.nonzero}"]
    if args.command == "residue":
        header["at"] = format_ext(cap_precision(at, ctx.N))
        header["k"] = args.k
        return [_val(cy.residue(f, at, ctx, plan, k=args.k), prec)]
    if args.command == "cauchy":
        header["at"] = format_ext(cap_precision(at, ctx.N))
        return [_val(cy.cauchy_eval(f, at, ctx, plan, k=args.k), prec)]
    if args.command == "laurent":
        lo, hi = _int_list(args.window)
        lp = cy.laurent_plan(ctx) if args.n is None else plan
        L = cy.laurent_coeffs(f, at, (lo, hi), ctx, R=args.R, plan=lp)
        header.update({"at": format_ext(cap_precision(at, ctx.N)), "window": [lo, hi],
                       "R": L.R, "n": lp.n, "guaranteed": L.precision})
        out = [f"a[{k}] = {_val(a, L.precision)}" for k, a in sorted(L.coeffs.items())]
        return out + [f"classification: {cy.classify_critical_point(L)}"]
    # funcalc
    if not args.matrix:
        raise ConfigError("funcalc needs --matrix")
    rows = json.loads(args.matrix)
    T = oc.MatrixOverExt(ctx, rows)
    F = oc.func_calc(f, T, plan)
    header["matrix"] = rows
    return [" | ".join(format_ext(cap_precision(x, prec)) for x in r) for r in F.rows]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] == "eval":
            return eval_once(argv[1:])
        return run(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad flags, which is also our config-error code
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
