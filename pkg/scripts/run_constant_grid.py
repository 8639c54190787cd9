"""Print the Cauchy constant over smoothness orders and radius exponents.

    python3 scripts/run_constant_grid.py --prime 3 --precision 12 --n 1,2,3 --k 2..6

Each row gives the value at (n, k) and its agreement with the (n=first, k=first) entry.
"""
import argparse

from antideriv.antiderivation import make_plan
from antideriv.cauchy import compute_C_alpha
from antideriv.chains import agreement
from antideriv.padic import PrecisionContext, format_ext
from antideriv.series import cap_precision


def int_range(text):
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(x) for x in text.split(",")]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--prime", type=int, default=3)
    ap.add_argument("--precision", type=int, default=12)
    ap.add_argument("--n", type=int_range, default=[1, 2, 3])
    ap.add_argument("--k", type=int_range, default=[2, 3, 4, 5, 6])
    ap.add_argument("--sigma", default="canonical")
    args = ap.parse_args()
    ctx = PrecisionContext(args.prime, args.precision)
    ref = None
    for n in args.n:
        plan = make_plan(ctx, n=n, sigma_variant=args.sigma)
        for k in args.k:
            c = compute_C_alpha(ctx, n, k, plan=plan, sigma_variant=args.sigma)
            ref = c.value if ref is None else ref
            print(f"n={n} k={k} agree={min(agreement(c.value, ref), ctx.N):>3} "
                  f"C={format_ext(cap_precision(c.value, plan.N_out))}")


if __name__ == "__main__":
    main()
