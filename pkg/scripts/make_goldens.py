"""Write golden reports for the suites that carry experimental records.

    python3 scripts/make_goldens.py [--out goldens]

The CLI compares later runs against these with ``--golden``.
"""
import argparse
from pathlib import Path

from antideriv.report import RunConfig
from antideriv.suites import run_suite

SUITES = ("constants", "dbar", "kernels")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "goldens"))
    ap.add_argument("--prime", type=int, default=3)
    ap.add_argument("--precision", type=int, default=12)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in SUITES:
        smooth = (1, 2, 3) if name == "constants" else (1,)
        cfg = RunConfig(prime=args.prime, precision=args.precision, smoothness=smooth, suite=name)
        path = out / f"{name}-p{args.prime}-N{args.precision}.jsonl"
        run_suite(cfg).write(path)
        print(path)


if __name__ == "__main__":
    main()
