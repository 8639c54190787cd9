"""Run configuration, check records and the line-delimited JSON report format.

A report is one metadata line followed by one line per check, sorted by
check id.  Values are digit strings (see ``format_ext``) capped at the
guaranteed precision, so two runs with the same configuration produce
byte-identical files.
"""
from __future__ import annotations

import json
import platform
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .errors import ConfigError
from .padic import ExtElement, PrecisionContext, format_ext
from .series import cap_precision

SUITES = ("arith", "sigma", "antiderive", "stokes", "constants", "cauchy", "residues",
          "laurent", "dbar", "kernels", "funcalc")
FORMAT_VERSION = 1

PASS, FAIL, ERROR = "pass", "fail", "error"
RECORDED, MATCH, REGRESS, SKIPPED = "recorded", "match", "regress", "skipped"


@dataclass(frozen=True)
class RunConfig:
    prime: int = 3
    precision: int = 12
    smoothness: tuple = (1,)
    radius_grid: tuple = (2, 3, 4, 5, 6)
    sigma: str = "canonical"
    suite: str = "all"
    seed: int = 0
    out: str | None = None
    golden: str | None = None
    expr: str | None = None

    def validate(self) -> PrecisionContext:
        """Build the precision context; every precondition failure is a ConfigError."""
        if self.suite != "all" and self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}")
        if self.sigma not in ("canonical", "offset"):
            raise ConfigError(f"unknown sigma variant {self.sigma!r}")
        if not self.smoothness or any(n < 1 for n in self.smoothness):
            raise ConfigError("smoothness values must be positive")
        if not self.radius_grid or any(k < 1 for k in self.radius_grid):
            raise ConfigError("radius exponents must be positive")
        return PrecisionContext(self.prime, self.precision, n=min(self.smoothness))

    def suites(self) -> tuple:
        return SUITES if self.suite == "all" else (self.suite,)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["smoothness"] = list(self.smoothness)
        d["radius_grid"] = list(self.radius_grid)
        # output locations do not change any computed value
        d.pop("out")
        d.pop("golden")
        return d


def fmt(x, prec: int | None = None) -> str | None:
    """Digit-string form of a value; ints, Fractions and strings pass through as text."""
    if x is None:
        return None
    if isinstance(x, ExtElement):
        return format_ext(cap_precision(x, prec) if prec is not None else x)
    if isinstance(x, (int, Fraction)):
        return str(x)
    return str(x)


@dataclass
class CheckRecord:
    id: str
    anchor: str
    inputs: dict
    lhs: str | None
    rhs: str | None
    defect: int | None
    precision: int | None
    status: str
    tier: str = "hard"
    note: str | None = None

    def line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))


@dataclass
class Report:
    config: RunConfig
    records: list = field(default_factory=list)

    def add(self, rec: CheckRecord) -> None:
        self.records.append(rec)

    def extend(self, recs: Iterable[CheckRecord]) -> None:
        self.records.extend(recs)

    def sorted_records(self) -> list:
        return sorted(self.records, key=lambda r: r.id)

    def metadata(self) -> dict:
        counts: dict = {}
        for r in self.records:
            counts[r.status] = counts.get(r.status, 0) + 1
        return {
            "kind": "metadata",
            "format": FORMAT_VERSION,
            "config": self.config.as_dict(),
            "environment": {"package": "antideriv", "python": platform.python_version_tuple()[0]
                            + "." + platform.python_version_tuple()[1]},
            "counts": dict(sorted(counts.items())),
        }

    def dumps(self) -> str:
        lines = [json.dumps(self.metadata(), sort_keys=True, separators=(",", ":"))]
        lines += [r.line() for r in self.sorted_records()]
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    def hard_failures(self) -> list:
        return [r for r in self.records if r.tier == "hard" and r.status in (FAIL, ERROR)]

    def regressions(self) -> list:
        return [r for r in self.records if r.status == REGRESS]

    def exit_code(self) -> int:
        if self.hard_failures():
            return 1
        if self.regressions():
            return 3
        return 0


def load_report(path: str | Path) -> tuple[dict, dict]:
    """(metadata, {id: record dict}) from a report file."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ConfigError(f"{path} is empty")
    meta = json.loads(lines[0])
    recs = {}
    for ln in lines[1:]:
        if ln.strip():
            d = json.loads(ln)
            recs[d["id"]] = d
    return meta, recs


_COMPARED = ("lhs", "rhs", "defect", "precision")


def apply_golden(report: Report, golden_path: str | Path) -> None:
    """Mark experimental records as match or regress against a golden report.

    Records missing from the golden file keep the status ``recorded``.
    """
    _, golden = load_report(golden_path)
    for r in report.records:
        if r.tier != "experimental" or r.status == ERROR:
            continue
        g = golden.get(r.id)
        if g is None:
            continue
        same = all(g.get(k) == getattr(r, k) for k in _COMPARED)
        r.status = MATCH if same else REGRESS
