"""Structured measurement records: norms, fits, and certificates."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field as dfield
from pathlib import Path


def _jsonable(x):
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if isinstance(x, float):
        return x if math.isfinite(x) else str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    try:
        import numpy as np

        if isinstance(x, np.generic):
            return _jsonable(x.item())
        if isinstance(x, np.ndarray):
            return _jsonable(x.tolist())
    except ImportError:  # pragma: no cover
        pass
    try:
        from fractions import Fraction

        if isinstance(x, Fraction):
            return str(x)
    except ImportError:  # pragma: no cover
        pass
    return str(x)


@dataclass
class CheckResult:
    """One hard certificate: a named value against a tolerance."""

    name: str
    value: float
    tol: float
    passed: bool
    detail: str = ""

    @classmethod
    def le(cls, name: str, value: float, tol: float, detail: str = "") -> "CheckResult":
        return cls(name=name, value=float(value), tol=float(tol),
                   passed=bool(value <= tol), detail=detail)

    @classmethod
    def within(cls, name: str, value: float, lo: float, hi: float, detail: str = "") -> "CheckResult":
        return cls(name=name, value=float(value), tol=float(hi),
                   passed=bool(lo <= value <= hi),
                   detail=detail or f"expected in [{lo}, {hi}]")

    @classmethod
    def flag(cls, name: str, ok: bool, detail: str = "") -> "CheckResult":
        return cls(name=name, value=0.0 if ok else 1.0, tol=0.5, passed=bool(ok), detail=detail)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"[{status}] {self.name}: value={self.value:.6g} tol={self.tol:.6g}{extra}"


@dataclass
class NormReport:
    """Flat record store for measured norms, ratios, fits, and checks."""

    title: str = "report"
    rows: list = dfield(default_factory=list)
    fits: list = dfield(default_factory=list)
    checks: list = dfield(default_factory=list)
    meta: dict = dfield(default_factory=dict)

    def add(self, name: str, value, **params):
        self.rows.append({"name": name, "value": _jsonable(value), **_jsonable(params)})

    def add_fit(self, fit, **extra):
        rec = {
            "family": fit.family,
            "p": _jsonable(fit.p),
            "param": fit.param_name,
            "params": _jsonable(fit.params),
            "norms": _jsonable(fit.norms),
            "slope": fit.slope,
            "predicted": fit.predicted,
            "rel_err": fit.rel_err,
        }
        rec.update(_jsonable(extra))
        self.fits.append(rec)

    def add_check(self, check: CheckResult):
        self.checks.append(check)
        return check

    def extend(self, other: "NormReport"):
        self.rows.extend(other.rows)
        self.fits.extend(other.fits)
        self.checks.extend(other.checks)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed_checks(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_json(self, path=None) -> str:
        payload = {
            "title": self.title,
            "meta": _jsonable(self.meta),
            "rows": self.rows,
            "fits": self.fits,
            "checks": [
                {"name": c.name, "value": _jsonable(c.value), "tol": _jsonable(c.tol),
                 "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
            "all_passed": self.all_passed,
        }
        text = json.dumps(payload, indent=2)
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["section", "name", "value", "details"])
            for row in self.rows:
                rest = {k: v for k, v in row.items() if k not in ("name", "value")}
                writer.writerow(["norm", row["name"], row["value"], json.dumps(rest)])
            for fit in self.fits:
                writer.writerow(
                    ["fit", f"{fit['family']}(p={fit['p']})", fit["slope"],
                     json.dumps({"predicted": fit["predicted"], "rel_err": fit["rel_err"]})]
                )
            for c in self.checks:
                writer.writerow(["check", c.name, c.value,
                                 json.dumps({"tol": c.tol, "passed": c.passed, "detail": c.detail})])

    def print_checks(self):
        for c in self.checks:
            print(c.line())
