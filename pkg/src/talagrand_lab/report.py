"""Inequality reports: the common output of every verifier."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable

REPORT_COLUMNS = ("id", "model", "lhs", "rhs", "constant", "ratio", "verdict")

REL_SLACK = 1e-9


def within(lhs: float, rhs: float, slack: float = 0.0) -> bool:
    """``lhs <= rhs`` up to the floating-point slack used by all verdicts."""
    return lhs <= rhs + REL_SLACK * max(1.0, abs(rhs)) + slack


@dataclass(frozen=True)
class InequalityReport:
    """Both sides of one inequality instance, with the constant that was used.

    ``slack`` is an extra additive allowance for statistical error (Monte
    Carlo verifiers put ``3 * std_error`` here); it is zero for exact
    evaluations.
    """

    id: str
    model: str
    lhs: float
    rhs: float
    constant: float
    slack: float = 0.0
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def ratio(self) -> float:
        if self.rhs == 0.0:
            return 0.0 if within(self.lhs, 0.0, self.slack) else math.inf
        return max(self.lhs, 0.0) / self.rhs

    @property
    def passed(self) -> bool:
        return within(self.lhs, self.rhs, self.slack)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "model": self.model,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "constant": float(self.constant),
            "ratio": _finite_or_none(self.ratio),
            "verdict": self.verdict,
        }


def _finite_or_none(x: float):
    return float(x) if math.isfinite(x) else None


def reports_to_json(reports: Iterable[InequalityReport]) -> str:
    return json.dumps([r.to_record() for r in reports], indent=2)


def reports_to_csv(reports: Iterable[InequalityReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        rec = r.to_record()
        if rec["ratio"] is None:
            rec["ratio"] = "inf"
        writer.writerow(rec)
    return buf.getvalue()


def summarize(reports: Iterable[InequalityReport]) -> dict:
    """Count, failures and maximal ratio over a batch of reports."""
    reports = list(reports)
    ratios = [r.ratio for r in reports]
    return {
        "count": len(reports),
        "failures": sum(not r.passed for r in reports),
        "max_ratio": max(ratios) if ratios else 0.0,
    }


@dataclass(frozen=True)
class Estimate:
    """A scalar estimate with a standard error (0 for exact values)."""

    quantity: str
    value: float
    std_error: float = 0.0
    method: str = "analytic"

    def to_record(self) -> dict:
        return {
            "quantity": self.quantity,
            "value": float(self.value),
            "std_error": float(self.std_error),
            "method": self.method,
        }


ESTIMATE_COLUMNS = ("quantity", "value", "std_error", "method")


def estimates_to_csv(estimates: Iterable[Estimate]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=ESTIMATE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for e in estimates:
        writer.writerow(e.to_record())
    return buf.getvalue()
