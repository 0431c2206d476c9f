"""Structured pass/fail records for computational checks.

A report carries one record per checked location so that a failure
always comes with a witness: where it happened, what was expected, and
what the computation actually produced.  Values render as exact "p/q"
strings (or lists of them) so reports are reproducible byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .exact import Matrix, Vector, format_rational


def render_value(value: Any) -> Any:
    """JSON-ready rendering with rationals as exact "p/q" strings."""
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, Vector):
        return value.to_strings()
    if isinstance(value, Matrix):
        return value.to_rows()
    if isinstance(value, (list, tuple)):
        return [render_value(v) for v in value]
    if isinstance(value, dict):
        return {str(k): render_value(v) for k, v in value.items()}
    return value


@dataclass
class CheckRecord:
    """One checked location with its expected and actual values."""

    location: str
    passed: bool
    expected: Any = None
    actual: Any = None

    def to_dict(self) -> dict:
        return {
            "location": self.location,
            "passed": self.passed,
            "expected": render_value(self.expected),
            "actual": render_value(self.actual),
        }


@dataclass
class VerificationReport:
    """Pass/fail record for one claim, with witnesses for every failure."""

    claim: str
    params: dict = field(default_factory=dict)
    checks: list[CheckRecord] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def witnesses(self) -> list[CheckRecord]:
        return [c for c in self.checks if not c.passed]

    def record(self, location: str, expected: Any, actual: Any) -> bool:
        ok = expected == actual
        self.checks.append(CheckRecord(location, ok, expected, actual))
        return ok

    def record_flag(self, location: str, passed: bool, expected: Any = None,
                    actual: Any = None) -> bool:
        self.checks.append(CheckRecord(location, passed, expected, actual))
        return passed

    def note(self, text: str) -> None:
        self.notes.append(text)

    def first_failure(self) -> CheckRecord | None:
        return next((c for c in self.checks if not c.passed), None)

    def to_dict(self) -> dict:
        return {
            "claim": self.claim,
            "passed": self.passed,
            "params": render_value(self.params),
            "checks": [c.to_dict() for c in self.checks],
            "notes": list(self.notes),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = f"{status} {self.claim}"
        fail = self.first_failure()
        if fail is not None:
            line += f" (first failure at {fail.location})"
        return line
