"""Structured pass/fail reports shared by the verification routines.

Every verification in this package produces a ``VerificationReport`` made of
individual ``CheckResult`` rows.  Reports serialize to JSON with a schema
version so archived runs stay comparable; the JSON key for the boolean is
``"pass"`` (``passed`` is used on the Python side because ``pass`` is a
keyword).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

SCHEMA_VERSION = 1


def _jsonable(value):
    """Coerce numpy scalars / non-finite floats into JSON-friendly values."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    try:
        return _jsonable(float(value))
    except (TypeError, ValueError):
        return str(value)


@dataclass
class CheckResult:
    """Outcome of a single named check.

    measured_constant carries whatever scalar the check estimated (an
    empirical constant, a sup of ratios, a residual); tolerance is the
    acceptance threshold the check applied, when there is one.
    """

    condition: str
    passed: bool
    measured_constant: float | None = None
    grid_size: int | None = None
    tolerance: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "pass": bool(self.passed),
            "measured_constant": _jsonable(self.measured_constant),
            "grid_size": self.grid_size,
            "tolerance": _jsonable(self.tolerance),
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    """A titled bundle of checks plus the configuration that produced them."""

    title: str
    checks: list[CheckResult] = field(default_factory=list)
    seed: int | None = None
    sample_count: int | None = None
    metadata: dict = field(default_factory=dict)

    def add(
        self,
        condition: str,
        passed: bool,
        measured_constant: float | None = None,
        grid_size: int | None = None,
        tolerance: float | None = None,
        detail: str = "",
    ) -> CheckResult:
        result = CheckResult(
            condition=condition,
            passed=bool(passed),
            measured_constant=None if measured_constant is None else float(measured_constant),
            grid_size=grid_size,
            tolerance=tolerance,
            detail=detail,
        )
        self.checks.append(result)
        return result

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "title": self.title,
            "pass": self.passed,
            "seed": self.seed,
            "sample_count": self.sample_count,
            "metadata": _jsonable(self.metadata),
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)
