"""Invariant reports returned by the audit, verify and validate operations."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any


@dataclass
class AuditMetric:
    """A single checked quantity."""

    name: str
    value: Any
    threshold: Any = None
    passed: bool = True
    severity: str = "info"  # info, warning, error


@dataclass
class InvariantReport:
    """Collected metrics of one check; any failing error-severity metric fails it."""

    check: str
    passed: bool = True
    metrics: list[AuditMetric] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def add_metric(self, metric: AuditMetric) -> None:
        """Add a metric and update overall pass status."""
        self.metrics.append(metric)
        if not metric.passed:
            if metric.severity == "error":
                self.passed = False
                self.errors.append(f"{metric.name}: {_text(metric.value)}")
            else:
                self.warnings.append(f"{metric.name}: {_text(metric.value)}")

    def record(self, name: str, value: Any, threshold: Any = None, passed: bool = True,
               severity: str | None = None) -> AuditMetric:
        """Shorthand: failing metrics default to error severity."""
        metric = AuditMetric(
            name=name,
            value=value,
            threshold=threshold,
            passed=passed,
            severity=severity or ("info" if passed else "error"),
        )
        self.add_metric(metric)
        return metric

    def value(self, name: str) -> Any:
        for metric in self.metrics:
            if metric.name == name:
                return metric.value
        raise KeyError(name)

    def merge(self, other: InvariantReport, prefix: str = "") -> None:
        for metric in other.metrics:
            self.add_metric(AuditMetric(prefix + metric.name, metric.value, metric.threshold,
                                        metric.passed, metric.severity))

    def to_dict(self) -> dict[str, Any]:
        return {
            "check": self.check,
            "passed": self.passed,
            "metrics": [
                {
                    "name": m.name,
                    "value": jsonable(m.value),
                    "threshold": jsonable(m.threshold),
                    "passed": m.passed,
                    "severity": m.severity,
                }
                for m in self.metrics
            ],
            "warnings": list(self.warnings),
            "errors": list(self.errors),
        }

    def save(self, path: Path) -> None:
        """Save as canonical JSON (sorted keys, trailing newline)."""
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: Path) -> InvariantReport:
        """Load a saved report; values come back in their JSON text form."""
        data = json.loads(path.read_text())
        report = cls(check=data["check"])
        for m in data["metrics"]:
            report.add_metric(AuditMetric(m["name"], m["value"], m["threshold"], m["passed"],
                                          m["severity"]))
        return report


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _text(value: Any) -> str:
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return str(value)


def jsonable(value: Any) -> Any:
    """Exact rationals become strings so saved reports never lose precision."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value) or math.isnan(value):
            return _text(value)
        return value
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "item"):
        return jsonable(value.item())
    return str(value)
