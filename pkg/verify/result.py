"""
CheckResult: the outcome of one inequality check over many instances.

Each recorded instance contributes a normalized slack (rhs - lhs) / scale; the
check passes when it has at least one instance and every slack is >= -tolerance.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst_slack: float
    tolerance: float
    instances: int = 0
    violations: int = 0
    details: List[Tuple[str, float, float]] = field(default_factory=list)
    skipped: List[Tuple[str, str]] = field(default_factory=list)
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def inconclusive(self) -> bool:
        return self.instances == 0

    def as_row(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "instances": self.instances,
            "violations": self.violations,
            "worst_slack": self.worst_slack,
            "tolerance": self.tolerance,
            "passed": int(self.passed),
        }


class CheckRecorder:
    """Collects (lhs <= rhs) instances for one check and builds its CheckResult."""

    def __init__(self, name: str, tolerance: float, keep_details: bool = True):
        self.name = name
        self.tolerance = tolerance
        self.keep_details = keep_details
        self.instances = 0
        self.violations = 0
        self.worst_slack = math.inf
        self.details: List[Tuple[str, float, float]] = []
        self.skipped: List[Tuple[str, str]] = []
        self.diagnostics: Dict[str, float] = {}

    def record(self, instance: str, lhs: float, rhs: float, scale: float = 1.0) -> float:
        scale = scale if scale > 0 else 1.0
        slack = (rhs - lhs) / scale
        if math.isnan(slack):
            slack = -math.inf
        self.instances += 1
        if slack < -self.tolerance:
            self.violations += 1
        self.worst_slack = min(self.worst_slack, slack)
        if self.keep_details or slack < -self.tolerance:
            self.details.append((instance, float(lhs), float(rhs)))
        return slack

    def skip(self, instance: str, reason: str):
        self.skipped.append((instance, reason))

    def note(self, key: str, value: float, reduce=max):
        """Keep a running diagnostic, combined with reduce (default max)."""
        self.diagnostics[key] = reduce(self.diagnostics[key], value) if key in self.diagnostics else value

    def result(self) -> CheckResult:
        return CheckResult(
            name=self.name,
            passed=self.instances > 0 and self.violations == 0,
            worst_slack=self.worst_slack,
            tolerance=self.tolerance,
            instances=self.instances,
            violations=self.violations,
            details=self.details,
            skipped=self.skipped,
            diagnostics=dict(self.diagnostics),
        )


def merge_results(name: str, results: Iterable[CheckResult]) -> CheckResult:
    """Combine per-instance results of the same check, prefixing instance ids."""
    results = list(results)
    tolerance = max((r.tolerance for r in results), default=0.0)
    merged = CheckRecorder(name, tolerance)
    for i, res in enumerate(results):
        merged.instances += res.instances
        merged.violations += res.violations
        merged.worst_slack = min(merged.worst_slack, res.worst_slack)
        merged.details.extend((f"{i}/{inst}", lhs, rhs) for inst, lhs, rhs in res.details)
        merged.skipped.extend((f"{i}/{inst}", why) for inst, why in res.skipped)
        for key, value in res.diagnostics.items():
            merged.note(key, value)
    return merged.result()
