"""Verification report models."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class CheckStatus(Enum):
    """Outcome of a single property check."""

    PASSED = "passed"
    FAILED = "failed"
    SKIPPED = "skipped"
    FLAGGED = "flagged"


@dataclass
class CheckResult:
    """One property check inside a suite."""

    suite: str
    name: str
    status: CheckStatus
    beta: float | None = None
    detail: str = ""
    metrics: dict[str, Any] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.status is CheckStatus.FAILED

    def to_dict(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "name": self.name,
            "status": self.status.value,
            "beta": self.beta,
            "detail": self.detail,
            "metrics": dict(self.metrics),
        }


@dataclass
class SuiteReport:
    """Collection of checks produced by one or more suites."""

    name: str
    checks: list[CheckResult] = field(default_factory=list)

    def add(
        self,
        name: str,
        passed: bool,
        beta: float | None = None,
        detail: str = "",
        **metrics: Any,
    ) -> CheckResult:
        """Record a pass/fail check."""
        status = CheckStatus.PASSED if passed else CheckStatus.FAILED
        check = CheckResult(self.name, name, status, beta, detail, metrics)
        self.checks.append(check)
        return check

    def flag(self, name: str, status: CheckStatus, beta: float | None = None, detail: str = "") -> CheckResult:
        """Record a skipped or flagged check."""
        check = CheckResult(self.name, name, status, beta, detail)
        self.checks.append(check)
        return check

    @classmethod
    def merge(cls, name: str, reports: list["SuiteReport"]) -> "SuiteReport":
        """Concatenate several reports in order."""
        merged = cls(name)
        for report in reports:
            merged.checks.extend(report.checks)
        return merged

    @property
    def passed(self) -> bool:
        """True if no check failed."""
        return not any(check.failed for check in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [check for check in self.checks if check.failed]

    def counts(self) -> dict[str, int]:
        """Number of checks per status."""
        result = {status.value: 0 for status in CheckStatus}
        for check in self.checks:
            result[check.status.value] += 1
        return result

    def find(self, name: str, beta: float | None = None) -> list[CheckResult]:
        """Checks with a given name (and beta, when provided)."""
        return [
            check
            for check in self.checks
            if check.name == name and (beta is None or check.beta == beta)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "suite": self.name,
            "passed": self.passed,
            "counts": self.counts(),
            "checks": [check.to_dict() for check in self.checks],
        }
