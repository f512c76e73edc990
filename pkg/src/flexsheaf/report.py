"""Small result containers shared by the checkers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


class BudgetExceeded(RuntimeError):
    """An exhaustive search would exceed its configured budget."""


@dataclass
class ValidationReport:
    """Outcome of an exhaustive check.

    ``violations`` are hard failures; ``warnings`` do not affect ``ok``.
    """

    subject: str = ""
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def fail(self, msg: str) -> None:
        self.violations.append(msg)

    def warn(self, msg: str) -> None:
        self.warnings.append(msg)

    def extend(self, other: "ValidationReport", prefix: str = "") -> None:
        self.violations.extend(prefix + v for v in other.violations)
        self.warnings.extend(prefix + w for w in other.warnings)

    def to_dict(self) -> dict[str, Any]:
        return {
            "subject": self.subject,
            "ok": self.ok,
            "violations": list(self.violations),
            "warnings": list(self.warnings),
            **({"details": self.details} if self.details else {}),
        }

    def __str__(self) -> str:
        head = f"{self.subject}: {'PASS' if self.ok else 'FAIL'}"
        lines = [head] + [f"  violation: {v}" for v in self.violations] + [f"  warning: {w}" for w in self.warnings]
        return "\n".join(lines)
