"""Validation reports: a list of violations, clean iff empty."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.violations

    def add(self, message: str) -> None:
        self.violations.append(message)

    def extend(self, messages) -> None:
        self.violations.extend(messages)

    def __str__(self) -> str:
        return "clean" if self.clean else "\n".join(self.violations)
