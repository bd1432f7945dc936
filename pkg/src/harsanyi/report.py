"""A small named-check report shared by the verification routines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class CheckReport:
    """Per-check counts of instances examined and the failing instances.

    ``failures[name]`` holds at most ``limit`` witnesses; ``failure_counts``
    keeps the full tally.
    """

    title: str = ""
    checked: dict[str, int] = field(default_factory=dict)
    failures: dict[str, list[Any]] = field(default_factory=dict)
    failure_counts: dict[str, int] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    limit: int = 50

    def declare(self, name: str) -> None:
        self.checked.setdefault(name, 0)
        self.failures.setdefault(name, [])
        self.failure_counts.setdefault(name, 0)

    def record(self, name: str, passed: bool, witness: Any = None) -> bool:
        self.declare(name)
        self.checked[name] += 1
        if not passed:
            self.failure_counts[name] += 1
            if len(self.failures[name]) < self.limit:
                self.failures[name].append(witness)
        return passed

    def ok(self, name: str | None = None) -> bool:
        if name is not None:
            return self.failure_counts.get(name, 0) == 0
        return all(v == 0 for v in self.failure_counts.values())

    @property
    def total_failures(self) -> int:
        return sum(self.failure_counts.values())

    @property
    def total_checked(self) -> int:
        return sum(self.checked.values())

    def first_failure(self, name: str):
        items = self.failures.get(name) or []
        return items[0] if items else None

    def to_dict(self) -> dict:
        def plain(x):
            if isinstance(x, (frozenset, set)):
                return sorted(plain(v) for v in x)
            if isinstance(x, (tuple, list)):
                return [plain(v) for v in x]
            if isinstance(x, dict):
                return {str(k): plain(v) for k, v in x.items()}
            if isinstance(x, (int, bool, str)) or x is None:
                return x
            return str(x)

        return {
            "title": self.title,
            "ok": self.ok(),
            "checks": {
                name: {
                    "checked": self.checked[name],
                    "failed": self.failure_counts[name],
                    "witnesses": plain(self.failures[name]),
                }
                for name in self.checked
            },
            "notes": list(self.notes),
        }

    def summary(self) -> str:
        lines = [f"{self.title or 'report'}: {'ok' if self.ok() else 'FAILED'}"]
        for name in self.checked:
            status = "ok" if self.ok(name) else f"{self.failure_counts[name]} failed"
            lines.append(f"  {name}: {self.checked[name]} checked, {status}")
            if not self.ok(name):
                lines.append(f"    first witness: {self.first_failure(name)}")
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)
