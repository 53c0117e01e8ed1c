"""Uniform result objects for the verification routines.

Each verification produces a VerifyReport made of named checks.  A failed
check carries a witness string: the offending inputs plus both side values,
serialized canonically so reports are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List


@dataclass
class Check:
    name: str
    ok: bool
    witness: str = ""


@dataclass
class VerifyReport:
    title: str
    checks: List[Check] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    skipped: bool = False

    @property
    def ok(self) -> bool:
        return not self.skipped and all(c.ok for c in self.checks)

    def add(self, name: str, ok: bool, witness: str = "") -> None:
        self.checks.append(Check(name, ok, witness))

    def require(self, name: str, ok: bool, witness: str = "") -> bool:
        """Record a check; returns ok so callers can gate early."""
        self.add(name, ok, witness)
        return ok

    def first_failure(self):
        return next((c for c in self.checks if not c.ok), None)

    def merge(self, other: "VerifyReport", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(
                Check(f"{prefix}{c.name}" if prefix else c.name, c.ok, c.witness)
            )
        self.notes.extend(other.notes)

    def lines(self) -> List[str]:
        out = [f"[{'pass' if self.ok else 'FAIL'}] {self.title}"]
        for c in self.checks:
            state = "ok" if c.ok else "FAIL"
            line = f"  {state:4} {c.name}"
            if c.witness:
                line += f"  witness: {c.witness}"
            out.append(line)
        for n in self.notes:
            out.append(f"  note: {n}")
        return out
