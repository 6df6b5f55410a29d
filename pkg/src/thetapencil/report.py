"""Machine- and human-readable verification reports.

A report is a list of named checks, each carrying pass/fail, the rendered
symbolic residual when there is one, and an optional witness.  The JSON
form is canonical (checks sorted by name, wall times omitted) so that two
runs with the same flags and seed produce identical bytes; wall times are
shown in the human rendering only.
"""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: str | None = None
    witness: str | None = None
    detail: str | None = None
    wall_time: float = 0.0


@dataclass
class Report:
    title: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_status(self) -> int:
        return 0 if self.ok else 1

    def add(self, name: str, passed: bool, residual: str | None = None,
            witness: str | None = None, detail: str | None = None,
            wall_time: float = 0.0) -> CheckResult:
        check = CheckResult(name, passed, residual, witness, detail, wall_time)
        self.checks.append(check)
        return check

    @contextmanager
    def timed(self, name: str):
        """Collect a check with its wall time: yield a dict the body fills."""
        slot = {"passed": False, "residual": None, "witness": None, "detail": None}
        start = time.perf_counter()
        yield slot
        self.add(name, slot["passed"], slot["residual"], slot["witness"],
                 slot["detail"], time.perf_counter() - start)

    def sorted_checks(self) -> list[CheckResult]:
        return sorted(self.checks, key=lambda c: c.name)

    def to_json(self) -> str:
        payload = {
            "title": self.title,
            "ok": self.ok,
            "checks": [
                {k: v for k, v in (
                    ("name", c.name), ("passed", c.passed),
                    ("residual", c.residual), ("witness", c.witness),
                    ("detail", c.detail)) if v is not None}
                for c in self.sorted_checks()
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [self.title]
        for c in self.sorted_checks():
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"  [{status}] {c.name}  ({c.wall_time:.2f}s)")
            if c.detail:
                lines.append(f"         {c.detail}")
            if c.residual is not None:
                lines.append(f"         residual: {c.residual}")
            if c.witness is not None:
                lines.append(f"         witness: {c.witness}")
        lines.append("result: " + ("all checks passed" if self.ok else "FAILURES present"))
        return "\n".join(lines) + "\n"
