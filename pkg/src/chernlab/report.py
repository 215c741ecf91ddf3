"""Small result containers shared by all validation routines."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CheckResult:
    """One named residual check with its tolerance and verdict."""

    check_id: str
    residual: float
    tol: float
    formula: str = ""
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)

    def as_dict(self) -> dict:
        return {
            "id": self.check_id,
            "residual": float(self.residual),
            "tol": float(self.tol),
            "passed": self.passed,
            "formula": self.formula,
            "note": self.note,
        }


@dataclass
class ValidationReport:
    """A bag of CheckResults for one validated object."""

    subject: str
    checks: list[CheckResult] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def add(self, check_id: str, residual: float, tol: float, formula: str = "", note: str = "") -> CheckResult:
        result = CheckResult(check_id, float(residual), float(tol), formula, note)
        self.checks.append(result)
        return result

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def max_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def failing(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def residual(self, check_id: str) -> float:
        for c in self.checks:
            if c.check_id == check_id:
                return c.residual
        raise KeyError(check_id)

    def as_dict(self) -> dict:
        return {
            "subject": self.subject,
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "notes": self.notes,
        }

    def summary(self) -> str:
        lines = [f"[{'PASS' if self.passed else 'FAIL'}] {self.subject}"]
        for c in self.checks:
            mark = "ok " if c.passed else "BAD"
            lines.append(f"  {mark} {c.check_id}: residual={c.residual:.3e} tol={c.tol:.1e}")
        return "\n".join(lines)
