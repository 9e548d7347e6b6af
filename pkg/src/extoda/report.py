"""Check results shared by the verification layers and the CLI."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CheckResult:
    check_id: str
    anchor: str
    passed: bool
    residual: str = "0"
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"check_id": self.check_id, "anchor": self.anchor,
                "status": "pass" if self.passed else "fail",
                "residual_summary": self.residual, **({"details": self.details} if self.details else {})}

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.check_id}: {self.anchor}"


def summarize(x, limit: int = 160) -> str:
    """Short text for a residual (anything with to_str, or a plain value)."""
    if not x:
        return "0"
    s = x.to_str() if hasattr(x, "to_str") else str(x)
    n = len(getattr(x, "terms", ())) or None
    if len(s) > limit:
        s = s[:limit] + "..."
    return f"{n} terms: {s}" if n else s


@dataclass
class Report:
    results: list = field(default_factory=list)

    def add(self, r: CheckResult) -> CheckResult:
        self.results.append(r)
        return r

    def extend(self, rs) -> None:
        self.results.extend(rs)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def as_dict(self) -> dict:
        return {"passed": self.passed, "checks": [r.as_dict() for r in self.results]}
