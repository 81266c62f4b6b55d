"""Pass/fail records shared by every verification routine."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class Check:
    name: str
    predicted: Any
    measured: Any
    tolerance: Any
    verdict: str
    note: str = ""

    @classmethod
    def compare(cls, name, predicted, measured, tolerance, note=""):
        ok = abs(measured - predicted) <= tolerance
        return cls(name, predicted, measured, tolerance, PASS if ok else FAIL, note)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS


@dataclass
class Report:
    """An ordered list of checks plus free-form context values.

    ``info`` entries are printed before any check, so hypotheses (such as a
    resolvent's integrability verdict) always precede the conclusions drawn
    from them.
    """

    title: str
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    @property
    def status(self) -> str:
        verdicts = {c.verdict for c in self.checks}
        if FAIL in verdicts:
            return FAIL
        if INCONCLUSIVE in verdicts or not verdicts:
            return INCONCLUSIVE
        return PASS

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self):
        yield f"report = {self.title}"
        for k, v in self.info.items():
            yield f"{k} = {_fmt(v)}"
        for c in self.checks:
            yield f"{c.name}_predicted = {_fmt(c.predicted)}"
            yield f"{c.name}_measured = {_fmt(c.measured)}"
            yield f"{c.name}_tolerance = {_fmt(c.tolerance)}"
            yield f"{c.name}_verdict = {c.verdict}"
            if c.note:
                yield f"{c.name}_note = {c.note}"
        yield f"status = {self.status}"

    def to_text(self) -> str:
        return "\n".join(self.lines()) + "\n"


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v).lower() if isinstance(v, bool) else "none"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)
