"""Inequality findings shared by the scans, the bound checks and the acceptance suite."""
import math
from dataclasses import dataclass, field
from typing import List, Optional


@dataclass(frozen=True)
class Check:
    """
    One evaluated inequality `value <= bound` (or `>=` when `direction` is ">=").

    Report-only checks carry `asserted=False` and never fail a report.
    """

    name: str
    value: float
    bound: float
    direction: str = "<="
    asserted: bool = True
    note: str = ""

    @property
    def passed(self) -> bool:
        if math.isnan(self.value) or math.isnan(self.bound):
            return not self.asserted
        if self.direction == "<=":
            return self.value <= self.bound
        return self.value >= self.bound

    @property
    def ratio(self) -> Optional[float]:
        if self.bound == 0:
            return None if self.value != 0 else 1.0
        return self.value / self.bound

    def as_row(self) -> dict:
        return {
            "check": self.name,
            "value": self.value,
            "bound": self.bound,
            "direction": self.direction,
            "asserted": self.asserted,
            "passed": self.passed,
            "note": self.note,
        }


@dataclass
class CheckReport:
    title: str
    checks: List[Check] = field(default_factory=list)

    def add(self, *args, **kwargs) -> Check:
        check = Check(*args, **kwargs)
        self.checks.append(check)
        return check

    def extend(self, other: "CheckReport") -> None:
        self.checks.extend(other.checks)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks if check.asserted)

    @property
    def failures(self) -> List[Check]:
        return [check for check in self.checks if check.asserted and not check.passed]

    def rows(self) -> List[dict]:
        return [dict(report=self.title, **check.as_row()) for check in self.checks]
