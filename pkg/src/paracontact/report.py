"""Named residuals with tolerances: the observable output of every check."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .tensors import values

__all__ = ["Case", "ResidualReport", "normalized_residual"]


def normalized_residual(lhs, rhs=0.0, terms=()) -> float:
    """``max|lhs - rhs| / max(1, max|term|)`` at the base point.

    ``lhs`` and ``rhs`` always count among the terms.
    """
    a = values(lhs)
    b = values(rhs)
    diff = np.abs(a - b)
    if diff.size == 0:
        return 0.0
    scale = 1.0
    for t in (a, b, *(values(t) for t in terms)):
        if t.size:
            scale = max(scale, float(np.max(np.abs(t))))
    return float(np.max(diff)) / scale


@dataclass
class Case:
    name: str
    residual: float
    tolerance: float
    point: list | None = None
    index: int = 0
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and math.isfinite(self.residual) and self.residual <= self.tolerance

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "point": self.point,
            "residual": self.residual if math.isfinite(self.residual) else None,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.error is not None:
            d["error"] = self.error
        return d


@dataclass
class ResidualReport:
    suite: str = ""
    cases: list = field(default_factory=list)

    def add(self, name, residual, tolerance, point=None, index=0, error=None) -> Case:
        if point is not None:
            point = [float(x) for x in np.ravel(point)]
        case = Case(name, float(residual), float(tolerance), point, index, error)
        self.cases.append(case)
        return case

    def extend(self, other: "ResidualReport", prefix: str = "", point=None, index=None):
        for c in other.cases:
            self.cases.append(
                Case(
                    prefix + c.name,
                    c.residual,
                    c.tolerance,
                    c.point if point is None else [float(x) for x in np.ravel(point)],
                    c.index if index is None else index,
                    c.error,
                )
            )
        return self

    def __getitem__(self, name) -> Case:
        for c in self.cases:
            if c.name == name:
                return c
        raise KeyError(name)

    def residuals(self) -> dict:
        return {c.name: c.residual for c in self.cases}

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def failures(self):
        return [c for c in self.cases if not c.passed]

    @property
    def max_residual(self) -> float:
        finite = [c.residual for c in self.cases if math.isfinite(c.residual)]
        return max(finite) if finite else 0.0

    def summary(self) -> dict:
        return {
            "total": len(self.cases),
            "passed": sum(c.passed for c in self.cases),
            "max_residual": self.max_residual,
        }

    def to_dict(self) -> dict:
        ordered = sorted(self.cases, key=lambda c: (c.name, c.index))
        return {
            "suite": self.suite,
            "cases": [c.to_dict() for c in ordered],
            "summary": self.summary(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)
