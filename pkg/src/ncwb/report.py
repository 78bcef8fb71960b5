"""Report objects returned by the verification routines."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass
class Report:
    """Outcome of one verification.

    ``violations`` holds one JSON-ready dict per failed sub-check; ``passed``
    is true iff it is empty and every nested report passed. ``scope`` states
    any quantifier restriction the check is subject to.
    """

    name: str
    violations: list[dict] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)
    children: list["Report"] = field(default_factory=list)
    scope: str = ""

    @property
    def passed(self) -> bool:
        return not self.violations and all(c.passed for c in self.children)

    def __bool__(self):
        return self.passed

    def add(self, child: "Report") -> "Report":
        self.children.append(child)
        return child

    def verdicts(self) -> list[dict]:
        """Flat, machine-readable verdict list (depth-first)."""
        out = [{"check": self.name, "passed": self.passed,
                "violations": len(self.violations)}]
        for c in self.children:
            out.extend(c.verdicts())
        return out

    def to_dict(self) -> dict:
        d = {"name": self.name, "passed": self.passed, "verdicts": self.verdicts(),
             "violations": self.violations, "details": self.details}
        if self.scope:
            d["scope"] = self.scope
        if self.children:
            d["children"] = [c.to_dict() for c in self.children]
        return jsonable(d)

    def summary(self, indent=0) -> str:
        mark = "PASS" if self.passed else "FAIL"
        lines = [f"{'  ' * indent}[{mark}] {self.name}"]
        for v in self.violations[:10]:
            lines.append(f"{'  ' * indent}    - {v}")
        if len(self.violations) > 10:
            lines.append(f"{'  ' * indent}    ... {len(self.violations) - 10} more")
        for c in self.children:
            lines.append(c.summary(indent + 1))
        return "\n".join(lines)


def jsonable(obj):
    """Recursively convert numpy/complex/fraction values into JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex) or isinstance(obj, np.complexfloating):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if hasattr(obj, "numerator") and hasattr(obj, "denominator") and not isinstance(obj, int):
        return float(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True)
