"""The CheckReport record shared by every verifier."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any


def _clean(x: Any) -> Any:
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item"):
        return _clean(x.item())
    return x


@dataclass
class CheckReport:
    """One verified identity or inequality.

    ``pass_`` is serialised as ``pass``. For inequalities lhs <= rhs the
    residual is max(lhs - rhs, 0) and the notes say so.
    """

    check_id: str
    params: dict = field(default_factory=dict)
    lhs: float = 0.0
    rhs: float = 0.0
    residual: float = 0.0
    tolerance: float = 0.0
    pass_: bool = False
    notes: str = ""

    @classmethod
    def equality(cls, check_id, params, lhs, rhs, tolerance, notes="", relative=False):
        lhs, rhs = float(lhs), float(rhs)
        residual = abs(lhs - rhs)
        if relative:
            residual /= max(abs(rhs), 1e-300)
            notes = (notes + "; " if notes else "") + "relative residual"
        return cls(check_id, dict(params), lhs, rhs, residual, tolerance, bool(residual <= tolerance), notes)

    @classmethod
    def inequality(cls, check_id, params, lhs, rhs, tolerance=0.0, notes=""):
        """lhs <= rhs + tolerance."""
        lhs, rhs = float(lhs), float(rhs)
        residual = max(lhs - rhs, 0.0)
        notes = (notes + "; " if notes else "") + "inequality lhs <= rhs"
        return cls(check_id, dict(params), lhs, rhs, residual, tolerance, bool(residual <= tolerance), notes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("pass_")
        order = ["check_id", "params", "lhs", "rhs", "residual", "tolerance", "pass", "notes"]
        return _clean({k: d[k] for k in order})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)
