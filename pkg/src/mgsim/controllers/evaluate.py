"""Episode evaluation and per-architecture cost aggregation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..core import ARCHITECTURE_GROUPS, Microgrid
from ..errors import DomainError
from .base import Controller

GROUPS = ("All",) + ARCHITECTURE_GROUPS


def evaluate_controller(controller: Controller, mg: Microgrid, phase: str = "test") -> float:
    """Run ``controller`` over ``phase`` and return the cumulative cost in $."""
    if phase not in ("test", "full", "train"):
        raise DomainError(f"unknown phase {phase!r}")
    mg.reset(phase=phase)
    controller.prepare(mg)
    while not mg.done:
        mg.run(controller.decide(mg))
    return float(mg.cumulative_cost)


@dataclass
class EvalReport:
    """Costs of one controller over a scenario set, one entry per microgrid in index order."""

    controller: str
    seed: int
    costs: list
    architectures: list
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.costs) != len(self.architectures):
            raise DomainError("one architecture per microgrid cost is required")

    def members(self, group: str) -> list:
        if group == "All":
            return list(self.costs)
        return [c for c, a in zip(self.costs, self.architectures) if a == group]

    def total(self, group: str = "All") -> float:
        return math.fsum(self.members(group))

    def count(self, group: str = "All") -> int:
        return len(self.members(group))

    def mean(self, group: str = "All") -> float:
        n = self.count(group)
        return self.total(group) / n if n else float("nan")

    def groups(self) -> list:
        return [g for g in GROUPS if self.count(g) > 0]

    def to_dict(self):
        return {
            "controller": self.controller,
            "seed": self.seed,
            "costs": list(self.costs),
            "architectures": list(self.architectures),
            **({"extras": self.extras} if self.extras else {}),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["controller"], d["seed"], list(d["costs"]), list(d["architectures"]), d.get("extras", {}))
