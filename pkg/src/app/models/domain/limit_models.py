from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Tuple

import numpy as np

from src.app.utils.ext_real_utils import ext_to_json


class LimitKind(str, Enum):
    """Direction of the band quantity as the radius shrinks."""

    INF = "inf"  # infimum over shrinking bands: nondecreasing in k
    SUP = "sup"  # supremum over shrinking balls: nonincreasing in k


@dataclass(frozen=True)
class RadiusSchedule:
    """Geometric radii rho0 * gamma**k for k = 0..steps."""

    rho0: float
    gamma: float
    steps: int

    def __post_init__(self):
        if not self.rho0 > 0:
            raise ValueError(f"rho0 must be positive, got {self.rho0}")
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(
                f"steps must be a positive integer, got {self.steps}"
            )

    def radii(self) -> np.ndarray:
        return self.rho0 * self.gamma ** np.arange(self.steps + 1)

    @property
    def finest(self) -> float:
        return float(self.rho0 * self.gamma**self.steps)

    @classmethod
    def parse(cls, text: str) -> "RadiusSchedule":
        """Parse the CLI form ``rho0,gamma,steps``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(
                f"schedule must be 'rho0,gamma,steps', got {text!r}"
            )
        return cls(float(parts[0]), float(parts[1]), int(parts[2]))

    def to_dict(self) -> Dict[str, Any]:
        return {"rho0": self.rho0, "gamma": self.gamma, "steps": self.steps}


@dataclass
class LimitEstimate:
    """Band values along a radius schedule and the reported limit."""

    per_radius: List[Tuple[float, float]]
    reported: float
    monotone: bool
    saturated: bool
    kind: LimitKind = LimitKind.INF
    flags: List[str] = field(default_factory=list)

    @property
    def values(self) -> List[float]:
        return [v for _, v in self.per_radius]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "per_radius": [
                {"rho": r, "value": ext_to_json(v)} for r, v in self.per_radius
            ],
            "reported": ext_to_json(self.reported),
            "monotone": self.monotone,
            "saturated": self.saturated,
            "kind": self.kind.value,
            "flags": sorted(set(self.flags)),
        }
