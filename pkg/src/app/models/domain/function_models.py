from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from src.app.models.domain.limit_models import LimitEstimate
from src.app.models.domain.space_models import MetricSpace, ProductSpace


class SubgradientKind(str, Enum):
    EXACT = "exact"
    GRADIENT_ONLY = "gradient_only"


@dataclass(eq=False)
class SubgradientSet:
    """conv(points) + cone(rays). No points means the empty set."""

    points: np.ndarray
    rays: Optional[np.ndarray] = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        dim = self.points.shape[1]
        if self.rays is None:
            self.rays = np.zeros((0, dim))
        self.rays = np.asarray(self.rays, dtype=float).reshape(-1, dim)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def is_empty(self) -> bool:
        return self.points.shape[0] == 0

    @classmethod
    def empty(cls, dim: int) -> "SubgradientSet":
        return cls(np.zeros((0, dim)))

    @classmethod
    def single(cls, v) -> "SubgradientSet":
        return cls(np.asarray(v, dtype=float).reshape(1, -1))

    @classmethod
    def interval(cls, lo: float, hi: float) -> "SubgradientSet":
        """1-D closed interval [lo, hi]; empty when lo > hi."""
        if lo > hi:
            return cls.empty(1)
        return cls(np.array([[lo], [hi]]))


@dataclass(eq=False)
class ProbeFunction:
    """Oracle f: X -> R ∪ {+∞} plus the finite sample it is analysed on.

    ``evaluate`` maps an (n, point_dim) array to n values. When
    ``probe_off_sample`` is set the oracle is valid anywhere in the space and
    local slopes are probed on shrinking spheres instead of the sample.
    """

    name: str
    space: MetricSpace
    evaluate: Callable[[np.ndarray], np.ndarray]
    sample_points: np.ndarray
    base_index: int = 0
    subgradient_oracle: Optional[
        Callable[[np.ndarray], Optional[SubgradientSet]]
    ] = None
    subgradient_kind: SubgradientKind = SubgradientKind.EXACT
    lsc_claim: bool = True
    convex_claim: bool = False
    complete_claim: bool = True
    probe_off_sample: bool = False

    def __post_init__(self):
        self.sample_points = self.space.as_points(self.sample_points)
        if not 0 <= self.base_index < self.sample_points.shape[0]:
            raise ValueError("base_index outside the sample")

    @property
    def resolution(self) -> float:
        return self.space.resolution

    @property
    def size(self) -> int:
        return self.sample_points.shape[0]

    def values_at(self, P: np.ndarray) -> np.ndarray:
        vals = np.asarray(
            self.evaluate(self.space.as_points(P)), dtype=float
        ).reshape(-1)
        if np.any(np.isnan(vals)) or np.any(vals == -np.inf):
            raise ValueError(f"{self.name}: oracle returned NaN or -inf")
        return vals

    @cached_property
    def values(self) -> np.ndarray:
        return self.values_at(self.sample_points)

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        return self.space.distances(self.sample_points, self.sample_points)

    @property
    def base_point(self) -> np.ndarray:
        return self.sample_points[self.base_index]

    @property
    def base_value(self) -> float:
        return float(self.values[self.base_index])

    @property
    def has_oracle(self) -> bool:
        return self.subgradient_oracle is not None

    def describe(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "space": self.space.describe(),
            "sample_size": self.size,
            "base_point": self.base_point.tolist(),
            "lsc_claim": self.lsc_claim,
            "convex_claim": self.convex_claim,
            "complete_claim": self.complete_claim,
            "subgradient_oracle": (
                self.subgradient_kind.value if self.has_oracle else None
            ),
        }


@dataclass(eq=False)
class LevelSet:
    """S(f) = {x : f(x) <= 0}."""

    parent: ProbeFunction

    def contains(self, P: np.ndarray) -> np.ndarray:
        return self.parent.values_at(P) <= 0.0

    @cached_property
    def sample_indices(self) -> np.ndarray:
        return np.flatnonzero(self.parent.values <= 0.0)

    @property
    def is_empty(self) -> bool:
        return self.sample_indices.size == 0


@dataclass(eq=False)
class TwoVarFunction:
    """Oracle f: X × Y -> R ∪ {+∞} with base point f(x̄, ȳ) = 0.

    The sample holds only finite-valued pairs (sample_x[i], sample_y[i]);
    off-domain pairs never enter a band and contribute nothing to slope
    numerators. ``local_candidates(x, y, r)`` returns finite-valued pairs at
    product distance about r from (x, y) for sphere probing.
    """

    name: str
    product: ProductSpace
    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    sample_x: np.ndarray
    sample_y: np.ndarray
    base_index: int = 0
    subgradient_oracle: Optional[
        Callable[[np.ndarray, np.ndarray], Optional[SubgradientSet]]
    ] = None
    local_candidates: Optional[
        Callable[[np.ndarray, np.ndarray, float], Tuple[np.ndarray, np.ndarray]]
    ] = None
    lsc_claim: bool = True
    complete_claim: bool = True
    convex_claim: bool = False

    def __post_init__(self):
        self.sample_x = self.product.left.as_points(self.sample_x)
        self.sample_y = self.product.right.as_points(self.sample_y)
        if self.sample_x.shape[0] != self.sample_y.shape[0]:
            raise ValueError("sample_x and sample_y must pair up row by row")
        if not 0 <= self.base_index < self.sample_x.shape[0]:
            raise ValueError("base_index outside the sample")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"{self.name}: sample must be finite-valued")
        if abs(self.base_value) > 1e-12:
            raise ValueError(
                f"{self.name}: f(x̄, ȳ) must be 0, got {self.base_value}"
            )

    @property
    def size(self) -> int:
        return self.sample_x.shape[0]

    @property
    def resolution(self) -> float:
        return self.product.resolution

    def values_at(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        vals = np.asarray(
            self.evaluate(
                self.product.left.as_points(X), self.product.right.as_points(Y)
            ),
            dtype=float,
        ).reshape(-1)
        if np.any(np.isnan(vals)) or np.any(vals == -np.inf):
            raise ValueError(f"{self.name}: oracle returned NaN or -inf")
        return vals

    @cached_property
    def values(self) -> np.ndarray:
        return self.values_at(self.sample_x, self.sample_y)

    @cached_property
    def dx_matrix(self) -> np.ndarray:
        return self.product.left.distances(self.sample_x, self.sample_x)

    @cached_property
    def dy_matrix(self) -> np.ndarray:
        return self.product.right.distances(self.sample_y, self.sample_y)

    @property
    def base_x(self) -> np.ndarray:
        return self.sample_x[self.base_index]

    @property
    def base_y(self) -> np.ndarray:
        return self.sample_y[self.base_index]

    @property
    def base_value(self) -> float:
        return float(self.values[self.base_index])

    @cached_property
    def dist_to_xbar(self) -> np.ndarray:
        return self.dx_matrix[:, self.base_index]

    @cached_property
    def dist_to_ybar(self) -> np.ndarray:
        return self.dy_matrix[:, self.base_index]

    @property
    def has_oracle(self) -> bool:
        return self.subgradient_oracle is not None

    def describe(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "product": self.product.describe(),
            "sample_size": self.size,
            "base_x": self.base_x.tolist(),
            "base_y": self.base_y.tolist(),
            "lsc_claim": self.lsc_claim,
            "complete_claim": self.complete_claim,
            "subgradient_oracle": self.has_oracle,
        }


@dataclass
class P1P2Report:
    p1_ok: bool
    p1_checked: int
    p2_lower_bound: LimitEstimate
    flags: List[str] = field(default_factory=list)

    @property
    def p2_certified(self) -> bool:
        return self.p2_lower_bound.reported > 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p1_ok": self.p1_ok,
            "p1_checked": self.p1_checked,
            "p2_lower_bound": self.p2_lower_bound.to_dict(),
            "p2_certified": self.p2_certified,
            "flags": sorted(set(self.flags)),
        }
