from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from src.app.models.domain.space_models import MetricSpace
from src.app.utils.ext_real_utils import ext_to_json


@dataclass(eq=False)
class SetValuedMapping:
    """F: X ⇉ Y given by graph oracles and a sampled graph.

    * ``contains(xs, ys)`` decides row-wise membership (x, y) ∈ gph F.
    * ``sample_values(x)`` returns a finite sample of F(x) as a (k, dy) array.
    * ``values_near(x, center, radius)`` returns points of F(x) within
      ``radius`` of ``center`` (used for sphere probing and the limit-set test).
    * ``normal_cone(x, y)`` returns generators (m, dx + dy) of the Fréchet
      normal cone to gph F at (x, y); ``None`` means no data at that point and
      an (0, dx + dy) array means the cone is {0}.
    """

    name: str
    domain_space: MetricSpace
    range_space: MetricSpace
    xbar: np.ndarray
    ybar: np.ndarray
    contains: Callable[[np.ndarray, np.ndarray], np.ndarray]
    sample_values: Callable[[np.ndarray], np.ndarray]
    domain_sample: np.ndarray
    values_near: Optional[
        Callable[[np.ndarray, np.ndarray, float], np.ndarray]
    ] = None
    normal_cone: Optional[
        Callable[[np.ndarray, np.ndarray], Optional[np.ndarray]]
    ] = None
    convex: bool = False
    closed: bool = True
    complete: bool = True

    def __post_init__(self):
        self.xbar = self.domain_space.as_points(self.xbar)[0]
        self.ybar = self.range_space.as_points(self.ybar)[0]
        self.domain_sample = self.domain_space.as_points(self.domain_sample)
        if not bool(self.contains(self.xbar[None, :], self.ybar[None, :])[0]):
            raise ValueError(f"{self.name}: base point is not on the graph")

    @property
    def dx(self) -> int:
        return self.domain_space.point_dim

    @property
    def dy(self) -> int:
        return self.range_space.point_dim

    @property
    def resolution(self) -> float:
        return max(self.domain_space.resolution, self.range_space.resolution)

    @cached_property
    def _graph(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        xs, ys, owner = [], [], []
        for i, x in enumerate(self.domain_sample):
            vals = self.range_space.as_points(self.sample_values(x))
            if vals.size == 0:
                continue
            xs.append(np.repeat(x[None, :], vals.shape[0], axis=0))
            ys.append(vals)
            owner.append(np.full(vals.shape[0], i))
        if not xs:
            raise ValueError(f"{self.name}: sampled graph is empty")
        return np.vstack(xs), np.vstack(ys), np.concatenate(owner)

    @property
    def graph_x(self) -> np.ndarray:
        return self._graph[0]

    @property
    def graph_y(self) -> np.ndarray:
        return self._graph[1]

    @property
    def graph_owner(self) -> np.ndarray:
        """Index into ``domain_sample`` of each graph sample point."""
        return self._graph[2]

    @cached_property
    def base_index(self) -> int:
        dx = self.domain_space.distances(self.graph_x, self.xbar[None, :])[:, 0]
        dy = self.range_space.distances(self.graph_y, self.ybar[None, :])[:, 0]
        hits = np.flatnonzero((dx <= 1e-12) & (dy <= 1e-12))
        if hits.size == 0:
            raise ValueError(
                f"{self.name}: base point missing from the sampled graph"
            )
        return int(hits[0])

    @property
    def has_normal_cone(self) -> bool:
        return self.normal_cone is not None

    def describe(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "domain_space": self.domain_space.describe(),
            "range_space": self.range_space.describe(),
            "xbar": self.xbar.tolist(),
            "ybar": self.ybar.tolist(),
            "graph_sample_size": int(self.graph_x.shape[0]),
            "convex": self.convex,
            "closed": self.closed,
            "normal_cone_oracle": self.has_normal_cone,
        }


@dataclass
class CoderivativeQuery:
    """D*F(x, y)(y*) = {x* : (x*, -y*) ∈ N_gphF(x, y)} as conv(vertices) + cone(rays)."""

    point: Tuple[List[float], List[float]]
    ystar: List[float]
    vertices: np.ndarray
    rays: np.ndarray

    @property
    def empty(self) -> bool:
        return self.vertices.shape[0] == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "point": {"x": self.point[0], "y": self.point[1]},
            "ystar": self.ystar,
            "empty": self.empty,
            "vertices": self.vertices.tolist(),
            "rays": self.rays.tolist(),
        }


@dataclass
class GfrererWitness:
    level: int
    t: float
    v: List[float]
    xstar: List[float]
    score: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "level": self.level,
            "t": self.t,
            "v": self.v,
            "xstar": self.xstar,
            "score": self.score,
        }


@dataclass
class GfrererResult:
    excludes_origin: bool
    threshold: float
    level_minima: List[Tuple[float, float]]
    witnesses: List[GfrererWitness] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "excludes_origin": self.excludes_origin,
            "threshold": self.threshold,
            "level_minima": [
                {"t": t, "min_score": ext_to_json(s)}
                for t, s in self.level_minima
            ],
            "witnesses": [w.to_dict() for w in self.witnesses],
            "flags": sorted(set(self.flags)),
        }
