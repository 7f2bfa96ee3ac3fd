from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from scipy.spatial.distance import cdist

from src.app.config.settings import settings


class NormKind(str, Enum):
    L2 = "L2"
    L1 = "L1"
    LINF = "LINF"

    @property
    def dual(self) -> "NormKind":
        return {
            NormKind.L2: NormKind.L2,
            NormKind.L1: NormKind.LINF,
            NormKind.LINF: NormKind.L1,
        }[self]

    @property
    def cdist_metric(self) -> str:
        return {
            NormKind.L2: "euclidean",
            NormKind.L1: "cityblock",
            NormKind.LINF: "chebyshev",
        }[self]


class Combiner(str, Enum):
    MAX = "MAX"  # d_rho = max{d_X, rho * d_Y}
    SUM = "SUM"  # d1_rho = d_X + rho * d_Y


def vector_norm(v: np.ndarray, norm_kind: NormKind) -> np.ndarray:
    """Row-wise norm of a 2-D array (or norm of a 1-D vector)."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] == 0:
        return np.zeros(v.shape[:-1])
    if norm_kind == NormKind.L2:
        return np.sqrt(np.sum(v * v, axis=-1))
    if norm_kind == NormKind.L1:
        return np.sum(np.abs(v), axis=-1)
    return np.max(np.abs(v), axis=-1)


class MetricSpace(ABC):
    """A space whose points are rows of float arrays."""

    point_dim: int
    resolution: float

    @abstractmethod
    def distances(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Pairwise distance matrix of shape (len(A), len(B))."""

    @property
    def is_normed(self) -> bool:
        return False

    @property
    def kind(self) -> str:
        return type(self).__name__

    def distance(self, p: np.ndarray, q: np.ndarray) -> float:
        return float(
            self.distances(self.as_points(p), self.as_points(q))[0, 0]
        )

    def as_points(self, P: Any) -> np.ndarray:
        arr = np.asarray(P, dtype=float)
        if arr.ndim <= 1:
            arr = arr.reshape(-1, self.point_dim)
        if arr.ndim != 2 or arr.shape[1] != self.point_dim:
            raise ValueError(
                f"points of {self.kind} have {self.point_dim} columns, "
                f"got {arr.shape[1]}"
            )
        return arr

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind}


@dataclass(eq=False)
class FiniteMetricSpace(MetricSpace):
    """Points are indices 0..n-1 into a validated distance matrix.

    ``coords`` is optional metadata (grid coordinates when the space is a
    discretization); ``resolution`` is the grid spacing or 0.
    """

    dist: np.ndarray
    labels: Optional[List[str]] = None
    resolution: float = 0.0
    coords: Optional[np.ndarray] = None
    point_dim: int = field(default=1, init=False)

    def __post_init__(self):
        self.dist = np.asarray(self.dist, dtype=float)
        n = self.dist.shape[0]
        if self.dist.ndim != 2 or self.dist.shape[1] != n or n == 0:
            raise ValueError("distance matrix must be square and non-empty")
        if n > settings.FINITE_SPACE_MAX_POINTS:
            raise ValueError(
                f"finite spaces are capped at {settings.FINITE_SPACE_MAX_POINTS}"
                f" points, got {n}"
            )
        if self.labels is None:
            self.labels = [f"p{i}" for i in range(n)]
        if len(self.labels) != n:
            raise ValueError("labels and distance matrix sizes differ")
        validate_metric_matrix(self.dist, settings.METRIC_TOL)

    @property
    def size(self) -> int:
        return self.dist.shape[0]

    def points(self) -> np.ndarray:
        return np.arange(self.size, dtype=float).reshape(-1, 1)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def distances(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        ia = np.asarray(A, dtype=float).reshape(-1).astype(int)
        ib = np.asarray(B, dtype=float).reshape(-1).astype(int)
        return self.dist[np.ix_(ia, ib)]

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "size": self.size,
            "resolution": self.resolution,
        }


def validate_metric_matrix(dist: np.ndarray, tol: float) -> None:
    """Exhaustive metric-axiom check, O(n^3) through one pass per pivot."""
    if np.any(~np.isfinite(dist)):
        raise ValueError("distances must be finite")
    if np.any(dist < -tol):
        raise ValueError("distances must be nonnegative")
    if np.any(np.abs(np.diag(dist)) > tol):
        raise ValueError("dist(i, i) must be 0")
    if np.any(np.abs(dist - dist.T) > tol):
        raise ValueError("distance matrix must be symmetric")
    off = dist + np.eye(dist.shape[0])
    if np.any(off <= tol):
        raise ValueError("distinct points must have positive distance")
    scale = max(1.0, float(dist.max()))
    for k in range(dist.shape[0]):
        through_k = dist[:, k][:, None] + dist[k, :][None, :]
        if np.any(dist > through_k + tol * scale):
            i, j = np.argwhere(dist > through_k + tol * scale)[0]
            raise ValueError(
                f"triangle inequality fails for ({i}, {k}, {j})"
            )


@dataclass(eq=False)
class EuclideanSpace(MetricSpace):
    """R^dim (dim <= 3) with the L2, L1 or LINF norm."""

    dim: int
    norm_kind: NormKind = NormKind.L2
    resolution: float = 0.0

    def __post_init__(self):
        if not 1 <= int(self.dim) <= 3:
            raise ValueError(f"Euclidean spaces have dim 1..3, got {self.dim}")
        self.norm_kind = NormKind(self.norm_kind)
        self.point_dim = int(self.dim)

    @property
    def is_normed(self) -> bool:
        return True

    def norm(self, v: np.ndarray) -> np.ndarray:
        return vector_norm(v, self.norm_kind)

    def dual_norm(self, v: np.ndarray) -> np.ndarray:
        return vector_norm(v, self.norm_kind.dual)

    def distances(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        A = np.asarray(A, dtype=float).reshape(-1, self.dim)
        B = np.asarray(B, dtype=float).reshape(-1, self.dim)
        return cdist(A, B, metric=self.norm_kind.cdist_metric)

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "norm_kind": self.norm_kind.value,
        }


@dataclass(eq=False)
class ProductSpace(MetricSpace):
    """X × Y with the rho-metric selected by ``combiner``."""

    left: MetricSpace
    right: MetricSpace
    rho: float = 1.0
    combiner: Combiner = Combiner.MAX

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        self.combiner = Combiner(self.combiner)
        self.point_dim = self.left.point_dim + self.right.point_dim
        self.resolution = max(self.left.resolution, self.right.resolution)

    @property
    def is_normed(self) -> bool:
        return self.left.is_normed and self.right.is_normed

    def with_rho(self, rho: float, combiner: Optional[Combiner] = None):
        return ProductSpace(
            self.left, self.right, rho, combiner or self.combiner
        )

    def split(self, P: np.ndarray):
        P = np.asarray(P, dtype=float).reshape(-1, self.point_dim)
        k = self.left.point_dim
        return P[:, :k], P[:, k:]

    def join(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, self.left.point_dim)
        Y = np.asarray(Y, dtype=float).reshape(-1, self.right.point_dim)
        return np.hstack([X, Y])

    def distances(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        ax, ay = self.split(A)
        bx, by = self.split(B)
        return combine_distances(
            self.left.distances(ax, bx),
            self.right.distances(ay, by),
            self.rho,
            self.combiner,
        )

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "left": self.left.describe(),
            "right": self.right.describe(),
            "rho": self.rho,
            "combiner": self.combiner.value,
        }


def combine_distances(
    dx: np.ndarray, dy: np.ndarray, rho: float, combiner: Combiner
) -> np.ndarray:
    if combiner == Combiner.MAX:
        return np.maximum(dx, rho * dy)
    return dx + rho * dy
