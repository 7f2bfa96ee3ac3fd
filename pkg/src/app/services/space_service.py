import itertools
import math
from typing import Optional

import numpy as np

from src.app.config.settings import settings
from src.app.models.domain.space_models import (
    Combiner,
    EuclideanSpace,
    FiniteMetricSpace,
    NormKind,
    ProductSpace,
    combine_distances,
    vector_norm,
)


class SpaceService:
    """Distances, dual norms and the duality mapping on probe spaces."""

    def rho_dist(
        self,
        product: ProductSpace,
        p: np.ndarray,
        q: np.ndarray,
        rho: Optional[float] = None,
        combiner: Optional[Combiner] = None,
    ) -> float:
        """d_rho (MAX) or d1_rho (SUM) between two product points."""
        rho = product.rho if rho is None else rho
        if not rho > 0:
            raise ValueError(f"rho must be positive, got {rho}")
        p = np.asarray(p, dtype=float).reshape(-1)
        q = np.asarray(q, dtype=float).reshape(-1)
        if p.size != product.point_dim or q.size != product.point_dim:
            raise ValueError(
                "points do not belong to the product space "
                f"(expected {product.point_dim} coordinates)"
            )
        space = product.with_rho(rho, combiner or product.combiner)
        return float(space.distances(p[None, :], q[None, :])[0, 0])

    @staticmethod
    def rho_combine(
        d_left: float, d_right: float, rho: float, combiner: Combiner
    ) -> float:
        if not rho > 0:
            raise ValueError(f"rho must be positive, got {rho}")
        return float(
            combine_distances(
                np.asarray(d_left), np.asarray(d_right), rho, Combiner(combiner)
            )
        )

    @staticmethod
    def dual_norm(v: np.ndarray, primal: NormKind) -> float:
        v = np.asarray(v, dtype=float).reshape(-1)
        return float(vector_norm(v, NormKind(primal).dual))

    def dual_rho_norm(
        self,
        xstar: np.ndarray,
        ystar: np.ndarray,
        rho: float,
        x_norm: NormKind = NormKind.L2,
        y_norm: NormKind = NormKind.L2,
    ) -> float:
        """‖x*‖ + rho⁻¹‖y*‖ with factor norms dual to the primal ones."""
        if not rho > 0:
            raise ValueError(f"rho must be positive, got {rho}")
        return self.dual_norm(xstar, x_norm) + self.dual_norm(ystar, y_norm) / rho

    def duality_map(self, y: np.ndarray, norm_kind: NormKind) -> np.ndarray:
        """
        Vertices of J(y) = {y* : ‖y*‖_* = 1, <y*, y> = ‖y‖}.

        L2 gives the singleton y/‖y‖; L1 and LINF give the vertices of the
        exposed face of the dual ball.

        Raises:
            ValueError: if y = 0 (∂‖·‖(0) is the whole dual ball).
        """
        y = np.asarray(y, dtype=float).reshape(-1)
        norm_kind = NormKind(norm_kind)
        norm = float(vector_norm(y, norm_kind))
        if norm == 0.0:
            raise ValueError("duality map is defined for y != 0 only")

        if norm_kind == NormKind.L2:
            return (y / norm)[None, :]

        if norm_kind == NormKind.L1:
            free = np.flatnonzero(y == 0.0)
            base = np.sign(y)
            vertices = []
            for signs in itertools.product((-1.0, 1.0), repeat=free.size):
                v = base.copy()
                v[free] = signs
                vertices.append(v)
            return np.array(vertices)

        active = np.flatnonzero(np.abs(y) >= norm * (1 - 1e-12))
        vertices = np.zeros((active.size, y.size))
        vertices[np.arange(active.size), active] = np.sign(y[active])
        return vertices

    def dual_ball_vertices(self, norm_kind: NormKind, dim: int) -> np.ndarray:
        """Extreme points of the dual unit ball (sampled sphere for L2)."""
        norm_kind = NormKind(norm_kind)
        if norm_kind == NormKind.L1:
            return np.array(list(itertools.product((-1.0, 1.0), repeat=dim)))
        if norm_kind == NormKind.LINF:
            return np.vstack([np.eye(dim), -np.eye(dim)])
        return self.unit_directions(dim, NormKind.L2)

    def dual_norm_rows(self, primal: NormKind, dim: int) -> np.ndarray:
        """Rows R with ‖z‖_* = max_r <R_r, z>.

        Exact for L1/LINF primal norms; for L2 in dim >= 2 the rows are
        sampled unit directions and the max underestimates the norm by at most
        1 - cos(pi / L2_DUAL_DIRECTIONS) in the plane.
        """
        primal = NormKind(primal)
        if primal == NormKind.L1:
            return np.vstack([np.eye(dim), -np.eye(dim)])
        if primal == NormKind.LINF:
            return np.array(list(itertools.product((-1.0, 1.0), repeat=dim)))
        if dim == 1:
            return np.array([[1.0], [-1.0]])
        return self.unit_directions(
            dim, NormKind.L2, count=settings.L2_DUAL_DIRECTIONS
        )

    def unit_directions(
        self, dim: int, norm_kind: NormKind, count: Optional[int] = None
    ) -> np.ndarray:
        """Deterministic directions on the primal unit sphere."""
        if dim == 1:
            dirs = np.array([[1.0], [-1.0]])
        elif dim == 2:
            n = count or settings.PROBE_DIRECTIONS_2D
            angles = 2 * math.pi * np.arange(n) / n
            dirs = np.column_stack([np.cos(angles), np.sin(angles)])
        elif dim == 3:
            n = count or settings.PROBE_DIRECTIONS_3D
            # Fibonacci lattice on the sphere
            k = np.arange(n) + 0.5
            phi = np.arccos(1 - 2 * k / n)
            theta = math.pi * (1 + 5**0.5) * k
            dirs = np.column_stack(
                [
                    np.cos(theta) * np.sin(phi),
                    np.sin(theta) * np.sin(phi),
                    np.cos(phi),
                ]
            )
        else:
            raise ValueError(f"unit directions need dim 1..3, got {dim}")
        norms = vector_norm(dirs, NormKind(norm_kind))
        return dirs / norms[:, None]

    @staticmethod
    def grid_points(
        dim: int,
        spacing: float = settings.GRID_SPACING,
        half_width: float = settings.GRID_HALF_WIDTH,
        center: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """Uniform grid k*spacing, |k| <= half_width/spacing, in each axis.

        Coordinates are integer multiples of ``spacing`` so that the base
        point and every hand-derived grid value are hit exactly.
        """
        if not spacing > 0:
            raise ValueError(f"grid spacing must be positive, got {spacing}")
        k_max = int(round(half_width / spacing))
        axis = np.arange(-k_max, k_max + 1) * spacing
        mesh = np.meshgrid(*([axis] * dim), indexing="ij")
        points = np.column_stack([m.reshape(-1) for m in mesh])
        if center is not None:
            points = points + np.asarray(center, dtype=float).reshape(1, -1)
        return points

    def discretize(
        self,
        space: EuclideanSpace,
        spacing: float = settings.GRID_SPACING,
        half_width: float = settings.GRID_HALF_WIDTH,
        center: Optional[np.ndarray] = None,
    ) -> FiniteMetricSpace:
        """Grid of ``space`` as a FiniteMetricSpace (coords kept, resolution = spacing)."""
        coords = self.grid_points(space.dim, spacing, half_width, center)
        if coords.shape[0] > settings.FINITE_SPACE_MAX_POINTS:
            raise ValueError(
                f"grid has {coords.shape[0]} points, above the finite-space "
                f"cap {settings.FINITE_SPACE_MAX_POINTS}"
            )
        dist = space.distances(coords, coords)
        labels = [",".join(f"{c:g}" for c in row) for row in coords]
        return FiniteMetricSpace(
            dist=dist, labels=labels, resolution=spacing, coords=coords
        )

    def validate_norm_axioms(
        self,
        space: EuclideanSpace,
        rng: np.random.Generator,
        trials: int = 200,
        tol: float = 1e-9,
    ) -> bool:
        """Check positivity, homogeneity and the triangle inequality on random triples."""
        a = rng.normal(size=(trials, space.dim))
        b = rng.normal(size=(trials, space.dim))
        lam = rng.normal(size=trials)
        na, nb = space.norm(a), space.norm(b)
        if np.any(na <= 0) or space.norm(np.zeros((1, space.dim)))[0] != 0:
            return False
        scaled = space.norm(lam[:, None] * a)
        if np.any(np.abs(scaled - np.abs(lam) * na) > tol * (1 + na)):
            return False
        return bool(np.all(space.norm(a + b) <= na + nb + tol))

    def finite_space_from_points(
        self, space: EuclideanSpace, coords: np.ndarray, resolution: float = 0.0
    ) -> FiniteMetricSpace:
        coords = np.asarray(coords, dtype=float).reshape(-1, space.dim)
        return FiniteMetricSpace(
            dist=space.distances(coords, coords),
            labels=[",".join(f"{c:g}" for c in row) for row in coords],
            resolution=resolution,
            coords=coords,
        )
