import copy
import itertools
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.app.config.fixture_catalog import FIXTURES
from src.app.models.domain.function_models import (
    ProbeFunction,
    SubgradientSet,
    TwoVarFunction,
)
from src.app.models.domain.mapping_models import SetValuedMapping
from src.app.models.domain.space_models import (
    EuclideanSpace,
    NormKind,
    ProductSpace,
    vector_norm,
)
from src.app.services.function_service import FunctionService, locate
from src.app.services.space_service import SpaceService
from src.app.utils.logging_util import loggers

_ON_GRAPH_TOL = 1e-12


class CatalogService:
    """Shipped fixtures and the built-in formulas that spec files can name."""

    def __init__(
        self,
        space_service: Optional[SpaceService] = None,
        function_service: Optional[FunctionService] = None,
    ):
        self.space_service = space_service or SpaceService()
        self.function_service = function_service or FunctionService(
            space_service=self.space_service
        )

    # ------------------------------------------------------------------
    # fixture listing

    def names(self) -> List[str]:
        return [entry["name"] for entry in FIXTURES]

    def get(self, name: str) -> Dict[str, Any]:
        for entry in FIXTURES:
            if entry["name"] == name:
                return copy.deepcopy(entry)
        raise ValueError(
            f"unknown catalog fixture {name!r}; known: {', '.join(self.names())}"
        )

    def listing(self, pattern: Optional[str] = None) -> List[Dict[str, Any]]:
        entries = [
            {
                "name": entry["name"],
                "kind": entry["spec"]["kind"],
                "truths": entry["truths"],
                "point_truths": entry.get("point_truths", []),
                "provenance": entry["provenance"],
                "tags": entry.get("tags", []),
                "spec": entry["spec"],
            }
            for entry in copy.deepcopy(FIXTURES)
            if not pattern or pattern in entry["name"]
        ]
        loggers["main"].info(f"Catalog listing: {len(entries)} fixtures")
        return entries

    # ------------------------------------------------------------------
    # single-variable formulas

    def function_formula(
        self,
        formula: str,
        name: str,
        dim: int,
        norm_kind: NormKind,
        spacing: float,
        half_width: float,
        base_point: Optional[Sequence[float]] = None,
    ) -> ProbeFunction:
        norm_kind = NormKind(norm_kind)
        builders = {
            "abs": self._norm_function,
            "positive_part": self._positive_part,
            "dist_to_halfline": self._dist_to_halfline,
        }
        if formula not in builders:
            raise ValueError(f"unknown function formula {formula!r}")
        fn, oracle, convex = builders[formula](dim, norm_kind)
        return self.function_service.euclidean_function(
            name,
            fn,
            dim=dim,
            norm_kind=norm_kind,
            spacing=spacing,
            half_width=half_width,
            base_point=base_point,
            subgradient_oracle=oracle,
            convex=convex,
        )

    def _norm_function(self, dim: int, norm_kind: NormKind):
        def fn(P: np.ndarray) -> np.ndarray:
            return vector_norm(P, norm_kind)

        def oracle(x: np.ndarray) -> SubgradientSet:
            x = np.asarray(x, dtype=float).reshape(-1)
            if float(vector_norm(x, norm_kind)) == 0.0:
                return SubgradientSet(
                    self.space_service.dual_ball_vertices(norm_kind, dim)
                )
            return SubgradientSet(self.space_service.duality_map(x, norm_kind))

        return fn, oracle, True

    @staticmethod
    def _positive_part(dim: int, norm_kind: NormKind):
        e1 = np.zeros(dim)
        e1[0] = 1.0

        def fn(P: np.ndarray) -> np.ndarray:
            return np.maximum(P[:, 0], 0.0)

        def oracle(x: np.ndarray) -> SubgradientSet:
            t = float(np.ravel(x)[0])
            if t > 0:
                return SubgradientSet.single(e1)
            if t < 0:
                return SubgradientSet.single(np.zeros(dim))
            return SubgradientSet(np.vstack([np.zeros(dim), e1]))

        return fn, oracle, True

    @staticmethod
    def _dist_to_halfline(dim: int, norm_kind: NormKind):
        if dim != 2 or norm_kind != NormKind.L2:
            raise ValueError("dist_to_halfline lives in the Euclidean plane (dim 2, L2)")

        def fn(P: np.ndarray) -> np.ndarray:
            offset = P - np.column_stack([np.maximum(P[:, 0], 0.0), np.zeros(len(P))])
            return np.sqrt(np.sum(offset * offset, axis=1))

        def oracle(x: np.ndarray) -> SubgradientSet:
            x = np.asarray(x, dtype=float).reshape(-1)
            offset = x - np.array([max(x[0], 0.0), 0.0])
            d = math.hypot(offset[0], offset[1])
            if d > 0:
                return SubgradientSet.single(offset / d)
            # on the half-line: unit normals, plus the backward direction at the tip
            normals = [[0.0, 1.0], [0.0, -1.0]]
            if x[0] == 0.0:
                normals.append([-1.0, 0.0])
            return SubgradientSet(np.array(normals))

        return fn, oracle, True

    # ------------------------------------------------------------------
    # two-variable formulas

    def two_var_formula(
        self,
        formula: str,
        name: str,
        norm_kind: NormKind,
        spacing: float,
        half_width: float,
        rho: float = 1.0,
    ) -> TwoVarFunction:
        if formula != "sum_abs":
            raise ValueError(f"unknown two-variable formula {formula!r}")
        X = EuclideanSpace(1, norm_kind, resolution=spacing)
        Y = EuclideanSpace(1, norm_kind, resolution=spacing)
        axis = self.space_service.grid_points(1, spacing, half_width)[:, 0]
        xs, ys = np.meshgrid(axis, axis, indexing="ij")
        sample_x, sample_y = xs.reshape(-1, 1), ys.reshape(-1, 1)
        base_index = int(
            np.flatnonzero((sample_x[:, 0] == 0.0) & (sample_y[:, 0] == 0.0))[0]
        )
        steps = np.array(
            [s for s in itertools.product((-1.0, 0.0, 1.0), repeat=2) if any(s)]
        )

        def evaluate(Xq: np.ndarray, Yq: np.ndarray) -> np.ndarray:
            return np.abs(Xq[:, 0]) + np.abs(Yq[:, 0])

        def sign_interval(t: float):
            return [math.copysign(1.0, t)] if t != 0 else [-1.0, 1.0]

        def oracle(x: np.ndarray, y: np.ndarray) -> SubgradientSet:
            a = sign_interval(float(np.ravel(x)[0]))
            b = sign_interval(float(np.ravel(y)[0]))
            return SubgradientSet(np.array(list(itertools.product(a, b))))

        def candidates(x: np.ndarray, y: np.ndarray, r: float):
            U = float(np.ravel(x)[0]) + r * steps[:, :1]
            V = float(np.ravel(y)[0]) + r * steps[:, 1:]
            return U, V

        return TwoVarFunction(
            name=name,
            product=ProductSpace(X, Y, rho),
            evaluate=evaluate,
            sample_x=sample_x,
            sample_y=sample_y,
            base_index=base_index,
            subgradient_oracle=oracle,
            local_candidates=candidates,
            lsc_claim=True,
            complete_claim=True,
            convex_claim=True,
        )

    # ------------------------------------------------------------------
    # mapping formulas

    def mapping_formula(
        self,
        formula: str,
        name: str,
        dim: int,
        norm_kind: NormKind,
        spacing: float,
        half_width: float,
        xbar: Optional[Sequence[float]] = None,
        ybar: Optional[Sequence[float]] = None,
    ) -> SetValuedMapping:
        builders = {
            "identity": self._identity_mapping,
            "halfline": self._halfline_mapping,
            "parabola": self._parabola_mapping,
            "diagonal": self._diagonal_mapping,
        }
        if formula not in builders:
            raise ValueError(f"unknown mapping formula {formula!r}")
        X = EuclideanSpace(dim, norm_kind, resolution=spacing)
        domain_sample = self.space_service.grid_points(dim, spacing, half_width)
        fields = builders[formula](X, spacing, half_width)
        Y = fields.pop("range_space")
        xbar = np.zeros(dim) if xbar is None else np.asarray(xbar, dtype=float)
        ybar = np.zeros(Y.point_dim) if ybar is None else np.asarray(ybar, dtype=float)
        # the base point must sit on the grid so it is part of the sampled graph
        locate(X, domain_sample, xbar)
        return SetValuedMapping(
            name=name,
            domain_space=X,
            range_space=Y,
            xbar=xbar,
            ybar=ybar,
            domain_sample=domain_sample,
            **fields,
        )

    @staticmethod
    def _identity_mapping(X: EuclideanSpace, spacing: float, half_width: float):
        dim = X.dim

        def contains(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
            return X.norm(xs - ys) <= _ON_GRAPH_TOL

        def sample_values(x: np.ndarray) -> np.ndarray:
            return np.asarray(x, dtype=float).reshape(1, dim)

        def values_near(x: np.ndarray, center: np.ndarray, radius: float):
            x = np.asarray(x, dtype=float).reshape(1, dim)
            if float(X.norm(x[0] - np.ravel(center))) <= radius:
                return x
            return np.zeros((0, dim))

        generators = np.vstack(
            [
                np.hstack([np.eye(dim), -np.eye(dim)]),
                np.hstack([-np.eye(dim), np.eye(dim)]),
            ]
        )

        def normal_cone(x: np.ndarray, y: np.ndarray) -> np.ndarray:
            return generators

        return {
            "range_space": EuclideanSpace(dim, X.norm_kind, resolution=spacing),
            "contains": contains,
            "sample_values": sample_values,
            "values_near": values_near,
            "normal_cone": normal_cone,
            "convex": True,
            "closed": True,
        }

    def _halfline_mapping(self, X: EuclideanSpace, spacing: float, half_width: float):
        if X.dim != 1:
            raise ValueError("the halfline mapping acts on the real line")
        axis = self.space_service.grid_points(1, spacing, half_width)[:, 0]

        def contains(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
            return ys[:, 0] >= xs[:, 0] - _ON_GRAPH_TOL

        def sample_values(x: np.ndarray) -> np.ndarray:
            t = float(np.ravel(x)[0])
            return axis[axis >= t - _ON_GRAPH_TOL].reshape(-1, 1)

        def values_near(x: np.ndarray, center: np.ndarray, radius: float):
            t, c = float(np.ravel(x)[0]), float(np.ravel(center)[0])
            lo, hi = max(t, c - radius), c + radius
            if lo > hi:
                return np.zeros((0, 1))
            return np.unique([lo, min(max(c, lo), hi), hi]).reshape(-1, 1)

        def normal_cone(x: np.ndarray, y: np.ndarray) -> Optional[np.ndarray]:
            gap = float(np.ravel(y)[0]) - float(np.ravel(x)[0])
            if gap < -_ON_GRAPH_TOL:
                return None
            if gap > _ON_GRAPH_TOL:
                return np.zeros((0, 2))
            return np.array([[1.0, -1.0]])

        return {
            "range_space": EuclideanSpace(1, X.norm_kind, resolution=spacing),
            "contains": contains,
            "sample_values": sample_values,
            "values_near": values_near,
            "normal_cone": normal_cone,
            "convex": True,
            "closed": True,
        }

    @staticmethod
    def _parabola_mapping(X: EuclideanSpace, spacing: float, half_width: float):
        if X.dim != 1:
            raise ValueError("the parabola mapping acts on the real line")

        def contains(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
            return np.abs(ys[:, 0] - xs[:, 0] ** 2) <= _ON_GRAPH_TOL

        def sample_values(x: np.ndarray) -> np.ndarray:
            return np.array([[float(np.ravel(x)[0]) ** 2]])

        def values_near(x: np.ndarray, center: np.ndarray, radius: float):
            y = float(np.ravel(x)[0]) ** 2
            if abs(y - float(np.ravel(center)[0])) <= radius:
                return np.array([[y]])
            return np.zeros((0, 1))

        def normal_cone(x: np.ndarray, y: np.ndarray) -> np.ndarray:
            t = float(np.ravel(x)[0])
            return np.array([[2 * t, -1.0], [-2 * t, 1.0]])

        return {
            "range_space": EuclideanSpace(1, X.norm_kind, resolution=spacing),
            "contains": contains,
            "sample_values": sample_values,
            "values_near": values_near,
            "normal_cone": normal_cone,
            "convex": False,
            "closed": True,
        }

    @staticmethod
    def _diagonal_mapping(X: EuclideanSpace, spacing: float, half_width: float):
        if X.dim != 1:
            raise ValueError("the diagonal mapping acts on the real line")
        Y = EuclideanSpace(2, NormKind.L2, resolution=spacing)

        def contains(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
            return Y.norm(ys - np.hstack([xs, xs])) <= _ON_GRAPH_TOL

        def sample_values(x: np.ndarray) -> np.ndarray:
            t = float(np.ravel(x)[0])
            return np.array([[t, t]])

        def values_near(x: np.ndarray, center: np.ndarray, radius: float):
            t = float(np.ravel(x)[0])
            y = np.array([[t, t]])
            if float(Y.norm(y[0] - np.ravel(center))) <= radius:
                return y
            return np.zeros((0, 2))

        # the graph {(t, t, t)} is a line; its normals span (1, -1, 0), (1, 0, -1)
        generators = np.array(
            [
                [1.0, -1.0, 0.0],
                [-1.0, 1.0, 0.0],
                [1.0, 0.0, -1.0],
                [-1.0, 0.0, 1.0],
            ]
        )

        def normal_cone(x: np.ndarray, y: np.ndarray) -> np.ndarray:
            return generators

        return {
            "range_space": Y,
            "contains": contains,
            "sample_values": sample_values,
            "values_near": values_near,
            "normal_cone": normal_cone,
            "convex": True,
            "closed": True,
        }
