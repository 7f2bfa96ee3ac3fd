import math
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from src.app.models.domain.function_models import SubgradientSet
from src.app.models.domain.space_models import NormKind, vector_norm
from src.app.services.space_service import SpaceService

# relative slack for LP feasibility tolerances on ‖y*‖ < bound
STRICT_MARGIN = 1e-6


class SubgradientService:
    """Minimal dual norms over polyhedral subgradient sets conv(P) + cone(R).

    Norm constraints use the row description of the dual norm
    (``SpaceService.dual_norm_rows``) so every query is one linear program.
    """

    def __init__(self, space_service: Optional[SpaceService] = None):
        self.space_service = space_service or SpaceService()

    def min_dual_norm(self, sub: SubgradientSet, primal: NormKind) -> float:
        """inf ‖x*‖_* over the set (+∞ for the empty set)."""
        if sub.is_empty:
            return math.inf
        primal = NormKind(primal)
        if sub.rays.shape[0] == 0:
            if sub.points.shape[0] == 1:
                return float(vector_norm(sub.points[0], primal.dual))
            if sub.dim == 1:
                lo, hi = float(sub.points.min()), float(sub.points.max())
                return 0.0 if lo <= 0.0 <= hi else min(abs(lo), abs(hi))
            if primal == NormKind.L2 and sub.points.shape[0] == 2:
                return self._segment_min_norm(sub.points[0], sub.points[1])
        return self._solve(sub, sub.dim, primal, None, None, None)

    def min_x_norm_with_y_bound(
        self,
        sub: SubgradientSet,
        x_dim: int,
        x_norm: NormKind,
        y_norm: NormKind,
        y_bound: float,
    ) -> float:
        """
        inf ‖x*‖ over (x*, y*) in the set with ‖y*‖ < y_bound (+∞ when no
        element meets the strict bound).

        The set is convex, so once some element satisfies the strict bound the
        infimum equals the minimum under the closed bound.
        """
        if sub.is_empty:
            return math.inf
        limit = y_bound * (1 - STRICT_MARGIN)
        if sub.rays.shape[0] == 0 and sub.points.shape[0] == 1:
            p = sub.points[0]
            if vector_norm(p[x_dim:], NormKind(y_norm).dual) < limit:
                return float(vector_norm(p[:x_dim], NormKind(x_norm).dual))
            return math.inf
        nearest = self._solve(sub, x_dim, x_norm, y_norm, None, None, y_only=True)
        if not nearest < limit:
            return math.inf
        return self._solve(sub, x_dim, x_norm, y_norm, y_bound, None)

    def min_rho_norm(
        self,
        sub: SubgradientSet,
        x_dim: int,
        x_norm: NormKind,
        y_norm: NormKind,
        rho: float,
    ) -> float:
        """inf ‖x*‖ + rho⁻¹‖y*‖ over the set."""
        if not rho > 0:
            raise ValueError(f"rho must be positive, got {rho}")
        if sub.is_empty:
            return math.inf
        if sub.rays.shape[0] == 0 and sub.points.shape[0] == 1:
            p = sub.points[0]
            return self.space_service.dual_rho_norm(
                p[:x_dim], p[x_dim:], rho, x_norm, y_norm
            )
        return self._solve(sub, x_dim, x_norm, y_norm, None, rho)

    @staticmethod
    def _segment_min_norm(a: np.ndarray, b: np.ndarray) -> float:
        d = b - a
        denom = float(d @ d)
        t = 0.0 if denom == 0.0 else float(np.clip(-(a @ d) / denom, 0.0, 1.0))
        return float(np.linalg.norm(a + t * d))

    def _solve(
        self,
        sub: SubgradientSet,
        x_dim: int,
        x_norm: NormKind,
        y_norm: Optional[NormKind],
        y_bound: Optional[float],
        rho: Optional[float],
        y_only: bool = False,
    ) -> float:
        P, R = sub.points, sub.rays
        m, r = P.shape[0], R.shape[0]
        y_dim = sub.dim - x_dim
        rows_x = self.space_service.dual_norm_rows(NormKind(x_norm), x_dim)
        has_y = y_dim > 0 and y_norm is not None
        rows_y = (
            self.space_service.dual_norm_rows(NormKind(y_norm), y_dim)
            if has_y
            else np.zeros((0, max(y_dim, 1)))
        )

        # variables: lam (m), mu (r), s, t
        n_var = m + r + 2
        blocks = []
        bx = np.hstack(
            [
                rows_x @ P[:, :x_dim].T,
                rows_x @ R[:, :x_dim].T if r else np.zeros((rows_x.shape[0], 0)),
                -np.ones((rows_x.shape[0], 1)),
                np.zeros((rows_x.shape[0], 1)),
            ]
        )
        blocks.append(bx)
        if has_y:
            by = np.hstack(
                [
                    rows_y @ P[:, x_dim:].T,
                    rows_y @ R[:, x_dim:].T
                    if r
                    else np.zeros((rows_y.shape[0], 0)),
                    np.zeros((rows_y.shape[0], 1)),
                    -np.ones((rows_y.shape[0], 1)),
                ]
            )
            blocks.append(by)
        A_ub = np.vstack(blocks)
        b_ub = np.zeros(A_ub.shape[0])
        A_eq = np.zeros((1, n_var))
        A_eq[0, :m] = 1.0

        c = np.zeros(n_var)
        c[m + r] = 0.0 if y_only else 1.0
        t_bounds = (0, None)
        if y_only:
            c[m + r + 1] = 1.0
        elif has_y and rho is not None:
            c[m + r + 1] = 1.0 / rho
        elif has_y and y_bound is not None:
            t_bounds = (0, y_bound)
        bounds = [(0, None)] * (m + r) + [(0, None), t_bounds]

        res = linprog(
            c,
            A_ub=A_ub,
            b_ub=b_ub,
            A_eq=A_eq,
            b_eq=[1.0],
            bounds=bounds,
            method="highs",
        )
        if res.status == 2:
            return math.inf
        if res.status != 0:
            raise RuntimeError(f"subgradient LP failed: {res.message}")
        return max(float(res.fun), 0.0)
