import math
from typing import Callable, List, Optional, Sequence

import numpy as np

from src.app.config.settings import settings
from src.app.models.domain.function_models import (
    LevelSet,
    P1P2Report,
    ProbeFunction,
    SubgradientKind,
    SubgradientSet,
    TwoVarFunction,
)
from src.app.models.domain.limit_models import LimitKind, RadiusSchedule
from src.app.models.domain.report_models import LevelSetDistance
from src.app.models.domain.space_models import (
    EuclideanSpace,
    FiniteMetricSpace,
    MetricSpace,
    NormKind,
    ProductSpace,
)
from src.app.services.core_numerics_service import CoreNumericsService
from src.app.services.space_service import SpaceService
from src.app.utils.ext_real_utils import ratio_array
from src.app.utils.logging_util import loggers

_MATCH_TOL = 1e-12


def locate(space: MetricSpace, sample: np.ndarray, point) -> int:
    """Index of ``point`` in ``sample`` (exact match up to 1e-12)."""
    d = space.distances(sample, space.as_points(point))[:, 0]
    i = int(np.argmin(d))
    if d[i] > _MATCH_TOL:
        raise ValueError(f"point {np.asarray(point).tolist()} is not a sample point")
    return i


class FunctionService:
    """Probe-function construction, level sets and the (P1)/(P2) validator."""

    def __init__(
        self,
        space_service: Optional[SpaceService] = None,
        core_numerics_service: Optional[CoreNumericsService] = None,
    ):
        self.space_service = space_service or SpaceService()
        self.core = core_numerics_service or CoreNumericsService()

    # ------------------------------------------------------------------
    # positive part and level sets

    def positive_part(self, f: ProbeFunction, x) -> float:
        value = float(f.values_at(x)[0])
        return max(value, 0.0)

    def level_set(self, f: ProbeFunction) -> LevelSet:
        return LevelSet(parent=f)

    def level_set_distances(self, f: ProbeFunction) -> np.ndarray:
        """d(x_i, S(f) ∩ sample) for every sample point (+∞ if S is empty)."""
        S = self.level_set(f).sample_indices
        if S.size == 0:
            return np.full(f.size, math.inf)
        return f.distance_matrix[:, S].min(axis=1)

    def dist_to_level_set(
        self, f: ProbeFunction, x, search_radius: Optional[float] = None
    ) -> LevelSetDistance:
        """
        Distance from x to the sampled level set S(f), searched inside
        B(x, search_radius) (whole sample when no radius is given).

        The result is flagged as truncated when nothing was found and the
        search could have missed part of S(f): sample points beyond the
        radius exist, or the space is not finite.
        """
        S = self.level_set(f).sample_indices
        d_all = f.space.distances(f.space.as_points(x), f.sample_points)[0]
        within = (
            np.ones_like(d_all, dtype=bool)
            if search_radius is None
            else d_all <= search_radius
        )
        hits = S[within[S]]
        if hits.size:
            j = int(hits[np.argmin(d_all[hits])])
            return LevelSetDistance(float(d_all[j]), False, j)

        truncated = (not within.all()) or not isinstance(
            f.space, FiniteMetricSpace
        )
        flags = ["empty_level_set"] if S.size == 0 else []
        if truncated:
            flags.append("truncated")
            loggers["slopes"].warning(
                f"{f.name}: level-set search truncated at radius {search_radius}"
            )
        return LevelSetDistance(math.inf, truncated, None, flags)

    # ------------------------------------------------------------------
    # builders

    def euclidean_function(
        self,
        name: str,
        fn: Callable[[np.ndarray], np.ndarray],
        dim: int = 1,
        norm_kind: NormKind = NormKind.L2,
        spacing: float = settings.GRID_SPACING,
        half_width: float = settings.GRID_HALF_WIDTH,
        base_point: Optional[Sequence[float]] = None,
        subgradient_oracle=None,
        subgradient_kind: SubgradientKind = SubgradientKind.EXACT,
        convex: bool = False,
        lsc: bool = True,
    ) -> ProbeFunction:
        space = EuclideanSpace(dim, norm_kind, resolution=spacing)
        sample = self.space_service.grid_points(dim, spacing, half_width)
        base = np.zeros(dim) if base_point is None else base_point
        return ProbeFunction(
            name=name,
            space=space,
            evaluate=fn,
            sample_points=sample,
            base_index=locate(space, sample, base),
            subgradient_oracle=subgradient_oracle,
            subgradient_kind=subgradient_kind,
            lsc_claim=lsc,
            convex_claim=convex,
            complete_claim=True,
            probe_off_sample=True,
        )

    def finite_function(
        self,
        name: str,
        space: FiniteMetricSpace,
        values: Sequence[float],
        base_index: int = 0,
    ) -> ProbeFunction:
        table = np.asarray(values, dtype=float)
        if table.shape != (space.size,):
            raise ValueError("one value per point of the finite space is required")

        def evaluate(P: np.ndarray) -> np.ndarray:
            return table[np.asarray(P).reshape(-1).astype(int)]

        return ProbeFunction(
            name=name,
            space=space,
            evaluate=evaluate,
            sample_points=space.points(),
            base_index=base_index,
            lsc_claim=True,
            complete_claim=True,
        )

    def piecewise_linear(
        self,
        name: str,
        breakpoints: Sequence[float],
        values: Sequence[float],
        spacing: float = settings.GRID_SPACING,
        half_width: float = settings.GRID_HALF_WIDTH,
        base_point: float = 0.0,
    ) -> ProbeFunction:
        """1-D continuous piecewise-linear function with one-sided-derivative subgradients.

        Outside the breakpoint range the end pieces are extended linearly. At
        a kink the Fréchet subdifferential is [left slope, right slope] when
        the kink is convex and empty otherwise.
        """
        b = np.asarray(breakpoints, dtype=float)
        v = np.asarray(values, dtype=float)
        if b.ndim != 1 or b.size < 2 or b.shape != v.shape:
            raise ValueError("need matching breakpoints and values (>= 2)")
        if np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        slopes = np.diff(v) / np.diff(b)

        def evaluate(P: np.ndarray) -> np.ndarray:
            x = np.asarray(P, dtype=float).reshape(-1)
            out = np.interp(x, b, v)
            lo, hi = x < b[0], x > b[-1]
            out[lo] = v[0] + slopes[0] * (x[lo] - b[0])
            out[hi] = v[-1] + slopes[-1] * (x[hi] - b[-1])
            return out

        def oracle(x: np.ndarray) -> SubgradientSet:
            return self._piecewise_subgradients(float(np.ravel(x)[0]), b, slopes)

        convex = bool(np.all(np.diff(slopes) >= -1e-12))
        return self.euclidean_function(
            name,
            evaluate,
            dim=1,
            spacing=spacing,
            half_width=half_width,
            base_point=[base_point],
            subgradient_oracle=oracle,
            subgradient_kind=(
                SubgradientKind.EXACT if convex else SubgradientKind.GRADIENT_ONLY
            ),
            convex=convex,
        )

    @staticmethod
    def _piecewise_subgradients(
        x: float, b: np.ndarray, slopes: np.ndarray
    ) -> SubgradientSet:
        scale = max(1.0, float(np.max(np.abs(b))))
        hit = np.flatnonzero(np.abs(b - x) <= 1e-12 * scale)
        if hit.size:
            k = int(hit[0])
            left = slopes[k - 1] if k > 0 else slopes[0]
            right = slopes[k] if k < slopes.size else slopes[-1]
            return SubgradientSet.interval(left, right)
        k = int(np.searchsorted(b, x)) - 1
        k = min(max(k, 0), slopes.size - 1)
        return SubgradientSet.single([slopes[k]])

    def quadratic(
        self,
        name: str,
        coefficients: Sequence[float],
        spacing: float = settings.GRID_SPACING,
        half_width: float = settings.GRID_HALF_WIDTH,
        base_point: float = 0.0,
    ) -> ProbeFunction:
        """f(x) = a x^2 + b x + c on R with gradient subgradients."""
        a, bb, c = (float(t) for t in coefficients)

        def evaluate(P: np.ndarray) -> np.ndarray:
            x = np.asarray(P, dtype=float).reshape(-1)
            return a * x * x + bb * x + c

        def oracle(x: np.ndarray) -> SubgradientSet:
            # smooth, so the Fréchet subdifferential is the gradient
            t = float(np.ravel(x)[0])
            return SubgradientSet.single([2 * a * t + bb])

        return self.euclidean_function(
            name,
            evaluate,
            dim=1,
            spacing=spacing,
            half_width=half_width,
            base_point=[base_point],
            subgradient_oracle=oracle,
            subgradient_kind=(
                SubgradientKind.EXACT if a >= 0 else SubgradientKind.GRADIENT_ONLY
            ),
            convex=a >= 0,
        )

    def discretize_function(
        self,
        f: ProbeFunction,
        spacing: float,
        half_width: float = settings.GRID_HALF_WIDTH,
    ) -> ProbeFunction:
        """Restrict a Euclidean probe function to a grid FiniteMetricSpace."""
        if not isinstance(f.space, EuclideanSpace):
            raise ValueError("only Euclidean probe functions can be discretized")
        grid = self.space_service.discretize(f.space, spacing, half_width)
        values = f.values_at(grid.coords)
        g = self.finite_function(
            f"{f.name}@h={spacing:g}",
            grid,
            values,
            base_index=locate(f.space, grid.coords, f.base_point),
        )
        g.lsc_claim = f.lsc_claim
        g.convex_claim = f.convex_claim
        return g

    # ------------------------------------------------------------------
    # two-variable embedding and validation

    def embed_tilde(
        self, f: ProbeFunction, ybar: Optional[np.ndarray] = None
    ) -> TwoVarFunction:
        """f̃(x, y) = f(x) if y = ȳ, +∞ otherwise.

        Normed X gets Y = R (ȳ = 0) with subgradients (x*, 0) + cone(0, ±1);
        metric X gets a two-point Y with ȳ the first point.
        """
        if f.space.is_normed:
            Y: MetricSpace = EuclideanSpace(1, NormKind.L2)
            y0 = np.zeros(1) if ybar is None else np.asarray(ybar, float).reshape(1)
        else:
            Y = FiniteMetricSpace(
                dist=np.array([[0.0, 1.0], [1.0, 0.0]]), labels=["ybar", "y1"]
            )
            y0 = np.zeros(1)
        product = ProductSpace(f.space, Y)
        finite = np.isfinite(f.values)
        sample_x = f.sample_points[finite]
        sample_y = np.repeat(y0[None, :], sample_x.shape[0], axis=0)
        base_index = int(np.flatnonzero(finite[: f.base_index + 1]).size - 1)
        if not finite[f.base_index]:
            raise ValueError("f(x̄) must be finite")

        def evaluate(X: np.ndarray, Yp: np.ndarray) -> np.ndarray:
            on_slice = Y.distances(Yp, y0[None, :])[:, 0] == 0.0
            out = np.full(X.shape[0], math.inf)
            if on_slice.any():
                out[on_slice] = f.values_at(X[on_slice])
            return out

        oracle = None
        if f.has_oracle and f.space.is_normed:
            dx = f.space.point_dim

            def oracle(x: np.ndarray, y: np.ndarray) -> Optional[SubgradientSet]:
                if Y.distances(np.atleast_2d(y), y0[None, :])[0, 0] != 0.0:
                    return None
                sub = f.subgradient_oracle(np.asarray(x, float).reshape(-1))
                if sub is None:
                    return None
                if sub.is_empty:
                    return SubgradientSet.empty(dx + 1)
                points = np.hstack([sub.points, np.zeros((sub.points.shape[0], 1))])
                rays = [np.hstack([r, [0.0]]) for r in sub.rays]
                rays += [np.r_[np.zeros(dx), 1.0], np.r_[np.zeros(dx), -1.0]]
                return SubgradientSet(points, np.array(rays))

        candidates = None
        if f.probe_off_sample:
            dirs = self.space_service.unit_directions(
                f.space.point_dim, f.space.norm_kind
            )

            def candidates(x: np.ndarray, y: np.ndarray, r: float):
                U = np.asarray(x, float).reshape(1, -1) + r * dirs
                return U, np.repeat(y0[None, :], U.shape[0], axis=0)

        return TwoVarFunction(
            name=f"tilde({f.name})",
            product=product,
            evaluate=evaluate,
            sample_x=sample_x,
            sample_y=sample_y,
            base_index=base_index,
            subgradient_oracle=oracle,
            local_candidates=candidates,
            lsc_claim=f.lsc_claim,
            complete_claim=f.complete_claim,
            convex_claim=f.convex_claim,
        )

    def off_slice_y_candidates(self, g: TwoVarFunction) -> np.ndarray:
        Y = g.product.right
        if isinstance(Y, FiniteMetricSpace):
            return Y.points()
        ys = np.unique(g.sample_y, axis=0)
        dirs = self.space_service.unit_directions(Y.point_dim, NormKind.L2)
        extra = np.vstack([g.base_y + s * dirs for s in (0.1, 0.5)])
        return np.vstack([ys, extra])

    def validate_P1_P2(
        self,
        g: TwoVarFunction,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
        max_cross: int = 200,
    ) -> P1P2Report:
        """
        (P1) by sampling off-slice points, (P2) as the limit of band infima of
        f/d(y, ȳ) over {0 < f < rho}.
        """
        flags: List[str] = []

        off = g.dist_to_ybar > 0
        p1_ok = bool(np.all(g.values[off] > 0))
        checked = int(off.sum())

        xs = np.unique(g.sample_x, axis=0)[:max_cross]
        ys = self.off_slice_y_candidates(g)
        ys = ys[g.product.right.distances(ys, g.base_y[None, :])[:, 0] > 0]
        ys = ys[:max_cross]
        if xs.size and ys.size:
            X = np.repeat(xs, ys.shape[0], axis=0)
            Yc = np.tile(ys, (xs.shape[0], 1))
            vals = g.values_at(X, Yc)
            p1_ok = p1_ok and bool(np.all(vals > 0))
            checked += vals.size
        if checked == 0:
            flags.append("p1_sampling_exhausted")
            p1_ok = False

        ratio = ratio_array(g.values, g.dist_to_ybar)
        ratio[g.values <= 0] = math.inf

        def band(rho: float) -> float:
            mask = (g.values > 0) & (g.values < rho)
            return float(ratio[mask].min()) if mask.any() else math.inf

        p2 = self.core.estimate_limit(band, schedule, tol, LimitKind.INF)
        if not p1_ok:
            loggers["slopes"].warning(f"{g.name}: (P1) failed on samples")
        return P1P2Report(
            p1_ok=p1_ok, p1_checked=checked, p2_lower_bound=p2, flags=flags
        )

    def check_midpoint_convexity(
        self,
        f: ProbeFunction,
        rng: np.random.Generator,
        trials: int = 200,
        tol: float = 1e-9,
    ) -> bool:
        """Sampled midpoint convexity f((a+b)/2) <= (f(a)+f(b))/2."""
        if not f.space.is_normed:
            raise ValueError("midpoint convexity needs a normed space")
        idx = rng.integers(0, f.size, size=(trials, 2))
        a = f.sample_points[idx[:, 0]]
        b = f.sample_points[idx[:, 1]]
        fa, fb = f.values[idx[:, 0]], f.values[idx[:, 1]]
        finite = np.isfinite(fa) & np.isfinite(fb)
        mid = f.values_at((a[finite] + b[finite]) / 2)
        return bool(np.all(mid <= (fa[finite] + fb[finite]) / 2 + tol))

    def validate_oracle_claims(
        self, f: ProbeFunction, rng: np.random.Generator
    ) -> bool:
        """An EXACT subgradient oracle is only allowed on convex functions."""
        if not f.has_oracle or f.subgradient_kind != SubgradientKind.EXACT:
            return True
        return f.convex_claim and self.check_midpoint_convexity(f, rng)
