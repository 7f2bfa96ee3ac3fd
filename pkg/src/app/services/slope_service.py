import math
import weakref
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.app.config.settings import settings
from src.app.models.domain.function_models import ProbeFunction
from src.app.models.domain.limit_models import (
    LimitEstimate,
    LimitKind,
    RadiusSchedule,
)
from src.app.models.domain.report_models import PointEstimate, SlopeReport
from src.app.services.core_numerics_service import (
    CoreNumericsService,
    probe_schedule,
)
from src.app.services.function_service import FunctionService
from src.app.services.space_service import SpaceService
from src.app.services.subgradient_service import SubgradientService
from src.app.utils.error_handler import NotEvaluableError
from src.app.utils.ext_real_utils import ratio_array
from src.app.utils.logging_util import loggers


class RestrictedRegion(str, Enum):
    SUBLEVEL_DIST = "SUBLEVEL_DIST"  # D(x) = {u : d(u, S) <= d(x, S)}
    LEVEL_SET = "LEVEL_SET"  # D(x) = S(f)


class BandKind(str, Enum):
    ER = "er"  # d(x, x̄) < rho, f(x) > 0
    STRICT = "strict"  # d(x, x̄) < rho, 0 < f(x) - f(x̄) < rho
    RATIO = "ratio"  # d(x, x̄) < rho, 0 < f(x) / d(x, x̄) < rho


class SlopeService:
    """Single-variable slopes, the error bound modulus and their band limits.

    Pointwise quantities are computed for every sample point once per
    function and cached; band limits take minima of those arrays over
    the nested bands of a radius schedule.
    """

    def __init__(
        self,
        core_numerics_service: Optional[CoreNumericsService] = None,
        space_service: Optional[SpaceService] = None,
        function_service: Optional[FunctionService] = None,
        subgradient_service: Optional[SubgradientService] = None,
        band_mode: Optional[str] = None,
    ):
        self.core = core_numerics_service or CoreNumericsService()
        self.space_service = space_service or SpaceService()
        self.function_service = function_service or FunctionService(
            self.space_service, self.core
        )
        self.subgradient_service = subgradient_service or SubgradientService(
            self.space_service
        )
        self.band_mode = band_mode or settings.BAND_MODE
        if self.band_mode not in ("one_sided", "two_sided"):
            raise ValueError(f"unknown band mode {self.band_mode!r}")
        self._cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()

    # ------------------------------------------------------------------
    # vectorized pointwise kernels on arbitrary query points

    def _local_radius(self, f: ProbeFunction) -> float:
        if f.resolution > 0:
            return settings.SCHEDULE_RESOLUTION_FACTOR * f.resolution
        return probe_schedule().finest

    def local_slopes_at(
        self,
        f: ProbeFunction,
        Q: np.ndarray,
        fq: np.ndarray,
        radius: Optional[float] = None,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Sup of [f(x) - f(u)]_+ / d(u, x) over the punctured ball of ``radius``
        around each query point, and the mask of points with no neighbour in it.

        Without ``radius`` the finest probe radius is used off the sample and
        ``SCHEDULE_RESOLUTION_FACTOR`` grid spacings on it.
        """
        Q = f.space.as_points(Q)
        out = np.zeros(Q.shape[0])
        isolated = np.zeros(Q.shape[0], dtype=bool)
        finite = np.isfinite(fq)
        out[~finite] = math.inf

        if f.probe_off_sample:
            dirs = self.space_service.unit_directions(
                f.space.point_dim, f.space.norm_kind
            )
            r = probe_schedule().finest if radius is None else radius
            U = (Q[:, None, :] + r * dirs[None, :, :]).reshape(-1, Q.shape[1])
            fu = f.values_at(U).reshape(Q.shape[0], dirs.shape[0])
            with np.errstate(invalid="ignore"):
                num = np.maximum(fq[:, None] - fu, 0.0)
            num[~finite] = 0.0
            out[finite] = num[finite].max(axis=1) / r
            return out, isolated

        r_loc = self._local_radius(f) if radius is None else radius
        D = f.space.distances(Q, f.sample_points)
        in_ball = (D > 0) & (D <= r_loc * (1 + 1e-9))
        with np.errstate(invalid="ignore"):
            num = np.maximum(fq[:, None] - f.values[None, :], 0.0)
        num[~finite] = 0.0
        ratio = np.where(in_ball, num / np.where(in_ball, D, 1.0), 0.0)
        out[finite] = ratio[finite].max(axis=1) if ratio.shape[1] else 0.0
        isolated = ~in_ball.any(axis=1)
        return out, isolated

    def nonlocal_slopes_at(
        self,
        f: ProbeFunction,
        Q: np.ndarray,
        fq: np.ndarray,
        search_radius: Optional[float] = None,
        probe: Optional[RadiusSchedule] = None,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Nonlocal slopes sup_u [f(x) - f_+(u)]_+ / d(u, x) and an expanded-search mask."""
        Q = f.space.as_points(Q)
        D = f.space.distances(Q, f.sample_points)
        fplus = np.maximum(f.values, 0.0)
        finite = np.isfinite(fq)
        with np.errstate(invalid="ignore"):
            num = np.maximum(fq[:, None] - fplus[None, :], 0.0)
        num[~finite] = 0.0
        valid = D > 0
        ratio = np.where(valid, num / np.where(valid, D, 1.0), 0.0)

        expanded = np.zeros(Q.shape[0], dtype=bool)
        if search_radius is None:
            best = ratio.max(axis=1) if ratio.shape[1] else np.zeros(Q.shape[0])
        else:
            best = np.zeros(Q.shape[0])
            d_max = D.max(axis=1) if D.shape[1] else np.zeros(Q.shape[0])
            for i in range(Q.shape[0]):
                R = float(search_radius)
                while True:
                    inside = D[i] <= R
                    best[i] = ratio[i, inside].max() if inside.any() else 0.0
                    # far points cannot beat f(x)/R since f_+ >= 0
                    if fq[i] / R <= best[i] or R >= d_max[i]:
                        break
                    R *= 2.0
                    expanded[i] = True

        if f.probe_off_sample:
            probe = probe or probe_schedule()
            dirs = self.space_service.unit_directions(
                f.space.point_dim, f.space.norm_kind
            )
            for r in probe.radii():
                U = (Q[:, None, :] + r * dirs[None, :, :]).reshape(-1, Q.shape[1])
                fu = np.maximum(
                    f.values_at(U).reshape(Q.shape[0], dirs.shape[0]), 0.0
                )
                with np.errstate(invalid="ignore"):
                    cand = np.maximum(fq[:, None] - fu, 0.0)
                cand[~finite] = 0.0
                best = np.maximum(best, cand.max(axis=1) / r)

        best[~finite] = math.inf
        return best, expanded

    # ------------------------------------------------------------------
    # cached per-sample arrays

    def _arrays(self, f: ProbeFunction) -> Dict[str, np.ndarray]:
        if f not in self._cache:
            self._cache[f] = {}
        return self._cache[f]

    def sample_array(self, f: ProbeFunction, name: str) -> np.ndarray:
        """Per-sample-point quantity: local, nonlocal, isolated, ratio,
        er_ratio, subdiff, subdiff_covered, restricted_sublevel,
        restricted_level_set."""
        cache = self._arrays(f)
        if name in cache:
            return cache[name]

        P, v = f.sample_points, f.values
        if name in ("local", "isolated"):
            loc, iso = self.local_slopes_at(f, P, v)
            cache["local"], cache["isolated"] = loc, iso
        elif name == "nonlocal":
            cache[name] = self.nonlocal_slopes_at(f, P, v)[0]
        elif name == "ratio":
            lifted = v - f.base_value
            if self.band_mode == "two_sided":
                lifted = np.abs(lifted)
            lifted = np.maximum(lifted, 0.0)
            cache[name] = ratio_array(lifted, f.distance_matrix[:, f.base_index])
        elif name in ("er_ratio", "restricted_level_set"):
            cache[name] = self._level_set_ratio(f)
        elif name in ("subdiff", "subdiff_covered"):
            sub, covered = self._subdiff_all(f)
            cache["subdiff"], cache["subdiff_covered"] = sub, covered
        elif name == "restricted_sublevel":
            cache[name] = self._restricted_sublevel_all(f)
        else:
            raise KeyError(f"unknown sample quantity {name!r}")
        return cache[name]

    def _level_set_ratio(self, f: ProbeFunction) -> np.ndarray:
        """f_+(x) / d(x, S(f)) with 0/0 = 0 and f = ∞ giving ∞."""
        dS = self.function_service.level_set_distances(f)
        fplus = np.maximum(f.values, 0.0)
        infinite = np.isinf(fplus)
        out = ratio_array(np.where(infinite, 1.0, fplus), dS)
        out[infinite] = math.inf
        return out

    def _subdiff_all(self, f: ProbeFunction) -> Tuple[np.ndarray, np.ndarray]:
        if not f.has_oracle:
            raise NotEvaluableError(f"{f.name} has no subgradient oracle")
        if not f.space.is_normed:
            raise NotEvaluableError("subdifferential slopes need a normed space")
        out = np.full(f.size, math.inf)
        covered = np.zeros(f.size, dtype=bool)
        for i, x in enumerate(f.sample_points):
            if not np.isfinite(f.values[i]):
                continue
            sub = f.subgradient_oracle(x)
            if sub is None:
                continue
            covered[i] = True
            out[i] = self.subgradient_service.min_dual_norm(
                sub, f.space.norm_kind
            )
        return out, covered

    def _restricted_sublevel_all(self, f: ProbeFunction) -> np.ndarray:
        dS = self.function_service.level_set_distances(f)
        D = f.distance_matrix
        fplus = np.maximum(f.values, 0.0)
        with np.errstate(invalid="ignore"):
            num = np.maximum(f.values[:, None] - fplus[None, :], 0.0)
        num[~np.isfinite(f.values)] = 0.0
        allowed = (dS[None, :] <= dS[:, None]) & (D > 0)
        ratio = np.where(allowed, num / np.where(allowed, D, 1.0), 0.0)
        out = ratio.max(axis=1) if ratio.shape[1] else np.zeros(f.size)
        out[~np.isfinite(f.values)] = math.inf
        return out

    # ------------------------------------------------------------------
    # bands and limits

    def band_mask(self, f: ProbeFunction, rho: float, band: BandKind) -> np.ndarray:
        d = f.distance_matrix[:, f.base_index]
        v = f.values
        if band == BandKind.ER:
            return (d < rho) & (v > 0)
        if band == BandKind.RATIO:
            ratio = self.sample_array(f, "ratio")
            return (d < rho) & (ratio > 0) & (ratio < rho)
        lifted = v - f.base_value
        if self.band_mode == "two_sided":
            return (d < rho) & (lifted != 0) & (np.abs(lifted) < rho)
        return (d < rho) & (lifted > 0) & (lifted < rho)

    def band_limit(
        self,
        f: ProbeFunction,
        values: np.ndarray,
        schedule: RadiusSchedule,
        band: BandKind = BandKind.STRICT,
        tol: float = settings.DEFAULT_TOL,
        flags: Optional[List[str]] = None,
    ) -> LimitEstimate:
        """Limit of band infima of a per-sample array (inf ∅ = +∞)."""

        def band_inf(rho: float) -> float:
            mask = self.band_mask(f, rho, band)
            return float(values[mask].min()) if mask.any() else math.inf

        estimate = self.core.estimate_limit(
            band_inf, schedule, tol, LimitKind.INF, flags
        )
        if math.isinf(estimate.values[0]):
            estimate.flags.append("vacuous")
        return estimate

    def er_modulus(
        self,
        f: ProbeFunction,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        """Er f(x̄): band infima of f(x)/d(x, S(f)) over {d(x, x̄) < rho, f(x) > 0}."""
        if f.base_value != 0.0:
            raise ValueError(f"{f.name}: Er needs f(x̄) = 0, got {f.base_value}")
        estimate = self.band_limit(
            f, self.sample_array(f, "er_ratio"), schedule, BandKind.ER, tol
        )
        loggers["slopes"].info(
            f"{f.name}: Er reported {estimate.reported} "
            f"(monotone={estimate.monotone}, saturated={estimate.saturated})"
        )
        return estimate

    def strict_outer_slope(
        self,
        f: ProbeFunction,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        return self.band_limit(f, self.sample_array(f, "local"), schedule, tol=tol)

    def uniform_strict_slope(
        self,
        f: ProbeFunction,
        schedule: RadiusSchedule,
        search_radius: Optional[float] = None,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        if search_radius is None:
            values = self.sample_array(f, "nonlocal")
        else:
            values = self.nonlocal_slopes_at(
                f, f.sample_points, f.values, search_radius
            )[0]
        return self.band_limit(f, values, schedule, tol=tol)

    def ratio_liminf(
        self,
        f: ProbeFunction,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        return self.band_limit(f, self.sample_array(f, "ratio"), schedule, tol=tol)

    def strict_outer_subdiff_slope(
        self,
        f: ProbeFunction,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        values = self.sample_array(f, "subdiff")
        covered = self.sample_array(f, "subdiff_covered")
        flags: List[str] = []
        skipped = 0
        for rho in schedule.radii():
            mask = self.band_mask(f, rho, BandKind.STRICT)
            skipped = max(skipped, int((mask & ~covered).sum()))
            if mask.any() and not (mask & covered).any():
                flags.append("coverage_warning")
        if skipped:
            flags.append(f"skipped_points={skipped}")
            loggers["slopes"].warning(
                f"{f.name}: {skipped} band points without subgradient data"
            )
        return self.band_limit(f, values, schedule, tol=tol, flags=flags)

    def restricted_uniform_strict_slope(
        self,
        f: ProbeFunction,
        schedule: RadiusSchedule,
        region: RestrictedRegion = RestrictedRegion.SUBLEVEL_DIST,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        name = (
            "restricted_level_set"
            if RestrictedRegion(region) == RestrictedRegion.LEVEL_SET
            else "restricted_sublevel"
        )
        return self.band_limit(f, self.sample_array(f, name), schedule, tol=tol)

    # ------------------------------------------------------------------
    # pointwise public operations

    def _query(self, f: ProbeFunction, x) -> Tuple[np.ndarray, float]:
        Q = f.space.as_points(x)
        return Q, float(f.values_at(Q)[0])

    def local_slope(
        self,
        f: ProbeFunction,
        x,
        probe: Optional[RadiusSchedule] = None,
        tol: float = settings.DEFAULT_TOL,
    ) -> PointEstimate:
        """
        Local slope at ``x``. With ``probe`` the sup over each punctured ball
        B_r(x) is taken for every radius of the schedule (clipped to the grid
        resolution on sampled functions) and the limit is the finest value.
        """
        Q, fx = self._query(f, x)
        if math.isinf(fx):
            return PointEstimate(math.inf, ["infinite_value"])
        if probe is None:
            value, isolated = self.local_slopes_at(f, Q, np.array([fx]))
            flags = ["isolated"] if isolated[0] else []
            return PointEstimate(float(value[0]), flags)

        if not f.probe_off_sample:
            probe = self.core.clip_schedule(probe, f.resolution)
        isolated_at: List[bool] = []

        def ball_sup(r: float) -> float:
            value, isolated = self.local_slopes_at(f, Q, np.array([fx]), radius=r)
            isolated_at.append(bool(isolated[0]))
            return float(value[0])

        estimate = self.core.estimate_limit(ball_sup, probe, tol, LimitKind.SUP)
        flags = list(estimate.flags)
        if isolated_at[-1]:
            flags.append("isolated")
        return PointEstimate(estimate.reported, flags)

    def nonlocal_slope(
        self, f: ProbeFunction, x, search_radius: Optional[float] = None
    ) -> PointEstimate:
        Q, fx = self._query(f, x)
        if math.isinf(fx):
            raise ValueError("nonlocal slope needs f(x) < ∞")
        value, expanded = self.nonlocal_slopes_at(
            f, Q, np.array([fx]), search_radius
        )
        flags = ["search_expanded"] if expanded[0] else []
        return PointEstimate(float(value[0]), flags)

    def restricted_nonlocal_slope(
        self, f: ProbeFunction, x, region: RestrictedRegion
    ) -> PointEstimate:
        Q, fx = self._query(f, x)
        if math.isinf(fx):
            raise ValueError("restricted nonlocal slope needs f(x) < ∞")
        S = self.function_service.level_set(f).sample_indices
        if S.size == 0:
            return PointEstimate(math.inf, ["truncated", "empty_level_set"])
        dist_x = self.function_service.dist_to_level_set(f, Q)
        if RestrictedRegion(region) == RestrictedRegion.LEVEL_SET:
            value = ratio_array(np.array([max(fx, 0.0)]), np.array([dist_x.value]))
            return PointEstimate(float(value[0]), list(dist_x.flags))

        dS = self.function_service.level_set_distances(f)
        D = f.space.distances(Q, f.sample_points)[0]
        allowed = (dS <= dist_x.value) & (D > 0)
        if not allowed.any():
            return PointEstimate(0.0, ["empty_region"])
        num = np.maximum(fx - np.maximum(f.values[allowed], 0.0), 0.0)
        return PointEstimate(float((num / D[allowed]).max()))

    def subdiff_slope(self, f: ProbeFunction, x) -> PointEstimate:
        if not f.has_oracle:
            raise NotEvaluableError(f"{f.name} has no subgradient oracle")
        Q, fx = self._query(f, x)
        if math.isinf(fx):
            raise ValueError("subdifferential slope needs f(x) < ∞")
        sub = f.subgradient_oracle(Q[0])
        if sub is None:
            return PointEstimate(math.inf, ["no_oracle_data"])
        value = self.subgradient_service.min_dual_norm(sub, f.space.norm_kind)
        return PointEstimate(value, ["empty_subdifferential"] if sub.is_empty else [])

    # ------------------------------------------------------------------

    def report(
        self,
        f: ProbeFunction,
        schedule: RadiusSchedule,
        query_point=None,
        tol: float = settings.DEFAULT_TOL,
    ) -> SlopeReport:
        x = f.base_point if query_point is None else query_point
        Q = f.space.as_points(x)
        subdiff = subdiff_limit = None
        if f.has_oracle and f.space.is_normed:
            subdiff = self.subdiff_slope(f, Q)
            subdiff_limit = self.strict_outer_subdiff_slope(f, schedule, tol)
        return SlopeReport(
            function=f.describe(),
            query_point=Q[0].tolist(),
            local_slope=self.local_slope(f, Q),
            nonlocal_slope=self.nonlocal_slope(f, Q),
            restricted_sublevel_slope=self.restricted_nonlocal_slope(
                f, Q, RestrictedRegion.SUBLEVEL_DIST
            ),
            restricted_level_set_slope=self.restricted_nonlocal_slope(
                f, Q, RestrictedRegion.LEVEL_SET
            ),
            subdiff_slope=subdiff,
            er_modulus=self.er_modulus(f, schedule, tol),
            strict_outer=self.strict_outer_slope(f, schedule, tol),
            uniform_strict=self.uniform_strict_slope(f, schedule, tol=tol),
            ratio_liminf=self.ratio_liminf(f, schedule, tol),
            subdiff_strict_outer=subdiff_limit,
            schedule=schedule.to_dict(),
            band_mode=self.band_mode,
        )
