import math
import weakref
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.app.config.settings import settings
from src.app.models.domain.function_models import TwoVarFunction
from src.app.models.domain.limit_models import (
    LimitEstimate,
    LimitKind,
    RadiusSchedule,
)
from src.app.models.domain.report_models import PointEstimate, TwoVarSlopeReport
from src.app.models.domain.space_models import Combiner, combine_distances
from src.app.services.core_numerics_service import (
    CoreNumericsService,
    probe_schedule,
)
from src.app.services.function_service import FunctionService
from src.app.services.slope_service import BandKind
from src.app.services.space_service import SpaceService
from src.app.services.subgradient_service import SubgradientService
from src.app.utils.error_handler import NotEvaluableError
from src.app.utils.ext_real_utils import ratio_array
from src.app.utils.logging_util import loggers

ER_FORMS = ("x_only", "x_and_y", "f_down")


def _band_name(band) -> str:
    return band.value if isinstance(band, BandKind) else str(band)


class TwoVarSlopeService:
    """ρ-slopes of functions on X × Y and their coupled band limits.

    In every strict band the band radius and the metric parameter shrink
    together: the slope inside the band of radius rho_k is the rho_k-slope.
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
        self._cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()

    # ------------------------------------------------------------------
    # geometry helpers

    def _store(self, g: TwoVarFunction) -> Dict:
        if g not in self._cache:
            self._cache[g] = {}
        return self._cache[g]

    def level_set_indices(self, g: TwoVarFunction) -> np.ndarray:
        """Sample rows with y = ȳ and f(x, ȳ) <= 0, i.e. the sampled S(f)."""
        return np.flatnonzero((g.dist_to_ybar == 0.0) & (g.values <= 0.0))

    def level_set_distances(self, g: TwoVarFunction) -> np.ndarray:
        store = self._store(g)
        if "dS" not in store:
            S = self.level_set_indices(g)
            if S.size == 0:
                loggers["slopes"].warning(f"{g.name}: sampled S(f) is empty")
                store["dS"] = np.full(g.size, math.inf)
            else:
                store["dS"] = g.dx_matrix[:, S].min(axis=1)
        return store["dS"]

    def _query(self, g: TwoVarFunction, x, y) -> Tuple[np.ndarray, np.ndarray, float]:
        X = g.product.left.as_points(x)
        Y = g.product.right.as_points(y)
        return X, Y, float(g.values_at(X, Y)[0])

    def _rho_distances(
        self,
        g: TwoVarFunction,
        X: np.ndarray,
        Y: np.ndarray,
        U: np.ndarray,
        V: np.ndarray,
        rho: float,
        combiner: Combiner,
    ) -> np.ndarray:
        DX = g.product.left.distances(X, U)
        DY = g.product.right.distances(Y, V)
        return combine_distances(DX, DY, rho, Combiner(combiner))

    @staticmethod
    def _check_rho(rho: float) -> None:
        if not rho > 0:
            raise ValueError(f"rho must be positive, got {rho}")

    # ------------------------------------------------------------------
    # vectorized pointwise kernels

    def nonlocal_rho_slopes_at(
        self,
        g: TwoVarFunction,
        X: np.ndarray,
        Y: np.ndarray,
        fq: np.ndarray,
        rho: float,
        combiner: Combiner = Combiner.MAX,
    ) -> np.ndarray:
        """sup over (u, v) != (x, y) of [f(x, y) - f_+(u, v)]_+ / d_rho."""
        self._check_rho(rho)
        D = self._rho_distances(g, X, Y, g.sample_x, g.sample_y, rho, combiner)
        fplus = np.maximum(g.values, 0.0)
        with np.errstate(invalid="ignore"):
            num = np.maximum(fq[:, None] - fplus[None, :], 0.0)
        finite = np.isfinite(fq)
        num[~finite] = 0.0
        valid = D > 0
        ratio = np.where(valid, num / np.where(valid, D, 1.0), 0.0)
        best = ratio.max(axis=1) if ratio.shape[1] else np.zeros(X.shape[0])

        if g.local_candidates is not None:
            for r in probe_schedule().radii():
                best = np.maximum(
                    best,
                    self._candidate_sup(g, X, Y, fq, float(r), rho, combiner, True),
                )
        best[~finite] = math.inf
        return best

    def _candidate_sup(
        self,
        g: TwoVarFunction,
        X: np.ndarray,
        Y: np.ndarray,
        fq: np.ndarray,
        r: float,
        rho: float,
        combiner: Combiner,
        positive_part: bool,
    ) -> np.ndarray:
        out = np.zeros(X.shape[0])
        for i in range(X.shape[0]):
            if not np.isfinite(fq[i]):
                continue
            U, V = g.local_candidates(X[i], Y[i], r)
            fu = g.values_at(U, V)
            if positive_part:
                fu = np.maximum(fu, 0.0)
            d = self._rho_distances(
                g, X[i : i + 1], Y[i : i + 1], U, V, rho, combiner
            )[0]
            ok = d > 0
            if ok.any():
                num = np.maximum(fq[i] - fu[ok], 0.0)
                out[i] = float((num / d[ok]).max())
        return out

    def local_rho_slopes_at(
        self,
        g: TwoVarFunction,
        X: np.ndarray,
        Y: np.ndarray,
        fq: np.ndarray,
        rho: float,
        combiner: Combiner = Combiner.MAX,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """limsup over shrinking product balls; returns (slopes, isolated mask)."""
        self._check_rho(rho)
        finite = np.isfinite(fq)
        isolated = np.zeros(X.shape[0], dtype=bool)
        if g.local_candidates is not None:
            out = self._candidate_sup(
                g, X, Y, fq, probe_schedule().finest, rho, combiner, False
            )
            out[~finite] = math.inf
            return out, isolated

        r_loc = (
            settings.SCHEDULE_RESOLUTION_FACTOR * g.resolution
            if g.resolution > 0
            else probe_schedule().finest
        )
        D = self._rho_distances(g, X, Y, g.sample_x, g.sample_y, rho, combiner)
        in_ball = (D > 0) & (D <= r_loc * (1 + 1e-9))
        with np.errstate(invalid="ignore"):
            num = np.maximum(fq[:, None] - g.values[None, :], 0.0)
        num[~finite] = 0.0
        ratio = np.where(in_ball, num / np.where(in_ball, D, 1.0), 0.0)
        out = ratio.max(axis=1) if ratio.shape[1] else np.zeros(X.shape[0])
        out[~finite] = math.inf
        isolated = ~in_ball.any(axis=1)
        return out, isolated

    def _subdiff_values(
        self,
        g: TwoVarFunction,
        X: np.ndarray,
        Y: np.ndarray,
        rho: float,
        primed: bool,
    ) -> Tuple[np.ndarray, int]:
        if not g.has_oracle:
            raise NotEvaluableError(f"{g.name} has no product subgradient oracle")
        left, right = g.product.left, g.product.right
        if not (left.is_normed and right.is_normed):
            raise NotEvaluableError("subdifferential ρ-slopes need normed X and Y")
        self._check_rho(rho)
        out = np.full(X.shape[0], math.inf)
        skipped = 0
        for i in range(X.shape[0]):
            sub = g.subgradient_oracle(X[i], Y[i])
            if sub is None:
                skipped += 1
                continue
            if primed:
                out[i] = self.subgradient_service.min_rho_norm(
                    sub, left.point_dim, left.norm_kind, right.norm_kind, rho
                )
            else:
                out[i] = self.subgradient_service.min_x_norm_with_y_bound(
                    sub, left.point_dim, left.norm_kind, right.norm_kind, rho
                )
        return out, skipped

    # ------------------------------------------------------------------
    # bands

    def band_indices(
        self, g: TwoVarFunction, rho: float, band: str = BandKind.STRICT
    ) -> np.ndarray:
        near = g.dist_to_xbar < rho
        v = g.values
        if band == BandKind.ER:
            mask = near & (v > 0)
        elif band == BandKind.RATIO:
            ratio = ratio_array(np.maximum(v, 0.0), g.dist_to_xbar)
            mask = near & (v > 0) & (ratio < rho)
        elif band == "er_xy":
            mask = near & (g.dist_to_ybar < rho) & (v > 0)
        elif band == "mapping":
            # graph points with d(y, ȳ) < rho and x outside the sampled S(f)
            dS = self.level_set_distances(g)
            mask = near & (g.dist_to_ybar < rho) & (dS > 0)
        elif self.band_mode == "two_sided":
            mask = near & (v != 0) & (np.abs(v) < rho)
        else:
            mask = near & (v > 0) & (v < rho)
        return np.flatnonzero(mask)

    def band_values(
        self,
        g: TwoVarFunction,
        name: str,
        rho: float,
        band: str = BandKind.STRICT,
        combiner: Combiner = Combiner.MAX,
    ) -> np.ndarray:
        """Per-point quantity ``name`` at metric parameter rho over the band of radius rho.

        Names: nonlocal, local, ratio, er_ratio, subdiff, subdiff_primed.
        """
        store = self._store(g)
        key = (name, float(rho), _band_name(band), Combiner(combiner).value)
        if key in store:
            return store[key]
        idx = self.band_indices(g, rho, band)
        X, Y, fq = g.sample_x[idx], g.sample_y[idx], g.values[idx]
        if name == "nonlocal":
            values = self.nonlocal_rho_slopes_at(g, X, Y, fq, rho, combiner)
        elif name == "local":
            values = self.local_rho_slopes_at(g, X, Y, fq, rho, combiner)[0]
        elif name == "ratio":
            values = ratio_array(np.abs(fq), g.dist_to_xbar[idx])
        elif name == "er_ratio":
            values = ratio_array(fq, self.level_set_distances(g)[idx])
        elif name in ("subdiff", "subdiff_primed"):
            values, skipped = self._subdiff_values(
                g, X, Y, rho, name == "subdiff_primed"
            )
            store[("skipped",) + key] = skipped
        else:
            raise KeyError(f"unknown band quantity {name!r}")
        store[key] = values
        return values

    def coupled_limit(
        self,
        g: TwoVarFunction,
        names: List[str],
        schedule: RadiusSchedule,
        band: str = BandKind.STRICT,
        combiner: Combiner = Combiner.MAX,
        tol: float = settings.DEFAULT_TOL,
        flags: Optional[List[str]] = None,
    ) -> LimitEstimate:
        """Band infima of the pointwise max of the named quantities."""

        def band_inf(rho: float) -> float:
            arrays = [self.band_values(g, n, rho, band, combiner) for n in names]
            if arrays[0].size == 0:
                return math.inf
            return float(np.maximum.reduce(arrays).min())

        estimate = self.core.estimate_limit(
            band_inf, schedule, tol, LimitKind.INF, flags
        )
        if math.isinf(estimate.values[0]):
            estimate.flags.append("vacuous")
        return estimate

    # ------------------------------------------------------------------
    # limits at the base point

    def er2_modulus(
        self,
        g: TwoVarFunction,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        flags = (
            ["truncated", "empty_level_set"]
            if self.level_set_indices(g).size == 0
            else []
        )
        estimate = self.coupled_limit(
            g, ["er_ratio"], schedule, BandKind.ER, tol=tol, flags=flags
        )
        loggers["slopes"].info(f"{g.name}: Er2 reported {estimate.reported}")
        return estimate

    def er2_equivalent_forms(
        self,
        g: TwoVarFunction,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
        require_valid: bool = True,
    ) -> Dict[str, LimitEstimate]:
        """The three band constructions of Er f(x̄, ȳ).

        Raises:
            ValueError: when ``require_valid`` and (P1) or (P2) fails on the sample.
        """
        if require_valid:
            report = self.function_service.validate_P1_P2(g, schedule, tol)
            if not report.p1_ok or not report.p2_certified:
                raise ValueError(
                    f"{g.name}: (P1)/(P2) not satisfied on the sample "
                    f"(p1_ok={report.p1_ok}, p2={report.p2_lower_bound.reported})"
                )
        return {
            "x_only": self.er2_modulus(g, schedule, tol),
            "x_and_y": self.coupled_limit(g, ["er_ratio"], schedule, "er_xy", tol=tol),
            "f_down": self.coupled_limit(g, ["er_ratio"], schedule, tol=tol),
        }

    def uniform_strict_slope2(
        self,
        g: TwoVarFunction,
        schedule: RadiusSchedule,
        combiner: Combiner = Combiner.MAX,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        return self.coupled_limit(g, ["nonlocal"], schedule, combiner=combiner, tol=tol)

    def strict_outer_slope2(
        self,
        g: TwoVarFunction,
        schedule: RadiusSchedule,
        combiner: Combiner = Combiner.MAX,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        return self.coupled_limit(g, ["local"], schedule, combiner=combiner, tol=tol)

    def ratio_liminf2(
        self,
        g: TwoVarFunction,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        """liminf of f(x, y) / d(x, x̄) as x -> x̄ and f(x, y) ↓ 0."""
        return self.coupled_limit(g, ["ratio"], schedule, tol=tol)

    def strict_outer_subdiff_slope2(
        self,
        g: TwoVarFunction,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
        primed: bool = False,
    ) -> LimitEstimate:
        name = "subdiff_primed" if primed else "subdiff"
        estimate = self.coupled_limit(g, [name], schedule, tol=tol)
        store = self._store(g)
        skipped = max(
            store.get(("skipped", name, float(rho), "strict", "MAX"), 0)
            for rho in schedule.radii()
        )
        if skipped:
            estimate.flags.append(f"skipped_points={skipped}")
            loggers["slopes"].warning(
                f"{g.name}: {skipped} band points without subgradient data"
            )
        return estimate

    # ------------------------------------------------------------------
    # pointwise public operations

    def nonlocal_rho_slope(
        self,
        g: TwoVarFunction,
        x,
        y,
        rho: float,
        combiner: Combiner = Combiner.MAX,
    ) -> PointEstimate:
        X, Y, fq = self._query(g, x, y)
        if math.isinf(fq):
            raise ValueError("nonlocal ρ-slope needs f(x, y) < ∞")
        value = self.nonlocal_rho_slopes_at(g, X, Y, np.array([fq]), rho, combiner)
        return PointEstimate(float(value[0]))

    def local_rho_slope(
        self,
        g: TwoVarFunction,
        x,
        y,
        rho: float,
        combiner: Combiner = Combiner.MAX,
    ) -> PointEstimate:
        X, Y, fq = self._query(g, x, y)
        if math.isinf(fq):
            raise ValueError("ρ-slope needs f(x, y) < ∞")
        value, isolated = self.local_rho_slopes_at(
            g, X, Y, np.array([fq]), rho, combiner
        )
        return PointEstimate(float(value[0]), ["isolated"] if isolated[0] else [])

    def _subdiff_point(
        self, g: TwoVarFunction, x, y, rho: float, primed: bool
    ) -> PointEstimate:
        X, Y, fq = self._query(g, x, y)
        if math.isinf(fq):
            raise ValueError("subdifferential ρ-slope needs f(x, y) < ∞")
        values, skipped = self._subdiff_values(g, X, Y, rho, primed)
        return PointEstimate(float(values[0]), ["no_oracle_data"] if skipped else [])

    def subdiff_rho_slope(self, g: TwoVarFunction, x, y, rho: float) -> PointEstimate:
        """inf ‖x*‖ over subgradients (x*, y*) with ‖y*‖ < rho."""
        return self._subdiff_point(g, x, y, rho, primed=False)

    def subdiff_rho_slope_primed(
        self, g: TwoVarFunction, x, y, rho: float
    ) -> PointEstimate:
        """inf ‖x*‖ + rho⁻¹‖y*‖ over subgradients."""
        return self._subdiff_point(g, x, y, rho, primed=True)

    # ------------------------------------------------------------------

    def report(
        self,
        g: TwoVarFunction,
        schedule: RadiusSchedule,
        query_x=None,
        query_y=None,
        rho: Optional[float] = None,
        combiner: Combiner = Combiner.MAX,
        tol: float = settings.DEFAULT_TOL,
    ) -> TwoVarSlopeReport:
        x = g.base_x if query_x is None else query_x
        y = g.base_y if query_y is None else query_y
        rho = g.product.rho if rho is None else rho
        X, Y, _ = self._query(g, x, y)
        p1p2 = self.function_service.validate_P1_P2(g, schedule, tol)

        subdiff = primed = subdiff_limit = None
        if (
            g.has_oracle
            and g.product.left.is_normed
            and g.product.right.is_normed
        ):
            subdiff = self.subdiff_rho_slope(g, X, Y, rho)
            primed = self.subdiff_rho_slope_primed(g, X, Y, rho)
            subdiff_limit = self.strict_outer_subdiff_slope2(g, schedule, tol)

        forms = self.er2_equivalent_forms(g, schedule, tol, require_valid=False)
        return TwoVarSlopeReport(
            function=g.describe(),
            query_point={"x": X[0].tolist(), "y": Y[0].tolist()},
            rho=rho,
            nonlocal_rho_slope=self.nonlocal_rho_slope(g, X, Y, rho, combiner),
            local_rho_slope=self.local_rho_slope(g, X, Y, rho, combiner),
            subdiff_rho_slope=subdiff,
            subdiff_rho_slope_primed=primed,
            er2=forms["x_only"],
            er2_forms=forms,
            uniform_strict=self.uniform_strict_slope2(g, schedule, combiner, tol),
            uniform_strict_sum=self.uniform_strict_slope2(
                g, schedule, Combiner.SUM, tol
            ),
            strict_outer=self.strict_outer_slope2(g, schedule, combiner, tol),
            ratio_liminf=self.ratio_liminf2(g, schedule, tol),
            subdiff_strict_outer=subdiff_limit,
            p1p2=p1p2,
            schedule=schedule.to_dict(),
            metric_variant=Combiner(combiner).value,
        )
