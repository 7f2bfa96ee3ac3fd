import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

from src.app.config.settings import settings
from src.app.models.domain.function_models import ProbeFunction
from src.app.models.domain.limit_models import (
    LimitEstimate,
    LimitKind,
    RadiusSchedule,
)
from src.app.models.domain.report_models import (
    BruteForceReport,
    DiscrepancyReport,
    EkelandResult,
)
from src.app.models.domain.space_models import FiniteMetricSpace
from src.app.services.core_numerics_service import (
    CoreNumericsService,
    probe_schedule,
)
from src.app.services.function_service import FunctionService
from src.app.services.slope_service import SlopeService
from src.app.utils.ext_real_utils import close_enough, ext_to_json, extreal_div
from src.app.utils.logging_util import loggers

LIMIT_QUANTITIES = ("er_modulus", "strict_outer", "uniform_strict", "ratio_liminf")


class OracleService:
    """Ground truth by exhaustive enumeration on finite metric spaces.

    Everything here loops point by point on purpose: it is the reference the
    vectorized slope kernels are compared against.
    """

    def __init__(
        self,
        core_numerics_service: Optional[CoreNumericsService] = None,
        function_service: Optional[FunctionService] = None,
        slope_service: Optional[SlopeService] = None,
        band_mode: Optional[str] = None,
    ):
        self.core = core_numerics_service or CoreNumericsService()
        self.function_service = function_service or FunctionService(
            core_numerics_service=self.core
        )
        self.slope_service = slope_service or SlopeService(
            self.core, function_service=self.function_service
        )
        self.band_mode = band_mode or self.slope_service.band_mode

    @staticmethod
    def _require_finite(f: ProbeFunction) -> FiniteMetricSpace:
        if not isinstance(f.space, FiniteMetricSpace):
            raise ValueError("brute force needs a finite metric space")
        return f.space

    # ------------------------------------------------------------------
    # pointwise enumeration

    def _local_slope(self, f: ProbeFunction, i: int):
        """Slope over the punctured ball of the grid radius (exact limit when resolution is 0)."""
        v, D = f.values, f.distance_matrix
        if math.isinf(v[i]):
            return math.inf, False
        if f.resolution > 0:
            radius = settings.SCHEDULE_RESOLUTION_FACTOR * f.resolution
        else:
            radius = probe_schedule().finest
        best, isolated = 0.0, True
        for j in range(f.size):
            if 0 < D[i, j] <= radius * (1 + 1e-9):
                isolated = False
                best = max(best, max(v[i] - v[j], 0.0) / D[i, j])
        return best, isolated

    @staticmethod
    def _nonlocal_slope(f: ProbeFunction, i: int) -> float:
        v, D = f.values, f.distance_matrix
        if math.isinf(v[i]):
            return math.inf
        best = 0.0
        for j in range(f.size):
            if D[i, j] > 0:
                best = max(best, max(v[i] - max(v[j], 0.0), 0.0) / D[i, j])
        return best

    @staticmethod
    def _level_set_distance(f: ProbeFunction, i: int) -> float:
        D = f.distance_matrix
        dists = [D[i, j] for j in range(f.size) if f.values[j] <= 0]
        return min(dists) if dists else math.inf

    def _er_ratio(self, f: ProbeFunction, i: int) -> float:
        fplus = max(f.values[i], 0.0)
        if math.isinf(fplus):
            return math.inf
        return extreal_div(fplus, self._level_set_distance(f, i))

    def _in_strict_band(self, f: ProbeFunction, i: int, rho: float) -> bool:
        d = f.distance_matrix[i, f.base_index]
        lifted = f.values[i] - f.base_value
        if d >= rho:
            return False
        if self.band_mode == "two_sided":
            return lifted != 0 and abs(lifted) < rho
        return 0 < lifted < rho

    def _ratio(self, f: ProbeFunction, i: int) -> float:
        lifted = f.values[i] - f.base_value
        if self.band_mode == "two_sided":
            lifted = abs(lifted)
        return extreal_div(max(lifted, 0.0), f.distance_matrix[i, f.base_index])

    # ------------------------------------------------------------------

    def brute_force_all(
        self,
        f: ProbeFunction,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
    ) -> BruteForceReport:
        self._require_finite(f)
        if f.base_value != 0.0:
            raise ValueError(f"{f.name}: brute force needs f(x̄) = 0")
        n = f.size
        local, isolated = {}, []
        for i in range(n):
            local[i], iso = self._local_slope(f, i)
            if iso:
                isolated.append(i)
        nonlocal_ = {i: self._nonlocal_slope(f, i) for i in range(n)}
        er = {i: self._er_ratio(f, i) for i in range(n)}
        ratio = {i: self._ratio(f, i) for i in range(n)}
        d_base = f.distance_matrix[:, f.base_index]

        def er_band(rho: float) -> float:
            vals = [er[i] for i in range(n) if d_base[i] < rho and f.values[i] > 0]
            return min(vals) if vals else math.inf

        def strict_band(table: Dict[int, float]):
            def band(rho: float) -> float:
                vals = [table[i] for i in range(n) if self._in_strict_band(f, i, rho)]
                return min(vals) if vals else math.inf

            return band

        limits = {
            "er_modulus": er_band,
            "strict_outer": strict_band(local),
            "uniform_strict": strict_band(nonlocal_),
            "ratio_liminf": strict_band(ratio),
        }
        estimates = {
            name: self._limit(band, schedule, tol) for name, band in limits.items()
        }

        # a point enters a band once rho exceeds its threshold
        er_thresholds = [float(d_base[i]) for i in range(n) if f.values[i] > 0]
        strict_thresholds = []
        for i in range(n):
            lifted = f.values[i] - f.base_value
            eligible = lifted != 0 if self.band_mode == "two_sided" else lifted > 0
            if eligible and not math.isinf(lifted):
                strict_thresholds.append(max(float(d_base[i]), abs(float(lifted))))
        step_functions, exact = {}, {}
        for name, band in limits.items():
            thresholds = er_thresholds if name == "er_modulus" else strict_thresholds
            step_functions[name], exact[name] = self._step_function(band, thresholds)
        loggers["oracle"].info(
            f"{f.name}: brute force over {n} points, exact finest-band values "
            f"{exact}"
        )
        return BruteForceReport(
            local_slope=local,
            nonlocal_slope=nonlocal_,
            isolated=isolated,
            er_modulus=estimates["er_modulus"],
            strict_outer=estimates["strict_outer"],
            uniform_strict=estimates["uniform_strict"],
            ratio_liminf=estimates["ratio_liminf"],
            er_step_function=step_functions["er_modulus"],
            er_exact=exact["er_modulus"],
            step_functions=step_functions,
            exact=exact,
        )

    @staticmethod
    def _step_function(
        band, thresholds: List[float]
    ) -> Tuple[List[Dict[str, Any]], float]:
        """Band value on (t, next t] for each sorted threshold t, and the first."""
        points = sorted(set(thresholds))
        values = [band(math.nextafter(t, math.inf)) for t in points]
        steps = [
            {"rho_above": t, "value": ext_to_json(value)}
            for t, value in zip(points, values)
        ]
        return steps, (values[0] if values else math.inf)

    def _limit(self, band, schedule: RadiusSchedule, tol: float) -> LimitEstimate:
        estimate = self.core.estimate_limit(band, schedule, tol, LimitKind.INF)
        if math.isinf(estimate.values[0]):
            estimate.flags.append("vacuous")
        return estimate

    # ------------------------------------------------------------------
    # Ekeland variational principle

    def ekeland_point(
        self, f: ProbeFunction, v: int, eps: float, lam: float
    ) -> EkelandResult:
        """
        Iterated improvement from v: move to the f-minimal point of
        {u : f(u) + (eps/lam) d(u, x) <= f(x)} until x is the only member.
        The three conclusions are checked by enumeration before returning.
        """
        self._require_finite(f)
        if not (eps > 0 and lam > 0):
            raise ValueError("eps and lambda must be positive")
        values, D = f.values, f.distance_matrix
        if math.isinf(values[v]):
            raise ValueError("f(v) must be finite")
        if not values[v] < values.min() + eps:
            raise ValueError(
                f"v is not an eps-minimizer: f(v)={values[v]}, "
                f"inf f + eps={values.min() + eps}"
            )
        rate = eps / lam
        x, iterations = int(v), 0
        while True:
            improving = [
                u
                for u in range(f.size)
                if u != x and values[u] + rate * D[u, x] <= values[x]
            ]
            if not improving:
                break
            x = min(improving, key=lambda u: (values[u], D[u, x], u))
            iterations += 1
            if iterations > f.size:
                raise RuntimeError("Ekeland search failed to terminate")

        distance = float(D[x, v])
        result = EkelandResult(
            point=x,
            start=int(v),
            eps=eps,
            lam=lam,
            iterations=iterations,
            distance=distance,
            strict_distance=distance < lam,
            value_decrease_ok=bool(values[x] <= values[v]),
            perturbed_min_ok=all(
                values[u] + rate * D[u, x] >= values[x] for u in range(f.size)
            ),
        )
        if not result.ok:
            loggers["oracle"].error(f"Ekeland conclusions failed: {result.to_dict()}")
        return result

    # ------------------------------------------------------------------
    # grid modules against brute force and analytic values

    def cross_check(
        self,
        f: ProbeFunction,
        spacing: float,
        schedule: RadiusSchedule,
        half_width: float = settings.GRID_HALF_WIDTH,
        truths: Optional[Dict[str, float]] = None,
        point_truths: Optional[Sequence[Dict[str, Any]]] = None,
        rel_tol: float = settings.RELATIVE_TOL,
        tol: float = settings.DEFAULT_TOL,
    ) -> DiscrepancyReport:
        """
        Discretize ``f`` at ``spacing``, compare the sampled limits with
        brute force radius by radius, and compare the Euclidean estimates with
        stored analytic values (absolute floor 3h).
        """
        grid = self.function_service.discretize_function(f, spacing, half_width)
        schedule = self.core.clip_schedule(schedule, spacing)
        brute = self.brute_force_all(grid, schedule, tol)
        s = self.slope_service
        sampled = {
            "er_modulus": s.er_modulus(grid, schedule, tol),
            "strict_outer": s.strict_outer_slope(grid, schedule, tol),
            "uniform_strict": s.uniform_strict_slope(grid, schedule, tol=tol),
            "ratio_liminf": s.ratio_liminf(grid, schedule, tol),
        }
        rows: List[Dict[str, Any]] = []
        passed = True
        worst = 0.0
        for name in LIMIT_QUANTITIES:
            exact = getattr(brute, name).values
            got = sampled[name].values
            agree = all(close_enough(a, b, 1e-12, 1e-12) for a, b in zip(exact, got))
            passed &= agree
            rows.append(
                {
                    "quantity": name,
                    "check": "sampled_vs_brute_force",
                    "expected": ext_to_json(exact[-1]),
                    "measured": ext_to_json(got[-1]),
                    "ok": agree,
                }
            )

        floor = 3 * spacing
        analytic = {
            "er_modulus": lambda: s.er_modulus(f, schedule, tol),
            "strict_outer": lambda: s.strict_outer_slope(f, schedule, tol),
            "uniform_strict": lambda: s.uniform_strict_slope(f, schedule, tol=tol),
            "ratio_liminf": lambda: s.ratio_liminf(f, schedule, tol),
        }
        for name, truth in sorted((truths or {}).items()):
            measured = analytic[name]().reported
            ok = close_enough(measured, truth, rel_tol, floor)
            worst = max(worst, _relative_error(measured, truth, floor))
            passed &= ok
            rows.append(
                {
                    "quantity": name,
                    "check": "grid_vs_analytic",
                    "expected": truth,
                    "measured": ext_to_json(measured),
                    "ok": ok,
                }
            )
        for item in point_truths or []:
            if item["quantity"] == "local_slope":
                measured = s.local_slope(f, item["at"]).value
            else:
                measured = s.nonlocal_slope(f, item["at"]).value
            ok = close_enough(measured, item["value"], rel_tol, 2 * spacing)
            worst = max(worst, _relative_error(measured, item["value"], floor))
            passed &= ok
            rows.append(
                {
                    "quantity": f"{item['quantity']}@{item['at']}",
                    "check": "grid_vs_analytic",
                    "expected": item["value"],
                    "measured": ext_to_json(measured),
                    "ok": ok,
                }
            )

        if not passed:
            loggers["oracle"].warning(f"{f.name}: cross-check failed at h={spacing}")
        return DiscrepancyReport(
            fixture=f.name,
            spacing=spacing,
            rows=rows,
            max_relative_error=worst,
            passed=bool(passed),
        )


def _relative_error(measured: float, truth: float, floor: float) -> float:
    if math.isinf(measured) or math.isinf(truth):
        return 0.0 if measured == truth else math.inf
    return abs(measured - truth) / max(abs(truth), floor)
