import math
from typing import Callable, List, Optional, Tuple

from src.app.config.settings import settings
from src.app.models.domain.limit_models import (
    LimitEstimate,
    LimitKind,
    RadiusSchedule,
)
from src.app.utils.ext_real_utils import check_ext_real
from src.app.utils.ext_real_utils import extreal_div as _extreal_div
from src.app.utils.logging_util import loggers


def default_schedule() -> RadiusSchedule:
    return RadiusSchedule(
        settings.SCHEDULE_RHO0, settings.SCHEDULE_GAMMA, settings.SCHEDULE_STEPS
    )


def probe_schedule() -> RadiusSchedule:
    return RadiusSchedule(
        settings.PROBE_RHO0, settings.PROBE_GAMMA, settings.PROBE_STEPS
    )


class CoreNumericsService:
    """Radius-schedule limits and extended-real arithmetic."""

    def estimate_limit(
        self,
        band_value: Callable[[float], float],
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
        kind: LimitKind = LimitKind.INF,
        flags: Optional[List[str]] = None,
    ) -> LimitEstimate:
        """
        Evaluate ``band_value`` on every radius of ``schedule`` and report the
        last value as the limit.

        Args:
            band_value: pure function rho -> band infimum (or supremum).
            schedule: geometric radius schedule; needs at least 2 steps.
            tol: slack for the monotonicity and saturation diagnostics.
            kind: INF for band infima (nondecreasing as rho shrinks), SUP for
                suprema over shrinking balls (nonincreasing).

        Returns:
            LimitEstimate with per-radius values in schedule order.
        """
        if schedule.steps < 2:
            raise ValueError(
                f"limit estimation needs steps >= 2, got {schedule.steps}"
            )
        if not tol > 0:
            raise ValueError(f"tol must be positive, got {tol}")

        per_radius: List[Tuple[float, float]] = []
        for rho in schedule.radii():
            value = check_ext_real(band_value(float(rho)), f"band at rho={rho}")
            per_radius.append((float(rho), value))

        values = [v for _, v in per_radius]
        monotone = all(
            self._ordered(a, b, tol, kind) for a, b in zip(values, values[1:])
        )
        last, prev = values[-1], values[-2]
        saturated = (math.isinf(last) and math.isinf(prev)) or (
            not math.isinf(last)
            and not math.isinf(prev)
            and abs(last - prev) <= tol
        )
        estimate = LimitEstimate(
            per_radius=per_radius,
            reported=last,
            monotone=monotone,
            saturated=saturated,
            kind=kind,
            flags=list(flags or []),
        )
        if math.isinf(last) and kind == LimitKind.INF:
            estimate.flags.append("empty_band")
        if not monotone:
            estimate.flags.append("non_monotone")
            loggers["slopes"].warning(
                f"Non-monotone {kind.value} sequence: {values}"
            )
        return estimate

    @staticmethod
    def _ordered(a: float, b: float, tol: float, kind: LimitKind) -> bool:
        if kind == LimitKind.INF:
            return b >= a - tol or (math.isinf(a) and math.isinf(b))
        return b <= a + tol or (math.isinf(a) and math.isinf(b))

    def extreal_div(
        self, num: float, den: float, zero_over_zero: float = 0.0
    ) -> float:
        return _extreal_div(num, den, zero_over_zero)

    def clip_schedule(
        self,
        schedule: RadiusSchedule,
        resolution: float,
        factor: float = settings.SCHEDULE_RESOLUTION_FACTOR,
    ) -> RadiusSchedule:
        """Drop radii finer than ``factor * resolution`` (keep >= 2 steps)."""
        if resolution <= 0:
            return schedule
        floor = factor * resolution
        steps = schedule.steps
        while steps > 2 and schedule.rho0 * schedule.gamma**steps < floor:
            steps -= 1
        if steps != schedule.steps:
            loggers["slopes"].info(
                f"Clipped schedule {schedule.to_dict()} to {steps} steps "
                f"(resolution {resolution})"
            )
            return RadiusSchedule(schedule.rho0, schedule.gamma, steps)
        return schedule
