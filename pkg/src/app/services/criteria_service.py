from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from src.app.config.settings import settings
from src.app.models.domain.function_models import ProbeFunction, TwoVarFunction
from src.app.models.domain.limit_models import LimitEstimate, RadiusSchedule
from src.app.models.domain.mapping_models import SetValuedMapping
from src.app.models.domain.report_models import ConditionVerdict, CriteriaVerdict
from src.app.models.domain.space_models import EuclideanSpace, NormKind
from src.app.services.mapping_service import MappingService
from src.app.services.slope_service import BandKind, SlopeService
from src.app.services.two_var_slope_service import TwoVarSlopeService
from src.app.utils.error_handler import (
    ImplicationViolationError,
    NotEvaluableError,
)
from src.app.utils.ext_real_utils import close_enough
from src.app.utils.logging_util import loggers


class CriteriaFamily(str, Enum):
    ERROR_BOUND = "error_bound"
    ERROR_BOUND_QUALITATIVE = "error_bound_qualitative"
    TWO_VAR_ERROR_BOUND = "two_var_error_bound"
    TWO_VAR_ERROR_BOUND_QUALITATIVE = "two_var_error_bound_qualitative"
    SUBREGULARITY = "subregularity"
    SUBREGULARITY_QUALITATIVE = "subregularity_qualitative"


@dataclass(frozen=True)
class Implication:
    antecedent: str
    consequent: str
    # structural assumption the implication needs; see _settings_for_*
    setting: str = "always"

    @property
    def label(self) -> str:
        return f"{self.antecedent}=>{self.consequent}"


def _both_ways(a: str, b: str, setting: str) -> List[Implication]:
    return [Implication(a, b, setting), Implication(b, a, setting)]


ERROR_BOUND_CHAIN = [
    Implication("c", "e"),
    Implication("d", "e"),
    Implication("e", "b"),
    Implication("d", "f", "normed"),
    Implication("e", "g", "normed"),
    Implication("b", "a", "complete"),
    Implication("f", "d", "asplund"),
    Implication("g", "e", "asplund"),
    *_both_ways("b", "d", "convex"),
    *_both_ways("d", "f", "convex"),
]

# shared by the single- and two-variable qualitative lists
QUALITATIVE_ERROR_BOUND_CHAIN = [
    Implication("eb", "a"),
    Implication("b", "d"),
    Implication("c", "d"),
    Implication("e", "f"),
    Implication("d", "a", "complete"),
    Implication("a", "eb", "complete"),
    *_both_ways("e", "c", "asplund"),
    *_both_ways("f", "d", "asplund"),
]

TWO_VAR_ERROR_BOUND_CHAIN = [
    Implication("c", "e"),
    Implication("d", "e"),
    Implication("e", "b"),
    Implication("d", "f", "normed"),
    Implication("e", "g", "normed"),
    Implication("b", "a", "complete"),
    Implication("f", "d", "asplund"),
    Implication("g", "e", "asplund"),
]

SUBREGULARITY_CHAIN = [
    Implication("c", "e"),
    Implication("d", "e"),
    Implication("e", "b"),
    Implication("f", "g"),
    Implication("f", "h"),
    Implication("b", "a", "complete"),
    Implication("f", "d", "asplund"),
    Implication("g", "e", "asplund"),
    Implication("h", "b", "smooth_or_convex"),
]

QUALITATIVE_SUBREGULARITY_CHAIN = [
    Implication("sr", "a"),
    Implication("b", "d"),
    Implication("c", "d"),
    Implication("e", "f"),
    Implication("d", "a", "complete"),
    Implication("a", "sr", "complete"),
    Implication("e", "c", "asplund"),
    Implication("f", "d", "asplund"),
    Implication("g", "c", "smooth_or_convex"),
]


@dataclass
class _Condition:
    label: str
    description: str
    compute: Callable[[], LimitEstimate]
    strict: bool = True


class CriteriaService:
    """
    Evaluates the sufficient-condition lists for error bounds and metric
    subregularity and audits the implications between them.

    A condition holds when its limit estimate exceeds the threshold by more
    than STRICT_SLACK (">" conditions) or reaches it up to STRICT_SLACK
    (the error bound / subregularity condition itself). An implication whose
    antecedent holds and whose consequent fails is a violation unless one of
    the two values is within RELATIVE_TOL of the threshold; violations raise
    ImplicationViolationError.
    """

    def __init__(
        self,
        slope_service: Optional[SlopeService] = None,
        two_var_slope_service: Optional[TwoVarSlopeService] = None,
        mapping_service: Optional[MappingService] = None,
    ):
        self.slope_service = slope_service or SlopeService()
        self.two_var = two_var_slope_service or TwoVarSlopeService(
            self.slope_service.core, self.slope_service.space_service
        )
        self.mapping_service = mapping_service or MappingService(
            self.slope_service.core,
            self.slope_service.space_service,
            self.two_var,
        )

    # ------------------------------------------------------------------
    # evaluation and audit

    def _evaluate(self, condition: _Condition, threshold: float) -> ConditionVerdict:
        try:
            estimate = condition.compute()
        except NotEvaluableError as e:
            return ConditionVerdict(
                label=condition.label,
                description=condition.description,
                value=None,
                holds=None,
                evaluable=False,
                note=str(e),
            )
        value = estimate.reported
        if condition.strict:
            holds = value > threshold + settings.STRICT_SLACK
        else:
            holds = value >= threshold - settings.STRICT_SLACK
        note = ", ".join(sorted(set(estimate.flags)))
        return ConditionVerdict(
            label=condition.label,
            description=condition.description,
            value=value,
            holds=bool(holds),
            note=note,
        )

    @staticmethod
    def _borderline(value: Optional[float], threshold: float) -> bool:
        return value is not None and close_enough(
            value, threshold, rel=settings.RELATIVE_TOL
        )

    def _audit(
        self,
        family: CriteriaFamily,
        conditions: Dict[str, ConditionVerdict],
        chain: Sequence[Implication],
        applicable: Dict[str, bool],
        threshold: float,
    ):
        audited: List[str] = []
        skipped: List[str] = []
        for imp in chain:
            ante = conditions.get(imp.antecedent)
            cons = conditions.get(imp.consequent)
            if (
                not applicable.get(imp.setting, False)
                or ante is None
                or cons is None
                or not (ante.evaluable and cons.evaluable)
            ):
                skipped.append(imp.label)
                continue
            audited.append(imp.label)
            if not ante.holds or cons.holds:
                continue
            if self._borderline(ante.value, threshold) or self._borderline(
                cons.value, threshold
            ):
                cons.note = ", ".join(
                    filter(None, [cons.note, f"borderline {imp.label}"])
                )
                continue
            detail = (
                f"{imp.antecedent}={ante.value} holds, "
                f"{imp.consequent}={cons.value} fails at threshold {threshold}"
            )
            loggers["verify"].error(f"{family.value}: {imp.label} {detail}")
            raise ImplicationViolationError(family.value, imp.label, detail)
        return audited, skipped

    def _verdict(
        self,
        family: CriteriaFamily,
        threshold: float,
        conditions: List[_Condition],
        chain: Sequence[Implication],
        applicable: Dict[str, bool],
        logger_name: str,
    ) -> CriteriaVerdict:
        if not threshold > 0:
            raise ValueError(f"criteria threshold must be positive, got {threshold}")
        evaluated = {c.label: self._evaluate(c, threshold) for c in conditions}
        audited, skipped = self._audit(
            family, evaluated, chain, applicable, threshold
        )
        verdict = CriteriaVerdict(
            criteria=family.value,
            gamma=threshold,
            conditions=evaluated,
            audited=audited,
            skipped=skipped,
        )
        loggers[logger_name].info(
            f"{family.value}: "
            + ", ".join(
                f"{k}={v.holds}" for k, v in sorted(evaluated.items())
            )
        )
        return verdict

    # ------------------------------------------------------------------
    # settings under which implications are claimed

    @staticmethod
    def _is_asplund(space) -> bool:
        # finite-dimensional normed spaces
        if isinstance(space, EuclideanSpace):
            return True
        left = getattr(space, "left", None)
        right = getattr(space, "right", None)
        return isinstance(left, EuclideanSpace) and isinstance(
            right, EuclideanSpace
        )

    def _settings_for_function(self, f: ProbeFunction) -> Dict[str, bool]:
        normed = f.space.is_normed
        return {
            "always": True,
            "normed": normed,
            "complete": f.complete_claim and f.lsc_claim,
            "asplund": normed and self._is_asplund(f.space),
            "convex": normed and f.convex_claim,
        }

    def _settings_for_two_var(self, g: TwoVarFunction) -> Dict[str, bool]:
        normed = g.product.is_normed
        return {
            "always": True,
            "normed": normed,
            "complete": g.complete_claim and g.lsc_claim,
            "asplund": normed and self._is_asplund(g.product),
        }

    def _settings_for_mapping(self, F: SetValuedMapping) -> Dict[str, bool]:
        X, Y = F.domain_space, F.range_space
        normed = X.is_normed and Y.is_normed
        asplund = normed and self._is_asplund(X) and self._is_asplund(Y)
        # L2 and every norm on the line are differentiable away from 0
        smooth = normed and (Y.norm_kind == NormKind.L2 or F.dy == 1)
        return {
            "always": True,
            "complete": F.complete and F.closed,
            "asplund": asplund,
            "smooth_or_convex": asplund and (smooth or F.convex),
        }

    # ------------------------------------------------------------------
    # single-variable functions

    def _max_band(
        self,
        f: ProbeFunction,
        names: Sequence[str],
        schedule: RadiusSchedule,
        band: BandKind,
        tol: float,
    ) -> LimitEstimate:
        values = np.maximum.reduce(
            [self.slope_service.sample_array(f, n) for n in names]
        )
        return self.slope_service.band_limit(f, values, schedule, band, tol)

    def _check_subdiff(self, f: ProbeFunction) -> None:
        if not f.space.is_normed:
            raise NotEvaluableError("subdifferential slopes need a normed space")
        if not f.has_oracle:
            raise NotEvaluableError(f"{f.name} has no subgradient oracle")

    def criteria_verdict(
        self,
        f: ProbeFunction,
        gamma: float,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
    ) -> CriteriaVerdict:
        if f.base_value != 0.0:
            raise ValueError(f"{f.name}: criteria need f(x̄) = 0")
        s = self.slope_service

        def subdiff_max():
            self._check_subdiff(f)
            return self._max_band(
                f, ["subdiff", "ratio"], schedule, BandKind.STRICT, tol
            )

        conditions = [
            _Condition(
                "a",
                "error bound with constant gamma: Er f(x̄) >= gamma",
                lambda: s.er_modulus(f, schedule, tol),
                strict=False,
            ),
            _Condition(
                "b",
                "uniform strict slope > gamma",
                lambda: s.uniform_strict_slope(f, schedule, tol=tol),
            ),
            _Condition(
                "c",
                "liminf f(x)/d(x, x̄) > gamma",
                lambda: s.ratio_liminf(f, schedule, tol),
            ),
            _Condition(
                "d",
                "strict outer slope > gamma",
                lambda: s.strict_outer_slope(f, schedule, tol),
            ),
            _Condition(
                "e",
                "liminf max{local slope, f(x)/d(x, x̄)} > gamma",
                lambda: self._max_band(
                    f, ["local", "ratio"], schedule, BandKind.STRICT, tol
                ),
            ),
            _Condition(
                "f",
                "strict outer subdifferential slope > gamma",
                lambda: s.strict_outer_subdiff_slope(f, schedule, tol),
            ),
            _Condition(
                "g",
                "liminf max{subdifferential slope, f(x)/‖x - x̄‖} > gamma",
                subdiff_max,
            ),
        ]
        return self._verdict(
            CriteriaFamily.ERROR_BOUND,
            gamma,
            conditions,
            ERROR_BOUND_CHAIN,
            self._settings_for_function(f),
            "slopes",
        )

    def qualitative_verdict(
        self,
        f: ProbeFunction,
        schedule: RadiusSchedule,
        threshold: float = settings.QUALITATIVE_THRESHOLD,
        tol: float = settings.DEFAULT_TOL,
    ) -> CriteriaVerdict:
        """The "> 0" list, with ``threshold`` standing in for zero."""
        if f.base_value != 0.0:
            raise ValueError(f"{f.name}: criteria need f(x̄) = 0")
        s = self.slope_service
        applicable = self._settings_for_function(f)

        def asplund_only(compute):
            def run():
                if not applicable["asplund"]:
                    raise NotEvaluableError("condition needs an Asplund space")
                self._check_subdiff(f)
                return compute()

            return run

        conditions = [
            _Condition(
                "eb",
                "Er f(x̄) > 0",
                lambda: s.er_modulus(f, schedule, tol),
            ),
            _Condition(
                "a",
                "uniform strict slope > 0",
                lambda: s.uniform_strict_slope(f, schedule, tol=tol),
            ),
            _Condition(
                "b",
                "liminf f(x)/d(x, x̄) > 0",
                lambda: s.ratio_liminf(f, schedule, tol),
            ),
            _Condition(
                "c",
                "strict outer slope > 0",
                lambda: s.strict_outer_slope(f, schedule, tol),
            ),
            _Condition(
                "d",
                "liminf of the local slope as f(x)/d(x, x̄) ↓ 0 is > 0",
                lambda: self._max_band(f, ["local"], schedule, BandKind.RATIO, tol),
            ),
            _Condition(
                "e",
                "strict outer subdifferential slope > 0",
                asplund_only(
                    lambda: s.strict_outer_subdiff_slope(f, schedule, tol)
                ),
            ),
            _Condition(
                "f",
                "liminf of the subdifferential slope as f(x)/‖x - x̄‖ ↓ 0 is > 0",
                asplund_only(
                    lambda: self._max_band(
                        f, ["subdiff"], schedule, BandKind.RATIO, tol
                    )
                ),
            ),
        ]
        return self._verdict(
            CriteriaFamily.ERROR_BOUND_QUALITATIVE,
            threshold,
            conditions,
            QUALITATIVE_ERROR_BOUND_CHAIN,
            applicable,
            "slopes",
        )

    # ------------------------------------------------------------------
    # functions of two variables

    def _check_subdiff2(self, g: TwoVarFunction) -> None:
        if not g.product.is_normed:
            raise NotEvaluableError("subdifferential slopes need normed X and Y")
        if not g.has_oracle:
            raise NotEvaluableError(f"{g.name} has no subgradient oracle")

    def criteria_verdict2(
        self,
        g: TwoVarFunction,
        gamma: float,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
    ) -> CriteriaVerdict:
        t = self.two_var

        def subdiff_only(compute):
            def run():
                self._check_subdiff2(g)
                return compute()

            return run

        conditions = [
            _Condition(
                "a",
                "error bound at (x̄, ȳ) with constant gamma: Er f >= gamma",
                lambda: t.er2_modulus(g, schedule, tol),
                strict=False,
            ),
            _Condition(
                "b",
                "uniform strict slope > gamma",
                lambda: t.uniform_strict_slope2(g, schedule, tol=tol),
            ),
            _Condition(
                "c",
                "liminf f(x, y)/d(x, x̄) > gamma",
                lambda: t.ratio_liminf2(g, schedule, tol),
            ),
            _Condition(
                "d",
                "strict outer slope > gamma",
                lambda: t.strict_outer_slope2(g, schedule, tol=tol),
            ),
            _Condition(
                "e",
                "liminf max{local rho-slope, f(x, y)/d(x, x̄)} > gamma",
                lambda: t.coupled_limit(
                    g, ["local", "ratio"], schedule, BandKind.STRICT, tol=tol
                ),
            ),
            _Condition(
                "f",
                "strict outer subdifferential slope > gamma",
                subdiff_only(lambda: t.strict_outer_subdiff_slope2(g, schedule, tol)),
            ),
            _Condition(
                "g",
                "liminf max{subdifferential rho-slope, f(x, y)/‖x - x̄‖} > gamma",
                subdiff_only(
                    lambda: t.coupled_limit(
                        g, ["subdiff", "ratio"], schedule, BandKind.STRICT, tol=tol
                    )
                ),
            ),
        ]
        return self._verdict(
            CriteriaFamily.TWO_VAR_ERROR_BOUND,
            gamma,
            conditions,
            TWO_VAR_ERROR_BOUND_CHAIN,
            self._settings_for_two_var(g),
            "slopes",
        )

    def qualitative_verdict2(
        self,
        g: TwoVarFunction,
        schedule: RadiusSchedule,
        threshold: float = settings.QUALITATIVE_THRESHOLD,
        tol: float = settings.DEFAULT_TOL,
    ) -> CriteriaVerdict:
        t = self.two_var
        applicable = self._settings_for_two_var(g)

        def asplund_only(compute):
            def run():
                if not applicable["asplund"]:
                    raise NotEvaluableError("condition needs Asplund X and Y")
                self._check_subdiff2(g)
                return compute()

            return run

        conditions = [
            _Condition(
                "eb", "Er f(x̄, ȳ) > 0", lambda: t.er2_modulus(g, schedule, tol)
            ),
            _Condition(
                "a",
                "uniform strict slope > 0",
                lambda: t.uniform_strict_slope2(g, schedule, tol=tol),
            ),
            _Condition(
                "b",
                "liminf f(x, y)/d(x, x̄) > 0",
                lambda: t.ratio_liminf2(g, schedule, tol),
            ),
            _Condition(
                "c",
                "strict outer slope > 0",
                lambda: t.strict_outer_slope2(g, schedule, tol=tol),
            ),
            _Condition(
                "d",
                "liminf of the local rho-slope as f(x, y)/d(x, x̄) ↓ 0 is > 0",
                lambda: t.coupled_limit(
                    g, ["local"], schedule, BandKind.RATIO, tol=tol
                ),
            ),
            _Condition(
                "e",
                "strict outer subdifferential slope > 0",
                asplund_only(lambda: t.strict_outer_subdiff_slope2(g, schedule, tol)),
            ),
            _Condition(
                "f",
                "liminf of the subdifferential rho-slope as f(x, y)/‖x - x̄‖ ↓ 0 is > 0",
                asplund_only(
                    lambda: t.coupled_limit(
                        g, ["subdiff"], schedule, BandKind.RATIO, tol=tol
                    )
                ),
            ),
        ]
        return self._verdict(
            CriteriaFamily.TWO_VAR_ERROR_BOUND_QUALITATIVE,
            threshold,
            conditions,
            QUALITATIVE_ERROR_BOUND_CHAIN,
            applicable,
            "slopes",
        )

    # ------------------------------------------------------------------
    # set-valued mappings

    def _mapping_conditions(
        self,
        F: SetValuedMapping,
        schedule: RadiusSchedule,
        tol: float,
        applicable: Dict[str, bool],
    ) -> Dict[str, Callable[[], LimitEstimate]]:
        m = self.mapping_service

        def guarded(setting: str, compute):
            def run():
                if not applicable[setting]:
                    raise NotEvaluableError(f"condition needs the {setting} setting")
                return compute()

            return run

        return {
            "sr": lambda: m.subregularity_constant(F, schedule, tol),
            "uniform_strict": lambda: m.F_uniform_strict_slope(F, schedule, tol=tol),
            "ratio": lambda: m.F_ratio_liminf(F, schedule, tol),
            "strict": lambda: m.F_strict_slope(F, schedule, tol=tol),
            "strict_with_ratio": lambda: m.F_strict_slope_with_ratio(
                F, schedule, tol
            ),
            "approx": guarded(
                "asplund",
                lambda: m.F_approx_strict_subdiff_slope(F, schedule, tol),
            ),
            "approx_with_ratio": guarded(
                "asplund",
                lambda: m.F_approx_strict_subdiff_slope(
                    F, schedule, tol, with_ratio=True
                ),
            ),
            "exact": guarded(
                "asplund", lambda: m.F_strict_subdiff_slope(F, schedule, tol)
            ),
            "exact_smooth": guarded(
                "smooth_or_convex",
                lambda: m.F_strict_subdiff_slope(F, schedule, tol),
            ),
        }

    def subregularity_verdict(
        self,
        F: SetValuedMapping,
        gamma: float,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
    ) -> CriteriaVerdict:
        applicable = self._settings_for_mapping(F)
        q = self._mapping_conditions(F, schedule, tol, applicable)
        conditions = [
            _Condition(
                "a",
                "metric subregularity with constant gamma: sr[F] >= gamma",
                q["sr"],
                strict=False,
            ),
            _Condition("b", "uniform strict slope of F > gamma", q["uniform_strict"]),
            _Condition("c", "liminf d(y, ȳ)/d(x, x̄) on gph F > gamma", q["ratio"]),
            _Condition("d", "strict slope of F > gamma", q["strict"]),
            _Condition(
                "e",
                "lim inf max{local rho-slope of F, d(y, ȳ)/d(x, x̄)} > gamma",
                q["strict_with_ratio"],
            ),
            _Condition(
                "f",
                "approximate strict subdifferential slope of F > gamma",
                q["approx"],
            ),
            _Condition(
                "g",
                "lim inf max{approximate subdifferential rho-slope, "
                "‖y - ȳ‖/‖x - x̄‖} > gamma",
                q["approx_with_ratio"],
            ),
            _Condition(
                "h", "strict subdifferential slope of F > gamma", q["exact"]
            ),
        ]
        return self._verdict(
            CriteriaFamily.SUBREGULARITY,
            gamma,
            conditions,
            SUBREGULARITY_CHAIN,
            applicable,
            "mappings",
        )

    def qualitative_subregularity_verdict(
        self,
        F: SetValuedMapping,
        schedule: RadiusSchedule,
        threshold: float = settings.QUALITATIVE_THRESHOLD,
        tol: float = settings.DEFAULT_TOL,
    ) -> CriteriaVerdict:
        applicable = self._settings_for_mapping(F)
        q = self._mapping_conditions(F, schedule, tol, applicable)
        conditions = [
            _Condition("sr", "sr[F] > 0", q["sr"]),
            _Condition("a", "uniform strict slope of F > 0", q["uniform_strict"]),
            _Condition("b", "liminf d(y, ȳ)/d(x, x̄) on gph F > 0", q["ratio"]),
            _Condition("c", "strict slope of F > 0", q["strict"]),
            _Condition(
                "d",
                "lim inf max{local rho-slope of F, d(y, ȳ)/d(x, x̄)} > 0",
                q["strict_with_ratio"],
            ),
            _Condition(
                "e",
                "approximate strict subdifferential slope of F > 0",
                q["approx"],
            ),
            _Condition(
                "f",
                "lim inf max{approximate subdifferential rho-slope, "
                "‖y - ȳ‖/‖x - x̄‖} > 0",
                q["approx_with_ratio"],
            ),
            _Condition(
                "g",
                "strict subdifferential slope of F > 0 (smooth norm or convex F)",
                q["exact_smooth"],
            ),
        ]
        return self._verdict(
            CriteriaFamily.SUBREGULARITY_QUALITATIVE,
            threshold,
            conditions,
            QUALITATIVE_SUBREGULARITY_CHAIN,
            applicable,
            "mappings",
        )

