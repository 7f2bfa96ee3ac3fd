from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from src.app.models.domain.function_models import P1P2Report
from src.app.models.domain.limit_models import LimitEstimate
from src.app.models.domain.mapping_models import GfrererResult
from src.app.utils.ext_real_utils import ext_to_json

DISCRETIZATION_NOTE = (
    "Values are exact on finite metric spaces and approximate on grids; "
    "strict inequalities are certified with slack, not proved."
)


def _limit(estimate: Optional[LimitEstimate]) -> Optional[Dict[str, Any]]:
    return estimate.to_dict() if estimate is not None else None


@dataclass
class PointEstimate:
    value: float
    flags: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": ext_to_json(self.value),
            "flags": sorted(set(self.flags)),
        }


@dataclass
class LevelSetDistance:
    value: float
    truncated: bool
    nearest_index: Optional[int] = None
    flags: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": ext_to_json(self.value),
            "truncated": self.truncated,
            "flags": sorted(set(self.flags)),
        }


@dataclass
class SlopeReport:
    """Single-variable slopes at a query point and limits at the base point."""

    function: Dict[str, Any]
    query_point: List[float]
    local_slope: PointEstimate
    nonlocal_slope: PointEstimate
    restricted_sublevel_slope: PointEstimate
    restricted_level_set_slope: PointEstimate
    subdiff_slope: Optional[PointEstimate]
    er_modulus: LimitEstimate
    strict_outer: LimitEstimate
    uniform_strict: LimitEstimate
    ratio_liminf: LimitEstimate
    subdiff_strict_outer: Optional[LimitEstimate]
    schedule: Dict[str, Any]
    band_mode: str
    note: str = DISCRETIZATION_NOTE

    def to_dict(self) -> Dict[str, Any]:
        return {
            "function": self.function,
            "query_point": self.query_point,
            "local_slope": self.local_slope.to_dict(),
            "nonlocal_slope": self.nonlocal_slope.to_dict(),
            "restricted_sublevel_slope": self.restricted_sublevel_slope.to_dict(),
            "restricted_level_set_slope": self.restricted_level_set_slope.to_dict(),
            "subdiff_slope": (
                self.subdiff_slope.to_dict() if self.subdiff_slope else None
            ),
            "er_modulus": self.er_modulus.to_dict(),
            "strict_outer": self.strict_outer.to_dict(),
            "uniform_strict": self.uniform_strict.to_dict(),
            "ratio_liminf": self.ratio_liminf.to_dict(),
            "subdiff_strict_outer": _limit(self.subdiff_strict_outer),
            "schedule": self.schedule,
            "band_mode": self.band_mode,
            "note": self.note,
        }


@dataclass
class TwoVarSlopeReport:
    function: Dict[str, Any]
    query_point: Dict[str, List[float]]
    rho: float
    nonlocal_rho_slope: PointEstimate
    local_rho_slope: PointEstimate
    subdiff_rho_slope: Optional[PointEstimate]
    subdiff_rho_slope_primed: Optional[PointEstimate]
    er2: LimitEstimate
    er2_forms: Dict[str, LimitEstimate]
    uniform_strict: LimitEstimate
    uniform_strict_sum: LimitEstimate
    strict_outer: LimitEstimate
    ratio_liminf: LimitEstimate
    subdiff_strict_outer: Optional[LimitEstimate]
    p1p2: P1P2Report
    schedule: Dict[str, Any]
    metric_variant: str = "MAX"
    note: str = DISCRETIZATION_NOTE

    def to_dict(self) -> Dict[str, Any]:
        return {
            "function": self.function,
            "query_point": self.query_point,
            "rho": self.rho,
            "nonlocal_rho_slope": self.nonlocal_rho_slope.to_dict(),
            "local_rho_slope": self.local_rho_slope.to_dict(),
            "subdiff_rho_slope": (
                self.subdiff_rho_slope.to_dict()
                if self.subdiff_rho_slope
                else None
            ),
            "subdiff_rho_slope_primed": (
                self.subdiff_rho_slope_primed.to_dict()
                if self.subdiff_rho_slope_primed
                else None
            ),
            "er2": self.er2.to_dict(),
            "er2_forms": {k: v.to_dict() for k, v in self.er2_forms.items()},
            "uniform_strict": self.uniform_strict.to_dict(),
            "uniform_strict_sum": self.uniform_strict_sum.to_dict(),
            "ratio_liminf": self.ratio_liminf.to_dict(),
            "strict_outer": self.strict_outer.to_dict(),
            "subdiff_strict_outer": _limit(self.subdiff_strict_outer),
            "p1p2": self.p1p2.to_dict(),
            "schedule": self.schedule,
            "metric_variant": self.metric_variant,
            "note": self.note,
        }


@dataclass
class ConditionVerdict:
    label: str
    description: str
    value: Optional[float]
    holds: Optional[bool]
    evaluable: bool = True
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "description": self.description,
            "value": ext_to_json(self.value),
            "holds": self.holds,
            "evaluable": self.evaluable,
            "note": self.note,
        }


@dataclass
class CriteriaVerdict:
    criteria: str
    gamma: float
    conditions: Dict[str, ConditionVerdict]
    audited: List[str] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)

    def holds(self, label: str) -> Optional[bool]:
        return self.conditions[label].holds

    @property
    def certified(self) -> bool:
        """True when the error-bound / subregularity condition (a) holds."""
        return bool(self.conditions["a"].holds)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "criteria": self.criteria,
            "gamma": self.gamma,
            "conditions": {
                k: self.conditions[k].to_dict() for k in sorted(self.conditions)
            },
            "audited": list(self.audited),
            "skipped": list(self.skipped),
            "certified": self.certified,
        }


@dataclass
class SubregularityReport:
    mapping: Dict[str, Any]
    sr: LimitEstimate
    calmness_of_inverse: LimitEstimate
    uniform_strict: LimitEstimate
    strict_slope: LimitEstimate
    strict_subdiff: Optional[LimitEstimate]
    approx_strict_subdiff: Optional[LimitEstimate]
    gfrerer: Optional[GfrererResult]
    schedule: Dict[str, Any]
    note: str = DISCRETIZATION_NOTE

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mapping": self.mapping,
            "sr": self.sr.to_dict(),
            "calmness_of_inverse": self.calmness_of_inverse.to_dict(),
            "uniform_strict": self.uniform_strict.to_dict(),
            "strict_slope": self.strict_slope.to_dict(),
            "strict_subdiff": _limit(self.strict_subdiff),
            "approx_strict_subdiff": _limit(self.approx_strict_subdiff),
            "gfrerer": self.gfrerer.to_dict() if self.gfrerer else None,
            "schedule": self.schedule,
            "note": self.note,
        }


@dataclass
class BruteForceReport:
    """Exact enumeration results on a finite space."""

    local_slope: Dict[int, float]
    nonlocal_slope: Dict[int, float]
    isolated: List[int]
    er_modulus: LimitEstimate
    strict_outer: LimitEstimate
    uniform_strict: LimitEstimate
    ratio_liminf: LimitEstimate
    er_step_function: List[Dict[str, Any]]
    er_exact: float
    # per limit: band value on each rho interval, and the finest nonempty band
    step_functions: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    exact: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "local_slope": {
                str(k): ext_to_json(v) for k, v in sorted(self.local_slope.items())
            },
            "nonlocal_slope": {
                str(k): ext_to_json(v)
                for k, v in sorted(self.nonlocal_slope.items())
            },
            "isolated": sorted(self.isolated),
            "er_modulus": self.er_modulus.to_dict(),
            "strict_outer": self.strict_outer.to_dict(),
            "uniform_strict": self.uniform_strict.to_dict(),
            "ratio_liminf": self.ratio_liminf.to_dict(),
            "er_step_function": self.er_step_function,
            "er_exact": ext_to_json(self.er_exact),
            "step_functions": self.step_functions,
            "exact": {k: ext_to_json(v) for k, v in sorted(self.exact.items())},
        }


@dataclass
class EkelandResult:
    point: int
    start: int
    eps: float
    lam: float
    iterations: int
    distance: float
    strict_distance: bool
    value_decrease_ok: bool
    perturbed_min_ok: bool

    @property
    def ok(self) -> bool:
        return (
            self.distance <= self.lam
            and self.value_decrease_ok
            and self.perturbed_min_ok
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "point": self.point,
            "start": self.start,
            "eps": self.eps,
            "lambda": self.lam,
            "iterations": self.iterations,
            "distance": self.distance,
            "strict_distance": self.strict_distance,
            "value_decrease_ok": self.value_decrease_ok,
            "perturbed_min_ok": self.perturbed_min_ok,
            "ok": self.ok,
        }


@dataclass
class DiscrepancyReport:
    fixture: str
    spacing: float
    rows: List[Dict[str, Any]]
    max_relative_error: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fixture": self.fixture,
            "spacing": self.spacing,
            "rows": self.rows,
            "max_relative_error": ext_to_json(self.max_relative_error),
            "passed": self.passed,
        }


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    measured: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "measured": {
                k: (
                    ext_to_json(v)
                    if isinstance(v, (int, float)) and not isinstance(v, bool)
                    else v
                )
                for k, v in sorted(self.measured.items())
            },
        }
