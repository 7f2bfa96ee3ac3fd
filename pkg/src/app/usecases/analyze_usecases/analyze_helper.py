import re
from typing import Any, Dict, List, Optional

from src.app.config.settings import settings
from src.app.models.domain.analysis_models import LoadedSpec
from src.app.models.domain.function_models import ProbeFunction, TwoVarFunction
from src.app.models.domain.limit_models import RadiusSchedule
from src.app.models.domain.report_models import CheckResult
from src.app.models.domain.space_models import Combiner, FiniteMetricSpace
from src.app.models.schemas.analysis_spec_schema import AnalysisSpec
from src.app.services.catalog_service import CatalogService
from src.app.services.core_numerics_service import CoreNumericsService
from src.app.services.criteria_service import CriteriaService
from src.app.services.function_service import FunctionService
from src.app.services.mapping_service import MappingService
from src.app.services.oracle_service import OracleService
from src.app.services.report_service import ReportService
from src.app.services.slope_service import SlopeService
from src.app.services.space_service import SpaceService
from src.app.services.spec_loader_service import SpecLoaderService
from src.app.services.subgradient_service import SubgradientService
from src.app.services.two_var_slope_service import TwoVarSlopeService
from src.app.utils.ext_real_utils import close_enough, ext_from_json, ext_to_json
from src.app.utils.logging_util import loggers

# truth key -> (report section, path inside the section)
TRUTH_PATHS = {
    "er_modulus": ("slopes", ("er_modulus", "reported")),
    "strict_outer": ("slopes", ("strict_outer", "reported")),
    "uniform_strict": ("slopes", ("uniform_strict", "reported")),
    "ratio_liminf": ("slopes", ("ratio_liminf", "reported")),
    "er2": ("slopes", ("er2", "reported")),
    "uniform_strict2": ("slopes", ("uniform_strict", "reported")),
    "strict_outer2": ("slopes", ("strict_outer", "reported")),
    "sr": ("slopes", ("sr", "reported")),
    "strict_subdiff": ("slopes", ("strict_subdiff", "reported")),
    "sr_first_band": ("slopes", ("sr", "per_radius", 0, "value")),
    "excludes_origin": ("slopes", ("gfrerer", "excludes_origin")),
    "er_exact": ("brute_force", ("er_exact",)),
}


def report_name(name: str) -> str:
    """File-system safe report name."""
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name).strip("._") or "report"


class AnalyzeHelper:
    """Shared service graph plus the per-kind analysis steps."""

    def __init__(self):
        self.space_service = SpaceService()
        self.core = CoreNumericsService()
        self.function_service = FunctionService(self.space_service, self.core)
        self.subgradient_service = SubgradientService(self.space_service)
        self.slope_service = SlopeService(
            self.core,
            self.space_service,
            self.function_service,
            self.subgradient_service,
        )
        self.two_var_slope_service = TwoVarSlopeService(
            self.core,
            self.space_service,
            self.function_service,
            self.subgradient_service,
        )
        self.mapping_service = MappingService(
            self.core, self.space_service, self.two_var_slope_service
        )
        self.criteria_service = CriteriaService(
            self.slope_service, self.two_var_slope_service, self.mapping_service
        )
        self.oracle_service = OracleService(
            self.core, self.function_service, self.slope_service
        )
        self.catalog_service = CatalogService(
            self.space_service, self.function_service
        )
        self.spec_loader_service = SpecLoaderService(
            self.catalog_service,
            self.function_service,
            self.mapping_service,
            self.space_service,
        )
        self.report_service = ReportService()

    # ------------------------------------------------------------------
    # loading

    def load(self, request: Dict[str, Any]) -> LoadedSpec:
        schedule = request.get("schedule")
        if isinstance(schedule, dict):
            schedule = RadiusSchedule(**schedule)
        overrides = {
            "at": request.get("at"),
            "schedule": schedule,
            "tol": request.get("tol"),
            "gamma": request.get("gamma"),
        }
        spec = request.get("spec")
        if spec is not None:
            if not isinstance(spec, AnalysisSpec):
                spec = self.spec_loader_service.parse(spec)
            return self.spec_loader_service.build(spec, "<request>", **overrides)
        return self.spec_loader_service.load(request["spec_path"], **overrides)

    def analysis_schedule(self, loaded: LoadedSpec) -> RadiusSchedule:
        return self.core.clip_schedule(loaded.schedule, loaded.target.resolution)

    # ------------------------------------------------------------------
    # per-kind steps

    def slope_report(
        self, loaded: LoadedSpec, schedule: RadiusSchedule
    ) -> Dict[str, Any]:
        spec, target, tol = loaded.spec, loaded.target, loaded.tol
        if loaded.kind == "function":
            return self.slope_service.report(target, schedule, spec.at, tol).to_dict()
        if loaded.kind == "two_var_function":
            return self.two_var_slope_service.report(
                target,
                schedule,
                query_x=spec.at,
                query_y=spec.at_y,
                rho=spec.rho,
                combiner=Combiner.MAX,
                tol=tol,
            ).to_dict()
        return self.mapping_service.report(target, schedule, tol).to_dict()

    def criteria(
        self, loaded: LoadedSpec, schedule: RadiusSchedule
    ) -> Dict[str, Any]:
        target, tol, gamma = loaded.target, loaded.tol, loaded.gamma
        c = self.criteria_service
        try:
            if isinstance(target, ProbeFunction):
                verdict = c.criteria_verdict(target, gamma, schedule, tol)
            elif isinstance(target, TwoVarFunction):
                verdict = c.criteria_verdict2(target, gamma, schedule, tol)
            else:
                verdict = c.subregularity_verdict(target, gamma, schedule, tol)
        except ValueError as e:
            loggers["main"].warning(f"{loaded.name}: criteria skipped ({e})")
            return {"skipped": str(e)}
        return verdict.to_dict()

    def qualitative(
        self, loaded: LoadedSpec, schedule: RadiusSchedule
    ) -> Dict[str, Any]:
        target, tol = loaded.target, loaded.tol
        c = self.criteria_service
        try:
            if isinstance(target, ProbeFunction):
                verdict = c.qualitative_verdict(target, schedule, tol=tol)
            elif isinstance(target, TwoVarFunction):
                verdict = c.qualitative_verdict2(target, schedule, tol=tol)
            else:
                verdict = c.qualitative_subregularity_verdict(
                    target, schedule, tol=tol
                )
        except ValueError as e:
            loggers["main"].warning(f"{loaded.name}: qualitative list skipped ({e})")
            return {"skipped": str(e)}
        return verdict.to_dict()

    def brute_force(
        self, loaded: LoadedSpec, schedule: RadiusSchedule
    ) -> Optional[Dict[str, Any]]:
        f = loaded.target
        if not isinstance(f, ProbeFunction) or f.base_value != 0.0:
            return None
        if not isinstance(f.space, FiniteMetricSpace):
            return None
        return self.oracle_service.brute_force_all(f, schedule, loaded.tol).to_dict()

    # ------------------------------------------------------------------
    # stored ground truths

    def truth_checks(
        self, loaded: LoadedSpec, body: Dict[str, Any]
    ) -> List[CheckResult]:
        floor = 3 * loaded.target.resolution or 1e-9
        checks: List[CheckResult] = []
        for key, truth in sorted(loaded.truths.items()):
            if key not in TRUTH_PATHS:
                loggers["main"].warning(f"{loaded.name}: unknown truth key {key!r}")
                continue
            section, path = TRUTH_PATHS[key]
            measured = _dig(body.get(section), path)
            if isinstance(truth, bool):
                passed = measured is truth
            elif measured is None:
                passed = False
            else:
                value = ext_from_json(measured)
                passed = close_enough(value, float(truth), settings.RELATIVE_TOL, floor)
            checks.append(
                CheckResult(
                    name=f"truth:{key}",
                    passed=passed,
                    detail=f"expected {truth}, measured {measured}",
                    measured={"expected": truth, "measured": measured},
                )
            )

        entry = self._catalog_entry(loaded)
        for item in (entry or {}).get("point_truths", []):
            f = loaded.target
            if not isinstance(f, ProbeFunction):
                continue
            if item["quantity"] == "local_slope":
                value = self.slope_service.local_slope(f, item["at"]).value
            else:
                value = self.slope_service.nonlocal_slope(f, item["at"]).value
            passed = close_enough(value, item["value"], settings.RELATIVE_TOL, floor)
            checks.append(
                CheckResult(
                    name=f"truth:{item['quantity']}@{item['at']}",
                    passed=passed,
                    detail=f"expected {item['value']}, measured {ext_to_json(value)}",
                    measured={"expected": item["value"], "measured": value},
                )
            )
        for check in checks:
            if not check.passed:
                loggers["main"].warning(f"{loaded.name}: {check.name} {check.detail}")
        return checks

    def _catalog_entry(self, loaded: LoadedSpec) -> Optional[Dict[str, Any]]:
        name = loaded.source.split(":", 1)[-1]
        if not loaded.source.startswith("catalog:"):
            return None
        return self.catalog_service.get(name)

    @staticmethod
    def verdict(body: Dict[str, Any]) -> Dict[str, Any]:
        criteria = body.get("criteria") or {}
        return {
            "criteria": criteria.get("criteria"),
            "certified": criteria.get("certified"),
        }


def _dig(node: Any, path) -> Any:
    for key in path:
        if isinstance(key, int):
            if not isinstance(node, list) or len(node) <= key:
                return None
        elif not isinstance(node, dict) or key not in node:
            return None
        node = node[key]
    return node
