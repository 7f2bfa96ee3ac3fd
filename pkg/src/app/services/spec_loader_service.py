import json
import os
import re
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from src.app.config.settings import settings
from src.app.models.domain.analysis_models import AnalysisTarget, LoadedSpec
from src.app.models.domain.function_models import ProbeFunction
from src.app.models.domain.limit_models import RadiusSchedule
from src.app.models.domain.space_models import EuclideanSpace, FiniteMetricSpace
from src.app.models.schemas.analysis_spec_schema import (
    AnalysisSpec,
    SpaceSpec,
)
from src.app.services.catalog_service import CatalogService
from src.app.services.core_numerics_service import default_schedule
from src.app.services.function_service import FunctionService
from src.app.services.mapping_service import MappingService
from src.app.services.space_service import SpaceService
from src.app.utils.error_handler import SpecSchemaError
from src.app.utils.ext_real_utils import ext_from_json
from src.app.utils.logging_util import loggers

CATALOG_PREFIX = "catalog:"


class SpecLoaderService:
    """Reads analysis specs (files, request bodies, catalog references) and builds them."""

    def __init__(
        self,
        catalog_service: Optional[CatalogService] = None,
        function_service: Optional[FunctionService] = None,
        mapping_service: Optional[MappingService] = None,
        space_service: Optional[SpaceService] = None,
    ):
        self.space_service = space_service or SpaceService()
        self.function_service = function_service or FunctionService(
            space_service=self.space_service
        )
        self.catalog_service = catalog_service or CatalogService(
            self.space_service, self.function_service
        )
        self.mapping_service = mapping_service or MappingService(
            space_service=self.space_service
        )

    # ------------------------------------------------------------------
    # parsing

    def read_source(
        self, source: str
    ) -> Tuple[Any, Optional[str], Dict[str, Any]]:
        """Return (raw dict, original text or None, truths) for a path or catalog ref."""
        if source.startswith(CATALOG_PREFIX):
            entry = self.catalog_service.get(source[len(CATALOG_PREFIX) :])
            return entry["spec"], None, entry["truths"]
        if not os.path.isfile(source):
            raise SpecSchemaError(f"spec file not found: {source}")
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise SpecSchemaError(
                f"{source} is not valid JSON",
                [f"line {e.lineno}, column {e.colno}: {e.msg}"],
            ) from e
        truths: Dict[str, Any] = {}
        # a catalog entry printed by `catalog --format json` is accepted as is
        if isinstance(data, dict) and "spec" in data and "kind" not in data:
            truths = data.get("truths", {})
            data = data["spec"]
        return data, text, truths

    def parse(self, data: Any, text: Optional[str] = None) -> AnalysisSpec:
        if not isinstance(data, dict):
            raise SpecSchemaError("an analysis spec must be a JSON object")
        try:
            return AnalysisSpec.model_validate(data)
        except ValidationError as e:
            diagnostics = [self._diagnostic(err, text) for err in e.errors()]
            loggers["main"].warning(
                f"Spec {data.get('name', '?')!r} failed validation: {diagnostics}"
            )
            raise SpecSchemaError(
                f"spec {data.get('name', '?')!r} failed validation", diagnostics
            ) from e

    @staticmethod
    def _diagnostic(err: Dict[str, Any], text: Optional[str]) -> str:
        loc = [str(p) for p in err.get("loc", ())]
        field = ".".join(loc) or "<root>"
        line = None
        keys = [p for p in loc if not p.isdigit()]
        if text and keys:
            match = re.search(rf'"{re.escape(keys[-1])}"\s*:', text)
            if match:
                line = text.count("\n", 0, match.start()) + 1
        prefix = f"line {line}: " if line else ""
        return f"{prefix}{field}: {err.get('msg', 'invalid')}"

    # ------------------------------------------------------------------
    # loading

    def load(
        self,
        source: str,
        at: Optional[Sequence[float]] = None,
        schedule: Optional[RadiusSchedule] = None,
        tol: Optional[float] = None,
        gamma: Optional[float] = None,
    ) -> LoadedSpec:
        data, text, truths = self.read_source(source)
        spec = self.parse(data, text)
        return self.build(spec, source, at, schedule, tol, gamma, truths)

    def build(
        self,
        spec: AnalysisSpec,
        source: str = "<request>",
        at: Optional[Sequence[float]] = None,
        schedule: Optional[RadiusSchedule] = None,
        tol: Optional[float] = None,
        gamma: Optional[float] = None,
        truths: Optional[Dict[str, Any]] = None,
    ) -> LoadedSpec:
        if at is not None:
            spec = spec.model_copy(update={"at": [float(v) for v in at]})
        try:
            target = self._build_target(spec)
        except SpecSchemaError:
            raise
        except ValueError as e:
            raise SpecSchemaError(
                f"spec {spec.name!r} could not be built", [str(e)]
            ) from e
        if schedule is None:
            schedule = (
                RadiusSchedule(**spec.schedule.model_dump())
                if spec.schedule
                else default_schedule()
            )
        loggers["main"].info(
            f"Loaded {spec.kind} spec {spec.name!r} from {source}"
        )
        return LoadedSpec(
            spec=spec,
            target=target,
            schedule=schedule,
            tol=tol or spec.tol or settings.DEFAULT_TOL,
            gamma=gamma or spec.gamma or settings.CRITERIA_GAMMA,
            source=source,
            truths=dict(truths or {}),
        )

    def _build_target(self, spec: AnalysisSpec) -> AnalysisTarget:
        definition = spec.definition
        if spec.kind == "function":
            return self._function(spec.name, spec.space, definition, spec.base_point)

        if spec.kind == "two_var_function":
            if definition.type == "embed":
                inner = definition.function
                f = self._function(
                    spec.name, inner.space, inner.definition, inner.base_point
                )
                return self.function_service.embed_tilde(f)
            return self.catalog_service.two_var_formula(
                definition.formula,
                spec.name,
                spec.space.norm_kind,
                spec.space.spacing,
                spec.space.half_width,
                rho=spec.rho or 1.0,
            )

        if definition.type == "finite_relation":
            return self.mapping_service.finite_relation(
                spec.name,
                self.finite_space(definition.domain),
                self.finite_space(definition.range),
                definition.graph,
                xbar=int(spec.base_point[0]) if spec.base_point else 0,
                ybar=int(spec.base_value[0]) if spec.base_value else 0,
            )
        self._require_euclidean(spec.space)
        return self.catalog_service.mapping_formula(
            definition.formula,
            spec.name,
            spec.space.dim,
            spec.space.norm_kind,
            spec.space.spacing,
            spec.space.half_width,
            xbar=spec.base_point,
            ybar=spec.base_value,
        )

    def _function(
        self,
        name: str,
        space: SpaceSpec,
        definition: Any,
        base_point: Optional[List[float]],
    ) -> ProbeFunction:
        kind = definition.type
        if kind == "table":
            values = [ext_from_json(v) for v in definition.values]
            return self.function_service.finite_function(
                name,
                self.finite_space(space),
                values,
                base_index=int(base_point[0]) if base_point else 0,
            )
        base = float(base_point[0]) if base_point else 0.0
        if kind == "piecewise_linear":
            return self.function_service.piecewise_linear(
                name,
                definition.breakpoints,
                definition.values,
                spacing=space.spacing,
                half_width=space.half_width,
                base_point=base,
            )
        if kind == "quadratic":
            return self.function_service.quadratic(
                name,
                definition.coefficients,
                spacing=space.spacing,
                half_width=space.half_width,
                base_point=base,
            )
        self._require_euclidean(space)
        return self.catalog_service.function_formula(
            definition.formula,
            name,
            space.dim,
            space.norm_kind,
            space.spacing,
            space.half_width,
            base_point=base_point,
        )

    @staticmethod
    def _require_euclidean(space: SpaceSpec) -> None:
        if space.type != "euclidean":
            raise SpecSchemaError(
                "built-in formulas need a Euclidean space",
                [f"space.type: expected 'euclidean', got {space.type!r}"],
            )

    def finite_space(self, space: SpaceSpec) -> FiniteMetricSpace:
        if space.type == "finite":
            return FiniteMetricSpace(dist=space.distances, labels=space.labels)
        if space.type == "points":
            dim = len(space.points[0])
            coords = self.space_service.finite_space_from_points(
                EuclideanSpace(dim, space.norm_kind), space.points
            )
            if space.labels:
                coords.labels = list(space.labels)
            return coords
        raise SpecSchemaError(
            "expected a finite space",
            [f"space.type: expected 'finite' or 'points', got {space.type!r}"],
        )
