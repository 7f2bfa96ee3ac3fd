from dataclasses import dataclass, field
from typing import Any, Dict, Union

from src.app.models.domain.function_models import ProbeFunction, TwoVarFunction
from src.app.models.domain.limit_models import RadiusSchedule
from src.app.models.domain.mapping_models import SetValuedMapping
from src.app.models.schemas.analysis_spec_schema import AnalysisSpec

AnalysisTarget = Union[ProbeFunction, TwoVarFunction, SetValuedMapping]


@dataclass(eq=False)
class LoadedSpec:
    """A validated spec together with the object it describes."""

    spec: AnalysisSpec
    target: AnalysisTarget
    schedule: RadiusSchedule
    tol: float
    gamma: float
    source: str
    truths: Dict[str, Any] = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return self.spec.kind

    @property
    def name(self) -> str:
        return self.spec.name
