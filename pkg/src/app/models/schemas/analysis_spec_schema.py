from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.app.config.settings import settings
from src.app.models.domain.space_models import NormKind

FUNCTION_FORMULAS = ("abs", "positive_part", "dist_to_halfline")
TWO_VAR_FORMULAS = ("sum_abs",)
MAPPING_FORMULAS = ("identity", "halfline", "parabola", "diagonal")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SpaceSpec(_Strict):
    type: Literal["euclidean", "finite", "points"] = "euclidean"
    dim: int = Field(1, ge=1, le=3)
    norm_kind: NormKind = NormKind.L2
    spacing: float = Field(settings.GRID_SPACING, gt=0)
    half_width: float = Field(settings.GRID_HALF_WIDTH, gt=0)
    distances: Optional[List[List[float]]] = None
    points: Optional[List[List[float]]] = None
    labels: Optional[List[str]] = None

    @model_validator(mode="after")
    def check_type_fields(self):
        if self.type == "finite" and not self.distances:
            raise ValueError("finite spaces need a 'distances' matrix")
        if self.type == "points" and not self.points:
            raise ValueError("point spaces need a 'points' list")
        return self

    @property
    def is_finite(self) -> bool:
        return self.type in ("finite", "points")


class ScheduleSpec(_Strict):
    rho0: float = Field(..., gt=0)
    gamma: float = Field(..., gt=0, lt=1)
    steps: int = Field(..., ge=2)


class FormulaDefinition(_Strict):
    type: Literal["formula"]
    formula: str = Field(..., description="Name of a built-in formula")


class PiecewiseLinearDefinition(_Strict):
    type: Literal["piecewise_linear"]
    breakpoints: List[float] = Field(..., min_length=2)
    values: List[float] = Field(..., min_length=2)

    @model_validator(mode="after")
    def check_table(self):
        if len(self.breakpoints) != len(self.values):
            raise ValueError("breakpoints and values must have the same length")
        if any(b <= a for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        return self


class QuadraticDefinition(_Strict):
    type: Literal["quadratic"]
    coefficients: List[float] = Field(..., min_length=3, max_length=3)


class TableDefinition(_Strict):
    type: Literal["table"]
    values: List[Union[float, Literal["inf"]]] = Field(..., min_length=1)


class FunctionBody(_Strict):
    """Function part of an embed definition."""

    space: SpaceSpec = Field(default_factory=SpaceSpec)
    definition: Annotated[
        Union[
            FormulaDefinition,
            PiecewiseLinearDefinition,
            QuadraticDefinition,
            TableDefinition,
        ],
        Field(discriminator="type"),
    ]
    base_point: Optional[List[float]] = None


class EmbedDefinition(_Strict):
    type: Literal["embed"]
    function: FunctionBody


class FiniteRelationDefinition(_Strict):
    type: Literal["finite_relation"]
    domain: SpaceSpec
    range: SpaceSpec
    graph: List[Tuple[int, int]] = Field(..., min_length=1)

    @field_validator("domain", "range")
    def validate_finite(cls, v):
        if not v.is_finite:
            raise ValueError("finite relations need finite or point spaces")
        return v


Definition = Annotated[
    Union[
        FormulaDefinition,
        PiecewiseLinearDefinition,
        QuadraticDefinition,
        TableDefinition,
        EmbedDefinition,
        FiniteRelationDefinition,
    ],
    Field(discriminator="type"),
]

_ALLOWED = {
    "function": ("formula", "piecewise_linear", "quadratic", "table"),
    "two_var_function": ("formula", "embed"),
    "mapping": ("formula", "finite_relation"),
}
_FORMULAS = {
    "function": FUNCTION_FORMULAS,
    "two_var_function": TWO_VAR_FORMULAS,
    "mapping": MAPPING_FORMULAS,
}


class AnalysisSpec(_Strict):
    kind: Literal["function", "two_var_function", "mapping"]
    name: str = Field(..., min_length=1)
    space: SpaceSpec = Field(default_factory=SpaceSpec)
    definition: Definition
    base_point: Optional[List[float]] = None
    base_value: Optional[List[float]] = None
    at: Optional[List[float]] = None
    at_y: Optional[List[float]] = None
    rho: Optional[float] = Field(None, gt=0)
    schedule: Optional[ScheduleSpec] = None
    tol: Optional[float] = Field(None, gt=0)
    gamma: Optional[float] = Field(None, gt=0)

    @field_validator("name")
    def validate_name(cls, v):
        if not v.strip():
            raise ValueError("name cannot be empty or whitespace only")
        return v.strip()

    @model_validator(mode="after")
    def check_definition_for_kind(self):
        kind, definition = self.kind, self.definition
        if definition.type not in _ALLOWED[kind]:
            raise ValueError(
                f"definition type {definition.type!r} is not valid for kind "
                f"{kind!r}; expected one of {list(_ALLOWED[kind])}"
            )
        if definition.type == "formula" and definition.formula not in _FORMULAS[kind]:
            raise ValueError(
                f"unknown {kind} formula {definition.formula!r}; expected one of "
                f"{list(_FORMULAS[kind])}"
            )
        if definition.type == "table" and not self.space.is_finite:
            raise ValueError("table definitions need a finite space")
        if definition.type in ("piecewise_linear", "quadratic") and (
            self.space.type != "euclidean" or self.space.dim != 1
        ):
            raise ValueError(f"{definition.type} definitions live on the real line")
        return self


class AnalyzeFileRequest(BaseModel):
    spec_path: str = Field(..., description="Spec file path or catalog:<name>")
    at: Optional[List[float]] = None
    schedule: Optional[ScheduleSpec] = None
    tol: Optional[float] = Field(None, gt=0)
    gamma: Optional[float] = Field(None, gt=0)

    @field_validator("spec_path")
    def validate_spec_path(cls, v):
        if not v or not v.strip():
            raise ValueError("Spec path cannot be empty or whitespace only")
        return v.strip()


class VerifyRequest(BaseModel):
    filter: Optional[str] = Field(None, description="Substring filter on check names")
    seed: Optional[int] = Field(None, ge=0)
