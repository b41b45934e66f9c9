from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import Any, Dict, List, Literal, Optional
from datetime import datetime

from eigenwkb.config import settings
from eigenwkb.utils.codec import parse_point

# A complex scalar on the wire: [re, im] as Fraction or decimal strings
ScalarPair = List[str]


class PolyModel(BaseModel):
    coeffs: List[ScalarPair] = Field(default_factory=list, description="lowest degree first")

    @field_validator("coeffs")
    @classmethod
    def pairs_only(cls, v):
        for pair in v:
            if len(pair) != 2:
                raise ValueError("each coefficient is a [re, im] pair")
        return v


class OperatorModel(BaseModel):
    M: int
    rho: List[PolyModel]


class ViolationModel(BaseModel):
    k: int
    condition: str
    detail: str


class SolveRequest(BaseModel):
    operator: OperatorModel
    n: int = Field(ge=0)
    mode: Literal["rational", "float"] = "rational"
    bits: Optional[int] = Field(default=None, ge=16)


class SolveResponse(BaseModel):
    n: int
    eigenvalue: ScalarPair
    Q: PolyModel
    epsilon: Optional[ScalarPair] = None
    processing_time: float


class PhiRequest(BaseModel):
    operator: OperatorModel
    z: str = Field(description="evaluation point as 'RE,IM'")
    order: Literal[0, 1] = 0
    bits: Optional[int] = Field(default=None, ge=16)

    @field_validator("z")
    @classmethod
    def parseable_point(cls, v):
        parse_point(v)
        return v


class PhiResponse(BaseModel):
    order: int
    value: ScalarPair
    error: str
    processing_time: float


class SeriesRequest(BaseModel):
    operator: OperatorModel
    order: int = Field(default=settings.SERIES_ORDER, ge=0, le=64)


class SeriesResponse(BaseModel):
    order: int
    gamma: List[ScalarPair]
    q: List[List[ScalarPair]]
    h: List[ScalarPair]


class ValidateRequest(BaseModel):
    operator: OperatorModel


class ValidateResponse(BaseModel):
    valid: bool
    violations: List[ViolationModel] = []


class HealthResponse(BaseModel):
    status: str
    version: str
    timestamp: datetime


# --- run configuration -------------------------------------------------------

class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    label: Optional[str] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    n_grid: List[int] = Field(default_factory=list)
    z_grid: List[str] = Field(default_factory=list)
    bits: Optional[int] = Field(default=None, ge=16)
    order: int = Field(default=settings.SERIES_ORDER, ge=0)
    experiments: List[str] = Field(default_factory=lambda: ["ratio", "strong", "c1", "cauchy", "zeros"])

    @field_validator("name")
    @classmethod
    def known_scenario(cls, v):
        if v not in settings.SCENARIOS:
            raise ValueError(f"unknown scenario '{v}'; expected one of {settings.SCENARIOS}")
        return v

    @field_validator("n_grid")
    @classmethod
    def nonnegative_degrees(cls, v):
        if any(n < 0 for n in v):
            raise ValueError("degrees must be nonnegative")
        return v

    @field_validator("z_grid")
    @classmethod
    def parseable_points(cls, v):
        for text in v:
            parse_point(text)
        return v

    @field_validator("experiments")
    @classmethod
    def known_experiments(cls, v):
        unknown = [e for e in v if e not in settings.EXPERIMENTS]
        if unknown:
            raise ValueError(f"unknown experiments {unknown}; expected a subset of {settings.EXPERIMENTS}")
        return v


class Thresholds(BaseModel):
    """Caps on the largest rel_error at the top degree of each experiment,
    and on the Hausdorff distance between zeros and hull for ``zeros``;
    unset entries are not checked."""
    model_config = ConfigDict(extra="forbid")

    ratio: Optional[float] = None
    strong: Optional[float] = None
    c1: Optional[float] = None
    cauchy: Optional[float] = None
    cauchy_j2: Optional[float] = None
    zeros: Optional[float] = None
    nth_root: Optional[float] = None


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenarios: List[ScenarioConfig] = Field(default_factory=list)
    bits: Optional[int] = Field(default=None, ge=16)
    output_dir: str = "results"
    thresholds: Thresholds = Field(default_factory=Thresholds)
