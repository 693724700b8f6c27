"""Request and response models of the HTTP API.

Exact quantities (heights, measures, correlations, margins) travel as
canonical decimal or fraction strings, never as floats, so clients in any
language can round-trip them losslessly; JSON numbers appear only where the
value really is a machine float (density samples) or a small index.

Construction specs and run configs arrive as plain JSON mappings in the
same grammar the YAML files use; the server validates them with the same
parser, so error messages match the CLI's.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


class ApiModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


# Requests


class SpecEnvelope(ApiModel):
    spec: dict


class HeightsRequest(SpecEnvelope):
    stages: int = Field(ge=1)


class SidonRequest(SpecEnvelope):
    stages: int = Field(ge=1)
    pair_cap: int | None = Field(default=None, ge=1)


class ClassifyRequest(SpecEnvelope):
    powers: list[int] = Field(min_length=1)
    claims: list[tuple[int, str]] | None = None


class InferAlphaRequest(ApiModel):
    spec: dict | None = None
    blocks: list[tuple[int, int]] | None = None
    max_denominator: int = Field(default=64, ge=1)
    block_count: int = Field(default=3, ge=1)


class OrbitRequest(SpecEnvelope):
    start_stage: int = Field(default=1, ge=1)
    start_level: int = Field(default=0, ge=0)
    steps: int = Field(ge=1)
    direction: Literal["forward", "backward"] = "forward"
    digits: str | list[int] = "seeded"
    seed: int = Field(default=0, ge=0)
    max_stage: int | None = Field(default=None, ge=1)


class CorrelateRequest(SpecEnvelope):
    stage: int = Field(default=1, ge=1)
    max_lag: int = Field(ge=0)
    stage_cap: int | None = Field(default=None, ge=1)
    size_cap: int | None = Field(default=None, ge=1)


class SpectrumRequest(CorrelateRequest):
    power: int = Field(ge=1)
    grid: int = Field(ge=1)
    force: bool = False
    quantile: float = Field(default=0.01, gt=0.0, le=1.0)


class ReturnStatsRequest(SpecEnvelope):
    stage: int = Field(ge=1)
    levels: list[int] = Field(min_length=1)
    power: int = Field(ge=1)
    max_lag: int = Field(ge=0)
    stage_cap: int | None = Field(default=None, ge=1)
    size_cap: int | None = Field(default=None, ge=1)


class RunRequest(ApiModel):
    config: dict


# Responses


class HealthResponse(ApiModel):
    status: str
    version: str


class FamiliesResponse(ApiModel):
    families: list[str]


class CanonicalSpecResponse(ApiModel):
    canonical: str
    sha256: str


class StageRow(ApiModel):
    stage: int
    height: str
    width: str
    measure: str
    cut: int | None
    spacers: list[str] | None


class HeightsResponse(ApiModel):
    stages: list[StageRow]


class WindowRef(ApiModel):
    source: int
    target: int


class SidonWitness(ApiModel):
    shift: str
    first: WindowRef
    second: WindowRef


class SidonVerdictRow(ApiModel):
    stage: int
    is_sidon: bool
    margin: str | None
    witness: SidonWitness | None


class SidonResponse(ApiModel):
    verdicts: list[SidonVerdictRow]
    first_failure: int | None


class EvidenceRow(ApiModel):
    label: str
    exponent: str
    margin: str
    diverges: bool
    implication: str


class ClassifyRow(ApiModel):
    power: int
    alpha: str
    conservative: bool
    spectral: str
    rule: str
    evidence: list[EvidenceRow]
    annotations: list[str]


class ClassifyResponse(ApiModel):
    reports: list[ClassifyRow]
    discrepancies: list[str]


class InferAlphaResponse(ApiModel):
    alpha: str | None
    blocks: list[tuple[str, str]]
    reason: str | None


class OrbitPointRow(ApiModel):
    step: int
    stage: int
    level: str


class OrbitResponse(ApiModel):
    points: list[OrbitPointRow]


class CorrelateResponse(ApiModel):
    base_stage: int
    max_lag: int
    final_stage: int
    stabilized_at: int | None
    values: list[str]
    unstable_lags: list[int]


class TrendCheckpoint(ApiModel):
    lag: int
    partial_sum: str


class TrendInfo(ApiModel):
    label: str
    exponent: int
    checkpoints: list[TrendCheckpoint]
    slopes: list[str]


class DensityInfo(ApiModel):
    grid_size: int
    mean: float
    minimum: float
    maximum: float
    values: list[float]


class SpectrumResponse(ApiModel):
    power: int
    max_lag: int
    stable: bool
    density: DensityInfo
    trend: TrendInfo
    power_sum_d: str
    power_sum_2d: str
    concentration: float
    concentration_quantile: float


class ReturnStatsResponse(ApiModel):
    power: int
    max_lag: int
    stage: int
    measure: str
    proportions: list[str]
    unstable_lags: list[int]


class RunResponse(ApiModel):
    files: dict[str, str]
    failed: list[str]


class ErrorInfo(ApiModel):
    type: str
    message: str


class ErrorResponse(ApiModel):
    error: ErrorInfo
