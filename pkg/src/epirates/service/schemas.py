"""Pydantic request/response models for the HTTP API.

The service is stateless: requests carry the data arrays themselves, never
file paths, so the same payloads work for a remote server and for the
in-process client the CLI uses.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class SeriesPayload(BaseModel):
    times: list[float]
    values: list[float]
    label: str = "incidence"
    time_unit: str = "days"


class GridSpec(BaseModel):
    start: float
    stop: float
    step: float = Field(gt=0)


class SmoothRequest(BaseModel):
    series: SeriesPayload
    bandwidth_multiplier: float = 1.0
    grid: GridSpec


class SmoothResponse(BaseModel):
    grid: list[float]
    values: list[float]
    bandwidth: float
    resolved_config: dict


class GammaSummaryRequest(BaseModel):
    shape: float = Field(gt=0)
    scale: float = Field(gt=0)


class GammaSummaryResponse(BaseModel):
    mean: float
    median: float
    mode: float | None
    variance: float


class SurvivalRequest(BaseModel):
    cumulative_recoveries_end: float = Field(ge=0)
    cumulative_deaths_end: float = Field(ge=0)


class SurvivalResponse(BaseModel):
    survival_probability: float


class FitRequest(BaseModel):
    incidence: SeriesPayload
    observed: SeriesPayload
    target: str = "recovery"
    survival_probability: float
    bandwidth_multiplier: float = 1.0
    shape_max: float | None = None
    scale_max: float | None = None
    shape_step: float | None = None
    scale_step: float | None = None
    mode_lower: float | None = None
    mode_upper: float | None = None
    quadrature_step: float | None = None
    workers: int | None = None


class CurvePayload(BaseModel):
    times: list[float]
    values: list[float]


class FitResponse(BaseModel):
    target: str
    optimal: dict
    sse: float
    survival_probability: float
    summary: dict
    surface_minima: list[dict]
    predicted: CurvePayload
    cumulative_predicted: CurvePayload
    observed: CurvePayload
    resolved_config: dict


class BaselineCompareRequest(BaseModel):
    fitted_shape: float = Field(gt=0)
    fitted_scale: float = Field(gt=0)
    target: str = "recovery"
    survival_probability: float
    tendencies: list[str] = ["mean", "median", "mode"]
    survey_sample_size: int | None = None
    incidence: SeriesPayload
    observed: SeriesPayload
    active: SeriesPayload
    bandwidth_multiplier: float = 1.0
    quadrature_step: float | None = None


class MetricsRequest(BaseModel):
    r0: float | None = None
    recovery_shape: float | None = None
    recovery_scale: float | None = None
    death_shape: float | None = None
    death_scale: float | None = None
    survival_probability: float | None = None
    beta: float | None = None
    beta_table_eta: list[float] | None = None
    beta_table_values: list[float] | None = None
    susceptible_initial: float | None = None
    population: float | None = None
    latent_period: float = 0.0
    quadrature_step: float | None = None


class MetricsResponse(BaseModel):
    r0: float
    hit: float
    resolved_config: dict


class GammaSpec(BaseModel):
    shape: float = Field(gt=0)
    scale: float = Field(gt=0)


class SimulateRequest(BaseModel):
    population: float = Field(gt=0)
    susceptible0: float = Field(gt=0)
    infected0: float = Field(ge=0)
    beta: float = Field(ge=0)
    mode: str = "distributed"
    step: float = 0.1
    horizon: float = 200.0
    recovery_rate: float | None = None
    death_rate: float | None = None
    recovery_kernel: GammaSpec | None = None
    death_kernel: GammaSpec | None = None
    survival_probability: float | None = None
    export: str | None = None           # daily | weekly
    noise_seed: int | None = None
    noise_scale: float = 0.0


class SeriesOut(BaseModel):
    times: list[float]
    values: list[float]
    label: str


class SimulateResponse(BaseModel):
    grid: list[float]
    S: list[float]
    I: list[float]
    R: list[float]
    D: list[float]
    J: list[float]
    R_new: list[float]
    D_new: list[float]
    exported: dict[str, SeriesOut] | None
    resolved_config: dict
