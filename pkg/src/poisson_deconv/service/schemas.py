"""Request/response models for the estimation service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class SimulateRequest(BaseModel):
    scenario: str
    n: int = Field(ge=1)
    a: float = Field(gt=0)
    seed: int


class SimulateResponse(BaseModel):
    scenario: str
    n: int
    a: float
    t: float
    seed: int
    n_plus: int
    points: list[float]


class CurvePayload(BaseModel):
    grid: list[float]
    values: list[float]
    bandwidth: Optional[float] = None
    variant: str
    kernel: str = ""


class SelectionPayload(BaseModel):
    chosen_h: float
    bandwidths: list[float]
    a_values: list[float]
    penalty_values: list[float]
    total_values: list[float]
    eta_used: float | list[float]
    gamma_used: Optional[float] = None
    degenerate: bool
    n_plus: int


class EstimateRequest(BaseModel):
    points: list[float]
    n: int = Field(ge=1)
    a: float = Field(gt=0)
    t: float = Field(gt=0)
    h: Optional[float] = None
    tune: Optional[Literal["fixed-eta", "adaptive-gamma"]] = None
    eta: float = -0.6
    gamma: float = 0.01
    eta_grid: Optional[list[float]] = None
    grid_points: int = Field(default=30, ge=1)
    m: Optional[int] = None
    kernel: str = "epanechnikov"
    variant: Literal["tilde", "hat", "check"] = "tilde"
    clip_nonnegative: bool = False


class EstimateResponse(BaseModel):
    curve: CurvePayload
    selection: Optional[SelectionPayload] = None


class SelectRequest(BaseModel):
    points: list[float]
    n: int = Field(ge=1)
    a: float = Field(gt=0)
    t: float = Field(gt=0)
    mode: Literal["fixed-eta", "adaptive-gamma"] = "adaptive-gamma"
    eta: float = -0.6
    gamma: float = 0.01
    eta_grid: Optional[list[float]] = None
    grid_points: int = Field(default=30, ge=1)
    m: Optional[int] = None
    kernel: str = "epanechnikov"


class SelectResponse(BaseModel):
    selection: SelectionPayload


class ScenarioSpec(BaseModel):
    label: str
    n: int = Field(ge=2)
    a: float = Field(gt=0)


class BenchmarkRequest(BaseModel):
    scenarios: Optional[list[ScenarioSpec]] = None
    paper_suite: bool = False
    methods: list[str] = ["fixed_eta", "adaptive_gamma", "oracle"]
    replicates: int = Field(default=30, ge=1)
    seed: int
    eta: float = -0.6
    gamma: float = 0.01
    grid_points: int = Field(default=30, ge=1)
    m: Optional[int] = None
    kernel: str = "epanechnikov"
    workers: int = Field(default=1, ge=1)


class BenchmarkResponse(BaseModel):
    reports: list[dict]


class IntervalIn(BaseModel):
    chrom: Optional[str] = None
    start: float = Field(ge=0)
    end: float


class DeconvolveRequest(BaseModel):
    intervals: list[IntervalIn]
    n: Optional[int] = None
    t: Optional[float] = None
    a_convention: Literal["half", "full"] = "half"
    tune: Literal["fixed-eta", "adaptive-gamma"] = "adaptive-gamma"
    eta: float = -0.6
    gamma: float = 0.01
    eta_grid: Optional[list[float]] = None
    grid_points: int = Field(default=30, ge=1)
    m: Optional[int] = None
    kernel: str = "epanechnikov"
    naive: bool = False
    clip_nonnegative: bool = False


class DeconvolveResponse(BaseModel):
    a_estimate: float
    n_used: int
    t_used: float
    curve: CurvePayload
    selection: SelectionPayload
    naive_curve: Optional[CurvePayload] = None
