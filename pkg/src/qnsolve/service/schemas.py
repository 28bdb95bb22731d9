"""Pydantic request/response models for the HTTP service."""
from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from ..solver import SolverConfig

Method = Literal["qn1", "qn2", "qn3", "qn4"]


class SolverSettings(BaseModel):
    """Solver parameters; defaults match the library defaults."""

    tol: float = Field(default=1e-10, gt=0.0)
    max_iter: int = Field(default=500, ge=1)
    max_feval: int = Field(default=2000, ge=1)
    sigma: float = Field(default=0.1, gt=0.0, lt=1.0)
    sigma1: float = Field(default=1e-3, gt=0.0)
    sigma2: float = Field(default=1e-3, gt=0.0)
    rho: float = Field(default=0.9, gt=0.0, lt=1.0)
    beta: float = Field(default=0.1, gt=0.0, lt=1.0)
    theta_bar: float = Field(default=0.5, gt=0.0, lt=1.0)
    lambda_min: float = Field(default=1e-12, gt=0.0)
    memory_depth: int | None = Field(default=None, ge=0)
    b0: Literal["identity", "scaled-identity", "finite-difference"] = "identity"
    theta_fixed: float | None = None

    def to_config(self) -> SolverConfig:
        return SolverConfig(**self.model_dump())


class SolveRequest(BaseModel):
    problem: str
    dim: int = Field(ge=1)
    method: Method = "qn1"
    settings: SolverSettings = SolverSettings()
    include_trace: bool = False


class IterationModel(BaseModel):
    k: int
    f_norm: float
    step_norm: float
    lam: float
    theta: float | None
    memory_size: int
    full_step: bool
    eta: float
    update_skipped: bool


class SolveResponse(BaseModel):
    status: str
    x: list[float]
    f_norm: float | None
    f0_norm: float | None
    iterations: int
    fevals: int
    restarts: int
    trace: list[IterationModel] | None = None


class ProblemInfo(BaseModel):
    name: str
    dims: list[int]
    known_root: bool


class ProblemRef(BaseModel):
    name: str
    dim: int = Field(ge=1)


class BenchRequest(BaseModel):
    methods: list[Method] = Field(default=["qn1", "qn2", "qn3", "qn4"])
    problems: list[ProblemRef] | None = None
    settings: SolverSettings = SolverSettings()
    jobs: int = Field(default=1, ge=1)
    tau_grid: list[float] | None = None


class RunRecordModel(BaseModel):
    problem: str
    n: int
    method: str
    status: str
    iterations: int
    fevals: int
    f_norm_final: float | None
    wall_time_ms: float


class ProfileModel(BaseModel):
    taus: list[float]
    methods: list[str]
    values: dict[str, list[float]]


class BenchResponse(BaseModel):
    records: list[RunRecordModel]
    profile_iterations: ProfileModel
    profile_fevals: ProfileModel
