"""HTTP service exposing the solver and the benchmark harness.

Residual norms that are not finite (a residual evaluation blew up at the
starting point) are serialized as null, since JSON has no Inf.
"""
from __future__ import annotations

import math

from fastapi import FastAPI, HTTPException

from .. import bench
from ..exceptions import (
    DimensionNotSupportedError,
    InvalidSuiteError,
    UnknownProblemError,
)
from ..problems import admissible_dims, problem_names, registry_lookup
from ..solver import METHODS, solve
from .schemas import (
    BenchRequest,
    BenchResponse,
    IterationModel,
    ProblemInfo,
    ProfileModel,
    RunRecordModel,
    SolveRequest,
    SolveResponse,
)

app = FastAPI(title="qnsolve service", version="0.1.0")


def _finite(v: float) -> float | None:
    return float(v) if math.isfinite(v) else None


def _lookup(name: str, dim: int):
    try:
        return registry_lookup(name, dim)
    except UnknownProblemError as exc:
        raise HTTPException(status_code=404, detail=str(exc))
    except DimensionNotSupportedError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.get("/health")
def health():
    return {"status": "ok"}


@app.get("/methods")
def methods():
    return list(METHODS)


@app.get("/problems", response_model=list[ProblemInfo])
def problems():
    infos = []
    for name in problem_names():
        dims = list(admissible_dims(name))
        spec = registry_lookup(name, dims[0])
        infos.append(
            ProblemInfo(name=name, dims=dims, known_root=spec.known_root is not None)
        )
    return infos


@app.post("/solve", response_model=SolveResponse)
def run_solve(req: SolveRequest):
    spec = _lookup(req.problem, req.dim)
    try:
        report = solve(spec, req.method, req.settings.to_config())
    except ValueError as exc:
        # bad parameter combinations caught at solve time, e.g. a memory
        # depth outside the method's admissible range
        raise HTTPException(status_code=422, detail=str(exc))
    trace = None
    if req.include_trace:
        trace = [
            IterationModel(
                k=r.k,
                f_norm=r.f_norm,
                step_norm=r.step_norm,
                lam=r.lam,
                theta=r.theta,
                memory_size=r.memory_size,
                full_step=r.full_step,
                eta=r.eta,
                update_skipped=r.update_skipped,
            )
            for r in report.trace
        ]
    return SolveResponse(
        status=report.status,
        x=[float(v) for v in report.x],
        f_norm=_finite(report.f_norm),
        f0_norm=_finite(report.f0_norm),
        iterations=report.iterations,
        fevals=report.fevals,
        restarts=report.restarts,
        trace=trace,
    )


@app.post("/bench", response_model=BenchResponse)
def run_bench(req: BenchRequest):
    suite = [(p.name, p.dim) for p in req.problems] if req.problems is not None else None
    if suite is not None:
        for name, dim in suite:
            _lookup(name, dim)
    try:
        records = bench.run_suite(
            methods=list(req.methods),
            problems=suite,
            config=req.settings.to_config(),
            jobs=req.jobs,
        )
        tables = {
            metric: bench.performance_profile(records, metric, req.tau_grid)
            for metric in bench.PROFILE_METRICS
        }
    except (InvalidSuiteError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return BenchResponse(
        records=[
            RunRecordModel(
                problem=r.problem,
                n=r.n,
                method=r.method,
                status=r.status,
                iterations=r.iterations,
                fevals=r.fevals,
                f_norm_final=_finite(r.f_norm_final),
                wall_time_ms=r.wall_time_ms,
            )
            for r in records
        ],
        profile_iterations=ProfileModel(**tables["iterations"].__dict__),
        profile_fevals=ProfileModel(**tables["fevals"].__dict__),
    )


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(app, host="127.0.0.1", port=8000)
