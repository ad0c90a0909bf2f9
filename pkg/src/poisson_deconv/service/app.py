"""FastAPI front end over the estimation handlers."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from . import handlers, schemas


def create_app() -> FastAPI:
    app = FastAPI(
        title="poisson-deconv",
        description=(
            "Intensity estimation for point processes observed through "
            "uniform jitter: simulation, estimation, bandwidth selection, "
            "benchmarking, and interval-data deconvolution."
        ),
        version=__version__,
    )

    @app.exception_handler(ValueError)
    async def _value_error(_: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return handlers.health()

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(req: schemas.SimulateRequest):
        return handlers.simulate(req)

    @app.post("/estimate", response_model=schemas.EstimateResponse)
    def estimate(req: schemas.EstimateRequest):
        return handlers.estimate(req)

    @app.post("/select", response_model=schemas.SelectResponse)
    def select(req: schemas.SelectRequest):
        return handlers.select(req)

    @app.post("/benchmark", response_model=schemas.BenchmarkResponse)
    def benchmark(req: schemas.BenchmarkRequest):
        return handlers.benchmark(req)

    @app.post("/deconvolve", response_model=schemas.DeconvolveResponse)
    def deconvolve(req: schemas.DeconvolveRequest):
        return handlers.deconvolve(req)

    return app


app = create_app()
