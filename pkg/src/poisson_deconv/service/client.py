"""Thin client over the service.

Without a server URL the client calls the handlers in-process (same request
and response models, no HTTP); with one it posts JSON to a running service.
"""

from __future__ import annotations

import httpx

from . import handlers, schemas


class ServiceError(RuntimeError):
    """A remote call failed; carries the server's error detail."""


class ServiceClient:
    def __init__(self, server: str | None = None, timeout: float = 3600.0):
        self._http = (
            httpx.Client(base_url=server, timeout=timeout) if server else None
        )

    def close(self) -> None:
        if self._http is not None:
            self._http.close()

    def _post(self, path: str, request, response_model):
        response = self._http.post(path, json=request.model_dump())
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise ServiceError(f"{path} failed ({response.status_code}): {detail}")
        return response_model(**response.json())

    def simulate(self, req: schemas.SimulateRequest) -> schemas.SimulateResponse:
        if self._http is None:
            return handlers.simulate(req)
        return self._post("/simulate", req, schemas.SimulateResponse)

    def estimate(self, req: schemas.EstimateRequest) -> schemas.EstimateResponse:
        if self._http is None:
            return handlers.estimate(req)
        return self._post("/estimate", req, schemas.EstimateResponse)

    def select(self, req: schemas.SelectRequest) -> schemas.SelectResponse:
        if self._http is None:
            return handlers.select(req)
        return self._post("/select", req, schemas.SelectResponse)

    def benchmark(self, req: schemas.BenchmarkRequest) -> schemas.BenchmarkResponse:
        if self._http is None:
            return handlers.benchmark(req)
        return self._post("/benchmark", req, schemas.BenchmarkResponse)

    def deconvolve(self, req: schemas.DeconvolveRequest) -> schemas.DeconvolveResponse:
        if self._http is None:
            return handlers.deconvolve(req)
        return self._post("/deconvolve", req, schemas.DeconvolveResponse)
