"""Service operations, independent of the HTTP layer.

Each handler maps a request model to a response model and raises
``ValueError`` for domain errors; the app translates those to 400 responses
and the CLI calls the handlers directly when no server is configured.
"""

from __future__ import annotations

import numpy as np

from .. import __version__
from ..estimator import (
    EstimateCurve,
    direct_kernel_estimate,
    estimate_check,
    estimate_hat,
    estimate_tilde,
)
from ..intensity import scenario as scenario_model
from ..io import IntervalRecord, intervals_to_observations
from ..kernels import from_name as kernel_from_name
from ..metrics import Scenario, paper_suite_scenarios, run_benchmark
from ..selection import (
    SelectionResult,
    compute_criterion_tables,
    default_grid,
    select_adaptive_gamma,
    select_fixed_eta,
)
from ..simulate import ObservationSet, simulate_observation
from . import schemas


def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)


def simulate(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
    model = scenario_model(req.scenario)
    obs = simulate_observation(model, req.n, req.a, req.seed)
    return schemas.SimulateResponse(
        scenario=req.scenario,
        n=req.n,
        a=req.a,
        t=model.window_end,
        seed=req.seed,
        n_plus=obs.n_plus,
        points=[float(v) for v in obs.points],
    )


def _curve_payload(curve: EstimateCurve, clip: bool = False) -> schemas.CurvePayload:
    values = np.maximum(curve.values, 0.0) if clip else curve.values
    return schemas.CurvePayload(
        grid=[float(v) for v in curve.grid],
        values=[float(v) for v in values],
        bandwidth=curve.bandwidth,
        variant=curve.meta.variant,
        kernel=curve.meta.kernel,
    )


def _selection_payload(result: SelectionResult) -> schemas.SelectionPayload:
    eta_used = result.eta_used
    if isinstance(eta_used, np.ndarray):
        eta_used = [float(v) for v in eta_used]
    else:
        eta_used = float(eta_used)
    return schemas.SelectionPayload(
        chosen_h=result.chosen_h,
        bandwidths=[float(v) for v in result.bandwidths],
        a_values=[float(v) for v in result.a_values],
        penalty_values=[float(v) for v in result.penalty_values],
        total_values=[float(v) for v in result.total_values],
        eta_used=eta_used,
        gamma_used=result.gamma_used,
        degenerate=result.degenerate,
        n_plus=result.n_plus,
    )


def _observation(points, n, a, t) -> ObservationSet:
    return ObservationSet(
        points=np.asarray(points, dtype=float),
        scaling_n=n,
        noise_half_width=a,
        window_end=t,
    )


def _run_selection(obs, kernel, mode, eta, gamma, eta_grid, grid_points, m):
    grid = default_grid(
        obs.scaling_n, obs.noise_half_width, obs.window_end, kernel, grid_points
    )
    tables = compute_criterion_tables(obs, kernel, grid, m=m)
    if mode == "fixed-eta":
        return select_fixed_eta(obs, kernel, grid, eta, tables=tables)
    return select_adaptive_gamma(
        obs, kernel, grid, eta_grid=eta_grid, gamma=gamma, tables=tables
    )


def estimate(req: schemas.EstimateRequest) -> schemas.EstimateResponse:
    kernel = kernel_from_name(req.kernel)
    obs = _observation(req.points, req.n, req.a, req.t)
    selection_payload = None
    if req.h is not None:
        h = req.h
    elif req.tune is not None:
        if req.variant != "tilde":
            raise ValueError("bandwidth tuning applies to the tilde variant only")
        result = _run_selection(
            obs, kernel, req.tune, req.eta, req.gamma, req.eta_grid, req.grid_points, req.m
        )
        selection_payload = _selection_payload(result)
        h = result.chosen_h
    else:
        raise ValueError("provide a bandwidth h or a tuning mode")
    estimators = {"tilde": estimate_tilde, "hat": estimate_hat, "check": estimate_check}
    curve = estimators[req.variant](obs, kernel, h, m=req.m)
    return schemas.EstimateResponse(
        curve=_curve_payload(curve, req.clip_nonnegative), selection=selection_payload
    )


def select(req: schemas.SelectRequest) -> schemas.SelectResponse:
    kernel = kernel_from_name(req.kernel)
    obs = _observation(req.points, req.n, req.a, req.t)
    result = _run_selection(
        obs, kernel, req.mode, req.eta, req.gamma, req.eta_grid, req.grid_points, req.m
    )
    return schemas.SelectResponse(selection=_selection_payload(result))


def benchmark(req: schemas.BenchmarkRequest) -> schemas.BenchmarkResponse:
    if req.paper_suite:
        scenarios = paper_suite_scenarios()
    elif req.scenarios:
        scenarios = [Scenario(s.label, s.n, s.a) for s in req.scenarios]
    else:
        raise ValueError("provide scenarios or set paper_suite")
    for cell in scenarios:
        scenario_model(cell.label)  # validates the label early
    reports = run_benchmark(
        scenarios,
        methods=tuple(req.methods),
        replicates=req.replicates,
        seed=req.seed,
        kernel=kernel_from_name(req.kernel),
        eta=req.eta,
        gamma=req.gamma,
        m=req.m,
        num_grid_points=req.grid_points,
        workers=req.workers,
    )
    return schemas.BenchmarkResponse(reports=[r.to_dict() for r in reports])


def deconvolve(req: schemas.DeconvolveRequest) -> schemas.DeconvolveResponse:
    kernel = kernel_from_name(req.kernel)
    records = [IntervalRecord(iv.chrom, iv.start, iv.end) for iv in req.intervals]
    if not records:
        raise ValueError("no intervals given")
    t_used = req.t if req.t is not None else max(rec.end for rec in records)
    n_used = req.n if req.n is not None else len(records)
    obs, a_estimate = intervals_to_observations(
        records, t_used, n_used, a_convention=req.a_convention
    )
    result = _run_selection(
        obs, kernel, req.tune, req.eta, req.gamma, req.eta_grid, req.grid_points, req.m
    )
    curve = estimate_tilde(obs, kernel, result.chosen_h, m=req.m)
    naive_payload = None
    if req.naive:
        naive = direct_kernel_estimate(obs, kernel, result.chosen_h, m=req.m)
        naive_payload = _curve_payload(naive, req.clip_nonnegative)
    return schemas.DeconvolveResponse(
        a_estimate=a_estimate,
        n_used=n_used,
        t_used=t_used,
        curve=_curve_payload(curve, req.clip_nonnegative),
        selection=_selection_payload(result),
        naive_curve=naive_payload,
    )
