"""Command-line front end: a thin client over the estimation service.

Every subcommand builds a request model, sends it through the service client
(in-process by default, remote with ``--server``), and writes the response
to disk.  Stochastic subcommands require an explicit ``--seed``; given the
seed, output bytes are fully reproducible.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .estimator import CurveMeta, EstimateCurve
from .intensity import SCENARIO_NAMES
from .io import (
    FileFormatError,
    read_intervals,
    read_points_csv,
    write_curve_csv,
    write_points_csv,
)
from .service import schemas
from .service.client import ServiceClient, ServiceError

_SUBCOMMANDS = ("simulate", "estimate", "select", "benchmark", "deconvolve", "serve")


def _load_config(path: str) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FileFormatError(f"{path}, line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


@click.group()
@click.version_option(version=__version__)
@click.option("--server", default=None, help="Base URL of a running service; default runs in-process.")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="key=value file supplying defaults; flags override it.")
@click.pass_context
def main(ctx, server, config_path):
    """Deconvolution of point-process intensities observed through uniform jitter."""
    if config_path:
        values = _load_config(config_path)
        ctx.default_map = {name: dict(values) for name in _SUBCOMMANDS}
    ctx.obj = {"server": server}


def _fail_on_error(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, ServiceError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _client(ctx) -> ServiceClient:
    return ServiceClient(server=ctx.obj.get("server"))


def _payload_curve(payload: schemas.CurvePayload) -> EstimateCurve:
    return EstimateCurve(
        grid=np.asarray(payload.grid),
        values=np.asarray(payload.values),
        bandwidth=payload.bandwidth,
        meta=CurveMeta(variant=payload.variant, kernel=payload.kernel),
    )


@main.command()
@click.option("--scenario", required=True, help=f"One of: {', '.join(SCENARIO_NAMES)}.")
@click.option("--n", required=True, type=int, help="Number of aggregated unit processes.")
@click.option("--a", required=True, type=float, help="Noise half-width.")
@click.option("--seed", required=True, type=int)
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@click.pass_context
@_fail_on_error
def simulate(ctx, scenario, n, a, seed, output):
    """Simulate a noisy observation set and write it as a points CSV."""
    resp = _client(ctx).simulate(
        schemas.SimulateRequest(scenario=scenario, n=n, a=a, seed=seed)
    )
    write_points_csv(resp.points, output)
    click.echo(f"wrote {resp.n_plus} points to {output}")


_tune_choice = click.Choice(["fixed-eta", "adaptive-gamma"])


@main.command()
@click.option("--points", "points_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--n", required=True, type=int)
@click.option("--a", required=True, type=float)
@click.option("--t", required=True, type=float, help="Window end.")
@click.option("--h", default=None, type=float, help="Fixed bandwidth; mutually exclusive with --tune.")
@click.option("--tune", default=None, type=_tune_choice)
@click.option("--eta", default=-0.6, type=float, show_default=True)
@click.option("--gamma", default=0.01, type=float, show_default=True)
@click.option("--grid-points", default=30, type=int, show_default=True)
@click.option("--m", default=None, type=int, help="Evaluation grid size.")
@click.option("--kernel", default="epanechnikov", show_default=True)
@click.option("--variant", default="tilde", type=click.Choice(["tilde", "hat", "check"]), show_default=True)
@click.option("--clip-nonnegative", is_flag=True, help="Clip negative values in the output (presentation only).")
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@click.pass_context
@_fail_on_error
def estimate(ctx, points_path, n, a, t, h, tune, eta, gamma, grid_points, m,
             kernel, variant, clip_nonnegative, output):
    """Estimate the intensity from a points CSV and write the curve CSV."""
    points = read_points_csv(points_path)
    resp = _client(ctx).estimate(
        schemas.EstimateRequest(
            points=[float(v) for v in points], n=n, a=a, t=t, h=h, tune=tune,
            eta=eta, gamma=gamma, grid_points=grid_points, m=m, kernel=kernel,
            variant=variant, clip_nonnegative=clip_nonnegative,
        )
    )
    write_curve_csv(_payload_curve(resp.curve), output)
    if resp.selection is not None:
        click.echo(f"h_hat={resp.selection.chosen_h:.17g}")
    click.echo(f"wrote curve to {output}")


@main.command()
@click.option("--points", "points_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--n", required=True, type=int)
@click.option("--a", required=True, type=float)
@click.option("--t", required=True, type=float)
@click.option("--mode", default="adaptive-gamma", type=_tune_choice, show_default=True)
@click.option("--eta", default=-0.6, type=float, show_default=True)
@click.option("--gamma", default=0.01, type=float, show_default=True)
@click.option("--grid-points", default=30, type=int, show_default=True)
@click.option("--m", default=None, type=int)
@click.option("--kernel", default="epanechnikov", show_default=True)
@click.option("-o", "--output", default=None, type=click.Path(dir_okay=False),
              help="Write the selection diagnostics as JSON.")
@click.pass_context
@_fail_on_error
def select(ctx, points_path, n, a, t, mode, eta, gamma, grid_points, m, kernel, output):
    """Select a bandwidth for a points CSV and print it."""
    points = read_points_csv(points_path)
    resp = _client(ctx).select(
        schemas.SelectRequest(
            points=[float(v) for v in points], n=n, a=a, t=t, mode=mode, eta=eta,
            gamma=gamma, grid_points=grid_points, m=m, kernel=kernel,
        )
    )
    click.echo(f"h_hat={resp.selection.chosen_h:.17g}")
    if output:
        Path(output).write_text(resp.selection.model_dump_json(indent=2) + "\n")
        click.echo(f"wrote selection diagnostics to {output}")


@main.command()
@click.option("--scenario", "scenarios", multiple=True,
              help="label:n:a triple, repeatable (e.g. beta-unisym:500:0.05).")
@click.option("--paper-suite", is_flag=True,
              help="Run the full preset: Beta scenarios at a in {0.05,0.1}, "
                   "Laplace at a in {0.5,1,2,3}, n in {500,1000}.")
@click.option("--methods", default="fixed_eta,adaptive_gamma,oracle", show_default=True)
@click.option("--r", "replicates", default=30, type=int, show_default=True)
@click.option("--seed", required=True, type=int)
@click.option("--eta", default=-0.6, type=float, show_default=True)
@click.option("--gamma", default=0.01, type=float, show_default=True)
@click.option("--grid-points", default=30, type=int, show_default=True)
@click.option("--m", default=None, type=int)
@click.option("--kernel", default="epanechnikov", show_default=True)
@click.option("--threads", default=1, type=int, show_default=True,
              help="Worker cap for parallel scenario runs.")
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@click.pass_context
@_fail_on_error
def benchmark(ctx, scenarios, paper_suite, methods, replicates, seed, eta, gamma,
              grid_points, m, kernel, threads, output):
    """Run Monte Carlo benchmarks and write the risk reports as JSON."""
    cells = []
    for spec in scenarios:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"bad scenario spec {spec!r}; expected label:n:a")
        cells.append(schemas.ScenarioSpec(label=parts[0], n=int(parts[1]), a=float(parts[2])))
    resp = _client(ctx).benchmark(
        schemas.BenchmarkRequest(
            scenarios=cells or None, paper_suite=paper_suite,
            methods=[s.strip() for s in methods.split(",") if s.strip()],
            replicates=replicates, seed=seed, eta=eta, gamma=gamma,
            grid_points=grid_points, m=m, kernel=kernel, workers=threads,
        )
    )
    Path(output).write_text(
        json.dumps({"reports": resp.reports}, indent=2, sort_keys=True) + "\n"
    )
    click.echo(f"wrote {len(resp.reports)} reports to {output}")


@main.command()
@click.option("--intervals", "intervals_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--n", default=None, type=int,
              help="Scaling count; defaults to the number of intervals.")
@click.option("--t", default=None, type=float,
              help="Window end; defaults to the largest interval end.")
@click.option("--scale", default=1.0, type=float, show_default=True,
              help="Multiply coordinates before processing (e.g. 1e-6 for bp to Mb).")
@click.option("--a-convention", default="half", type=click.Choice(["half", "full"]),
              show_default=True, help="Noise half-width = half or full mean interval width.")
@click.option("--tune", default="adaptive-gamma", type=_tune_choice, show_default=True)
@click.option("--eta", default=-0.6, type=float, show_default=True)
@click.option("--gamma", default=0.01, type=float, show_default=True)
@click.option("--grid-points", default=30, type=int, show_default=True)
@click.option("--m", default=None, type=int)
@click.option("--kernel", default="epanechnikov", show_default=True)
@click.option("--naive", is_flag=True,
              help="Also write the uncorrected kernel estimate of the midpoints.")
@click.option("--clip-nonnegative", is_flag=True)
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@click.pass_context
@_fail_on_error
def deconvolve(ctx, intervals_path, n, t, scale, a_convention, tune, eta, gamma,
               grid_points, m, kernel, naive, clip_nonnegative, output):
    """Deconvolve interval data (one curve per sequence name)."""
    records = read_intervals(intervals_path)
    groups: dict[str | None, list] = {}
    for rec in records:
        groups.setdefault(rec.chrom, []).append(rec)
    client = _client(ctx)
    multi = len(groups) > 1
    for chrom, recs in groups.items():
        resp = client.deconvolve(
            schemas.DeconvolveRequest(
                intervals=[
                    schemas.IntervalIn(
                        chrom=r.chrom, start=r.start * scale, end=r.end * scale
                    )
                    for r in recs
                ],
                n=n, t=t, a_convention=a_convention, tune=tune, eta=eta,
                gamma=gamma, grid_points=grid_points, m=m, kernel=kernel,
                naive=naive, clip_nonnegative=clip_nonnegative,
            )
        )
        out = Path(output)
        if multi:
            out = out.with_name(f"{out.stem}.{chrom}{out.suffix}")
        write_curve_csv(_payload_curve(resp.curve), out)
        tag = f"[{chrom}] " if multi else ""
        click.echo(
            f"{tag}a_estimate={resp.a_estimate:.17g} n={resp.n_used} "
            f"t={resp.t_used:.17g} h_hat={resp.selection.chosen_h:.17g}"
        )
        click.echo(f"{tag}wrote curve to {out}")
        if resp.naive_curve is not None:
            naive_out = out.with_name(f"{out.stem}.naive{out.suffix}")
            write_curve_csv(_payload_curve(resp.naive_curve), naive_out)
            click.echo(f"{tag}wrote naive curve to {naive_out}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, type=int, show_default=True)
@_fail_on_error
def serve(host, port):
    """Run the estimation service."""
    import uvicorn

    uvicorn.run("poisson_deconv.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
