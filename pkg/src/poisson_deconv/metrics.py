"""Windowed L2 risks, the Monte Carlo benchmark driver, and diagnostics.

The driver simulates replicates once per scenario and feeds the same data to
every method (paired comparison), so the oracle column is directly
comparable with the data-driven selectors.  Replicate seeds derive from the
master seed by index, which makes every aggregate independent of scheduling.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .estimator import EstimateCurve, default_grid_size, estimate_tilde_matrix
from .intensity import IntensityModel, scenario as scenario_model
from .kernels import KernelSpec, epanechnikov, from_name as kernel_from_name
from .simulate import simulate_observation

__all__ = [
    "l2_norm_T",
    "l2_distance",
    "Scenario",
    "paper_suite_scenarios",
    "ScenarioRun",
    "run_scenario",
    "RiskReport",
    "run_benchmark",
    "fit_log_slope",
    "RateSlopeResult",
    "rate_slope_check",
    "VarianceCheckResult",
    "variance_check",
]


def l2_norm_T(curve: EstimateCurve) -> float:
    """Windowed L2 norm: square root of the trapezoid integral of values^2."""
    return float(np.sqrt(np.trapezoid(curve.values**2, curve.grid)))


def l2_distance(curve_a: EstimateCurve, curve_b: EstimateCurve) -> float:
    """Windowed L2 distance between two curves sharing the same grid."""
    if not np.array_equal(curve_a.grid, curve_b.grid):
        raise ValueError("curves must share the same evaluation grid")
    diff = curve_a.values - curve_b.values
    return float(np.sqrt(np.trapezoid(diff * diff, curve_a.grid)))


# ---------------------------------------------------------------------------
# Scenarios


@dataclass(frozen=True)
class Scenario:
    """One benchmark cell: intensity label, aggregation count, noise level."""

    label: str
    n: int
    a: float


def paper_suite_scenarios() -> list[Scenario]:
    """The full benchmark suite: Beta scenarios at a in {0.05, 0.1} and the
    Laplace scenario at a in {0.5, 1, 2, 3}, each with n in {500, 1000}."""
    cells = []
    for label in ("beta-unisym", "beta-bisym", "beta-biasym"):
        for a in (0.05, 0.1):
            for n in (500, 1000):
                cells.append(Scenario(label, n, a))
    for a in (0.5, 1.0, 2.0, 3.0):
        for n in (500, 1000):
            cells.append(Scenario("laplace", n, a))
    return cells


# ---------------------------------------------------------------------------
# Per-scenario Monte Carlo run


@dataclass(eq=False)
class ScenarioRun:
    """Raw Monte Carlo results for one scenario.

    ``mse_matrix[r, i]`` is the squared windowed L2 error of the fixed-
    bandwidth estimate with ``bandwidths[i]`` on replicate ``r``; selector
    columns index into it, so every method is scored on the same curves.
    """

    scenario: Scenario
    bandwidths: np.ndarray
    m: int
    seed: int
    mse_matrix: np.ndarray
    n_plus: np.ndarray
    fixed_indices: dict[float, np.ndarray]
    adaptive_indices: np.ndarray | None
    gamma: float | None
    replicates: int = field(init=False)

    def __post_init__(self):
        self.replicates = int(self.mse_matrix.shape[0])

    @property
    def oracle_index(self) -> int:
        return int(np.argmin(self.mse_matrix.mean(axis=0)))

    @property
    def oracle_mse(self) -> float:
        """Best fixed-bandwidth mean risk over these replicates."""
        return float(self.mse_matrix.mean(axis=0).min())

    def mse_at(self, indices: np.ndarray) -> np.ndarray:
        return self.mse_matrix[np.arange(self.replicates), indices]

    def fixed_mse(self, eta: float) -> np.ndarray:
        return self.mse_at(self.fixed_indices[eta])

    def adaptive_mse(self) -> np.ndarray:
        if self.adaptive_indices is None:
            raise ValueError("scenario was run without adaptive selection")
        return self.mse_at(self.adaptive_indices)


def run_scenario(
    cell: Scenario,
    kernel: KernelSpec,
    replicates: int,
    seed: int,
    etas=(-0.6,),
    gamma: float | None = 0.01,
    eta_grid=None,
    m: int | None = None,
    num_grid_points: int = 30,
    select: bool = True,
) -> ScenarioRun:
    """Simulate ``replicates`` data sets and score every bandwidth/method.

    ``etas`` lists the fixed-eta selectors to evaluate; ``gamma=None`` skips
    the adaptive selector.  ``select=False`` skips selection entirely and
    only fills the fixed-bandwidth risk matrix (enough for oracle work).
    """
    from . import selection  # deferred: selection imports this module's norms

    model = scenario_model(cell.label)
    grid = selection.default_grid(
        cell.n, cell.a, model.window_end, kernel, num_grid_points
    )
    m_used = default_grid_size(model.window_end) if m is None else int(m)
    x = np.linspace(0.0, model.window_end, m_used)
    truth = np.asarray(model.density_fn(x), dtype=float)
    seeds = np.random.SeedSequence(seed).spawn(replicates)
    n_h = len(grid)
    mse_matrix = np.empty((replicates, n_h))
    n_plus = np.empty(replicates, dtype=int)
    etas = tuple(float(e) for e in etas) if select else ()
    fixed_indices = {eta: np.empty(replicates, dtype=int) for eta in etas}
    adaptive_indices = (
        np.empty(replicates, dtype=int) if (select and gamma is not None) else None
    )
    pair_cache: dict = {}
    for r in range(replicates):
        obs = simulate_observation(model, cell.n, cell.a, np.random.default_rng(seeds[r]))
        _, curves = estimate_tilde_matrix(obs, kernel, grid.bandwidths, m=m_used)
        diff = curves - truth[None, :]
        mse_matrix[r] = np.trapezoid(diff * diff, x, axis=1)
        n_plus[r] = obs.n_plus
        if select:
            tables = selection.compute_criterion_tables(
                obs, kernel, grid, m=m_used, pair_cache=pair_cache, single_curves=curves
            )
            for eta in etas:
                res = selection.select_fixed_eta(obs, kernel, grid, eta, tables=tables)
                fixed_indices[eta][r] = res.chosen_index
            if adaptive_indices is not None:
                res = selection.select_adaptive_gamma(
                    obs, kernel, grid, eta_grid=eta_grid, gamma=gamma, tables=tables
                )
                adaptive_indices[r] = res.chosen_index
    return ScenarioRun(
        scenario=cell,
        bandwidths=grid.bandwidths,
        m=m_used,
        seed=seed,
        mse_matrix=mse_matrix,
        n_plus=n_plus,
        fixed_indices=fixed_indices,
        adaptive_indices=adaptive_indices,
        gamma=gamma if select else None,
    )


# ---------------------------------------------------------------------------
# Reports


@dataclass
class RiskReport:
    """Aggregated risks of one method on one scenario.

    ``oracle_mse`` is the best fixed-bandwidth mean risk computed from the
    same replicates, repeated on every method's report for easy ratios.
    """

    scenario: dict
    method: str
    params: dict
    per_replicate_mse: list[float]
    median_mse: float
    mean_mse: float
    oracle_mse: float
    selected_bandwidths: list[float]

    def to_dict(self) -> dict:
        return {
            "scenario": dict(self.scenario),
            "method": self.method,
            "params": dict(self.params),
            "per_replicate_mse": list(self.per_replicate_mse),
            "median_mse": self.median_mse,
            "mean_mse": self.mean_mse,
            "oracle_mse": self.oracle_mse,
            "selected_bandwidths": list(self.selected_bandwidths),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RiskReport":
        return cls(
            scenario=dict(data["scenario"]),
            method=data["method"],
            params=dict(data["params"]),
            per_replicate_mse=[float(v) for v in data["per_replicate_mse"]],
            median_mse=float(data["median_mse"]),
            mean_mse=float(data["mean_mse"]),
            oracle_mse=float(data["oracle_mse"]),
            selected_bandwidths=[float(v) for v in data["selected_bandwidths"]],
        )


def _make_report(run: ScenarioRun, kernel_label, method, params, mses, selected):
    mses = np.asarray(mses, dtype=float)
    cell = run.scenario
    return RiskReport(
        scenario={
            "label": cell.label,
            "n": cell.n,
            "a": cell.a,
            "kernel": kernel_label,
            "grid_min": float(run.bandwidths[0]),
            "grid_max": float(run.bandwidths[-1]),
            "grid_size": int(run.bandwidths.size),
            "m": run.m,
            "replicates": run.replicates,
            "seed": run.seed,
        },
        method=method,
        params=params,
        per_replicate_mse=[float(v) for v in mses],
        median_mse=float(np.median(mses)),
        mean_mse=float(np.mean(mses)),
        oracle_mse=run.oracle_mse,
        selected_bandwidths=[float(v) for v in selected],
    )


def reports_from_run(run: ScenarioRun, kernel_label: str, methods, eta, gamma):
    reports = []
    for method in methods:
        if method == "fixed_eta":
            idx = run.fixed_indices[eta]
            reports.append(
                _make_report(
                    run,
                    kernel_label,
                    "fixed-eta",
                    {"eta": eta},
                    run.mse_at(idx),
                    run.bandwidths[idx],
                )
            )
        elif method == "adaptive_gamma":
            idx = run.adaptive_indices
            reports.append(
                _make_report(
                    run,
                    kernel_label,
                    "adaptive-gamma",
                    {"gamma": gamma},
                    run.mse_at(idx),
                    run.bandwidths[idx],
                )
            )
        elif method == "oracle":
            i = run.oracle_index
            reports.append(
                _make_report(
                    run,
                    kernel_label,
                    "oracle",
                    {},
                    run.mse_matrix[:, i],
                    [run.bandwidths[i]] * run.replicates,
                )
            )
        else:
            raise ValueError(
                f"unknown method {method!r}; expected fixed_eta, adaptive_gamma or oracle"
            )
    return reports


def _benchmark_cell(args):
    (cell, kernel_label, replicates, seed, eta, gamma, eta_grid, m, num_grid_points) = args
    kernel = kernel_from_name(kernel_label)
    run = run_scenario(
        cell,
        kernel,
        replicates,
        seed,
        etas=(eta,),
        gamma=gamma,
        eta_grid=eta_grid,
        m=m,
        num_grid_points=num_grid_points,
    )
    return run


def run_benchmark(
    scenarios,
    methods=("fixed_eta", "adaptive_gamma", "oracle"),
    replicates: int = 30,
    seed: int = 0,
    kernel: KernelSpec | None = None,
    eta: float = -0.6,
    gamma: float = 0.01,
    eta_grid=None,
    m: int | None = None,
    num_grid_points: int = 30,
    workers: int = 1,
) -> list[RiskReport]:
    """Run every scenario against every method, sharing data per replicate.

    Per-scenario seeds derive from the master seed by position, so reports
    do not depend on ``workers``.  Parallel runs rebuild the kernel by name
    in each worker, which restricts them to named kernels.
    """
    if replicates < 1:
        raise ValueError("need at least one replicate")
    kernel = kernel or epanechnikov()
    scenarios = list(scenarios)
    cell_seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(len(scenarios))]
    arglist = [
        (cell, kernel.label, replicates, cell_seed, eta, gamma, eta_grid, m, num_grid_points)
        for cell, cell_seed in zip(scenarios, cell_seeds)
    ]
    if workers > 1 and len(scenarios) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_benchmark_cell, arglist))
    else:
        runs = [_benchmark_cell(args) for args in arglist]
    reports = []
    for run in runs:
        reports.extend(reports_from_run(run, kernel.label, methods, eta, gamma))
    return reports


# ---------------------------------------------------------------------------
# Diagnostics


def fit_log_slope(ns, risks) -> float:
    """Least-squares slope of log(risk) against log(n)."""
    ns = np.asarray(ns, dtype=float)
    risks = np.asarray(risks, dtype=float)
    return float(np.polyfit(np.log(ns), np.log(risks), 1)[0])


@dataclass(eq=False)
class RateSlopeResult:
    slope: float
    ns: np.ndarray
    oracle_risks: np.ndarray


def rate_slope_check(
    model: IntensityModel,
    kernel: KernelSpec,
    a: float,
    n_list,
    replicates: int,
    seed: int,
    m: int | None = None,
    num_grid_points: int = 30,
) -> RateSlopeResult:
    """Empirical decay rate of the oracle risk with the sample size.

    Needs at least four sample sizes spanning a decade so the fitted slope
    means something.
    """
    from . import selection

    ns = sorted(int(n) for n in n_list)
    if len(ns) < 4 or ns[-1] < 10 * ns[0]:
        raise ValueError("need at least 4 sample sizes spanning a decade")
    seeds = np.random.SeedSequence(seed).spawn(len(ns))
    risks = np.empty(len(ns))
    for i, n in enumerate(ns):
        grid = selection.default_grid(n, a, model.window_end, kernel, num_grid_points)
        oracle = selection.oracle_bandwidth(
            model, n, a, kernel, grid, replicates, seeds[i], m=m
        )
        risks[i] = oracle.mean_risks.min()
    return RateSlopeResult(fit_log_slope(ns, risks), np.array(ns, dtype=float), risks)


@dataclass(eq=False)
class VarianceCheckResult:
    empirical: float
    theoretical: float
    ratio: float


def variance_check(
    model: IntensityModel,
    kernel: KernelSpec,
    n: int,
    a: float,
    h: float,
    replicates: int,
    seed: int,
    m: int | None = None,
) -> VarianceCheckResult:
    """Integrated pointwise variance of the estimator against its closed form.

    The closed form is ``a T ||f||_1 ||K'||_2^2 / (2 n h^3)``; the empirical
    value integrates the across-replicate variance over the window.
    """
    if replicates < 2:
        raise ValueError("variance needs at least two replicates")
    x = None
    total = None
    total_sq = None
    seeds = np.random.SeedSequence(seed).spawn(replicates)
    for r in range(replicates):
        obs = simulate_observation(model, n, a, np.random.default_rng(seeds[r]))
        grid, curves = estimate_tilde_matrix(obs, kernel, [h], m=m)
        values = curves[0]
        if total is None:
            x = grid
            total = np.zeros_like(values)
            total_sq = np.zeros_like(values)
        total += values
        total_sq += values * values
    pointwise_var = (total_sq - total * total / replicates) / (replicates - 1)
    empirical = float(np.trapezoid(pointwise_var, x))
    theoretical = float(
        a
        * model.window_end
        * model.total_mass
        * kernel.norm_kprime_l2**2
        / (2.0 * n * h**3)
    )
    return VarianceCheckResult(empirical, theoretical, empirical / theoretical)
