"""Bandwidth grids and data-driven bandwidth selection.

The selection rule compares, for every pair of bandwidths ``(h, t)``, the
doubly smoothed curve with the singly smoothed one and subtracts a penalty
``c * sqrt(N) / (n t^{3/2})`` calibrated to the stochastic size of the
curves.  The bias proxy ``A(h)`` is the positive part of the worst such
comparison; the selected bandwidth minimizes ``A(h)`` plus the penalty at
``h`` itself.  Two tunings are shipped: a fixed penalty multiplier ``eta``
(default -0.6) and an adaptive variant that minimizes over an ``eta`` grid
with a global trade-off ``gamma`` (default 0.01).

Selection needs all ``|H|^2`` pair curves, so they are evaluated by binning
the signed translate expansion of the data once and convolving it with the
sampled pair kernels (FFT); this is a few hundred times faster than exact
per-pair translate sums and agrees with :func:`~poisson_deconv.estimator.
double_smooth` to well within the stochastic scale of the criterion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .estimator import (
    _check_bandwidth,
    _eval_grid,
    _sample_scaled_deriv,
    _sample_scaled_value,
    estimate_tilde_matrix,
)
from .intensity import IntensityModel
from .kernels import KernelSpec
from .simulate import ObservationSet, simulate_observation

__all__ = [
    "GridRule",
    "BandwidthGrid",
    "default_grid",
    "theory_grid",
    "penalty_constant",
    "CriterionTables",
    "compute_criterion_tables",
    "criterion_A",
    "SelectionResult",
    "select_fixed_eta",
    "select_adaptive_gamma",
    "default_eta_grid",
    "OracleResult",
    "oracle_bandwidth",
]

DEFAULT_GRID_POINTS = 30
DEFAULT_ETA = -0.6
DEFAULT_GAMMA = 0.01

# Bin width of the selection engine, as a fraction of the smallest kernel
# half-width on the grid.
BIN_FACTOR = 100.0


@dataclass(frozen=True)
class GridRule:
    """How the grid minimum was chosen."""

    kind: str  # "simulation", "theory", or "degenerate"
    value: float


@dataclass(eq=False)
class BandwidthGrid:
    """A finite, strictly increasing set of candidate bandwidths."""

    bandwidths: np.ndarray
    min_rule: GridRule

    def __post_init__(self):
        hs = np.asarray(self.bandwidths, dtype=float)
        if hs.ndim != 1 or hs.size == 0:
            raise ValueError("bandwidth grid must be a nonempty 1-d array")
        if not np.all(hs > 0):
            raise ValueError("bandwidths must be positive")
        if hs.size > 1 and not np.all(np.diff(hs) > 0):
            raise ValueError("bandwidths must be strictly increasing")
        object.__setattr__(self, "bandwidths", hs)

    def __len__(self) -> int:
        return int(self.bandwidths.size)


def default_grid(
    n: int, a: float, T: float, kernel: KernelSpec, num_points: int = DEFAULT_GRID_POINTS
) -> BandwidthGrid:
    """Geometric grid from ``(a T / n)^(1/3)`` up to ``a / A``.

    The lower endpoint keeps the estimator variance bounded at sample size
    ``n``; the upper endpoint is the largest bandwidth the deconvolution
    windows allow.  If the two cross, the grid degenerates to ``a / A``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    h_max = a / kernel.support_radius
    h_min = float(np.cbrt(a * T / n))
    if h_min >= h_max:
        return BandwidthGrid(np.array([h_max]), GridRule("degenerate", h_max))
    return BandwidthGrid(
        np.geomspace(h_min, h_max, int(num_points)), GridRule("simulation", h_min)
    )


def theory_grid(
    n: int, delta: float, a: float | None = None, kernel: KernelSpec | None = None
) -> BandwidthGrid:
    """Reciprocal-integer grid ``{1/D : log n <= D <= delta n^(1/3)}``.

    When ``a`` and ``kernel`` are given, bandwidths violating ``h A <= a``
    are dropped.
    """
    # epsilon guards keep exact integer endpoints (e.g. n = 10^3) intact
    d_lo = int(np.ceil(np.log(n) - 1e-9))
    d_hi = int(np.floor(delta * np.cbrt(n) + 1e-9))
    if d_hi < d_lo:
        raise ValueError(
            f"empty bandwidth range: need delta * n^(1/3) >= log n, got "
            f"integer range [{d_lo}, {d_hi}]"
        )
    hs = 1.0 / np.arange(d_hi, d_lo - 1, -1, dtype=float)
    if a is not None and kernel is not None:
        hs = hs[hs * kernel.support_radius <= a * (1.0 + 1e-12)]
        if hs.size == 0:
            raise ValueError("no grid bandwidth satisfies h <= a/A")
    return BandwidthGrid(hs, GridRule("theory", float(hs[0])))


def penalty_constant(eta: float, kernel: KernelSpec, a: float, T: float) -> float:
    """Penalty constant ``(1 + eta)(1 + ||K||_1) ||K'||_2 sqrt(a T / 2)``."""
    if eta <= -1.0:
        raise ValueError("eta must exceed -1: the penalty must stay positive")
    return float(
        (1.0 + eta)
        * (1.0 + kernel.norm_k_l1)
        * kernel.norm_kprime_l2
        * np.sqrt(a * T / 2.0)
    )


# ---------------------------------------------------------------------------
# Criterion engine


@dataclass(eq=False)
class CriterionTables:
    """Pairwise comparison norms and penalty ingredients for one data set.

    ``norm_table[i, j]`` is the windowed L2 distance between the doubly
    smoothed curve for ``(h_i, t_j)`` and the singly smoothed curve for
    ``t_j``.  ``penalty_base[j] = sqrt(N) / (n t_j^{3/2})`` so that any
    penalty constant ``c`` turns it into the criterion's penalty.
    """

    bandwidths: np.ndarray
    eval_grid: np.ndarray
    norm_table: np.ndarray
    n_plus: int
    scaling_n: int
    single_curves: np.ndarray | None = None
    pair_curves: dict | None = None
    penalty_base: np.ndarray = field(init=False)

    def __post_init__(self):
        with np.errstate(divide="ignore"):
            self.penalty_base = np.sqrt(self.n_plus) / (
                self.scaling_n * self.bandwidths**1.5
            )


def _trapz_l2(diff: np.ndarray, x: np.ndarray) -> float:
    return float(np.sqrt(np.trapezoid(diff * diff, x)))


def _binned_translates(obs: ObservationSet, radius_max: float, delta: float):
    """Linear-binned, signed translate expansion of the observations.

    Every observation is replicated at ``Y + (2k+1)a`` with weight ``+1`` for
    ``k >= 0`` and ``-1`` otherwise, for all translates whose smoothing
    window of half-width ``radius_max`` can reach ``[0, T]``.  Returns the
    bin weights and the position of bin 0.
    """
    a = obs.noise_half_width
    lo = -radius_max - delta
    hi = obs.window_end + radius_max + delta
    y = obs.points
    k_lo = int(np.floor((lo - a - y.max()) / (2.0 * a)))
    k_hi = int(np.ceil((hi - a - y.min()) / (2.0 * a)))
    ks = np.arange(k_lo, k_hi + 1, dtype=float)
    z = (y[None, :] + (2.0 * ks[:, None] + 1.0) * a).ravel()
    sign = np.broadcast_to(
        np.where(ks >= 0.0, 1.0, -1.0)[:, None], (ks.size, y.size)
    ).ravel()
    keep = (z >= lo) & (z <= hi)
    z = z[keep]
    sign = sign[keep]
    n_bins = int(np.ceil((hi - lo) / delta)) + 2
    pos = (z - lo) / delta
    idx = np.floor(pos).astype(np.int64)
    frac = pos - idx
    bins = np.bincount(idx, weights=sign * (1.0 - frac), minlength=n_bins + 1)
    bins += np.bincount(idx + 1, weights=sign * frac, minlength=n_bins + 1)
    return bins, lo


def _conv_readoff(bins, z0, delta, samples, half, x):
    """Convolve bin weights with a centered sampled kernel; read off at x."""
    full = fftconvolve(bins, samples)
    start = z0 - half * delta
    return np.interp(x, start + np.arange(full.size) * delta, full)


def compute_criterion_tables(
    obs: ObservationSet,
    kernel: KernelSpec,
    grid: BandwidthGrid,
    m: int | None = None,
    pair_cache: dict | None = None,
    single_curves: np.ndarray | None = None,
    keep_curves: bool = False,
) -> CriterionTables:
    """All singly and doubly smoothed curves for the grid, reduced to norms.

    Single curves are exact (and may be passed in when the caller already
    computed them, as the benchmark driver does).  The doubly smoothed curve
    for ``(h, t)`` equals the one for ``(t, h)``, so only unordered pairs are
    evaluated, via the binned convolution engine.  ``pair_cache`` may be
    shared across calls with the same kernel and grid: the sampled pair
    kernels do not depend on the data, so the benchmark driver reuses them
    across replicates.
    """
    hs = grid.bandwidths
    a = obs.noise_half_width
    for h in hs:
        _check_bandwidth(float(h), kernel, a)
    x = _eval_grid(obs.window_end, m)
    n_h = hs.size
    if obs.n_plus == 0:
        return CriterionTables(
            bandwidths=hs,
            eval_grid=x,
            norm_table=np.zeros((n_h, n_h)),
            n_plus=0,
            scaling_n=obs.scaling_n,
            single_curves=np.zeros((n_h, x.size)) if keep_curves else None,
            pair_curves={} if keep_curves else None,
        )
    if single_curves is None:
        _, single_curves = estimate_tilde_matrix(obs, kernel, hs, m=x.size)
    elif single_curves.shape != (n_h, x.size):
        raise ValueError("single_curves must have shape (len(grid), m)")
    radius = kernel.support_radius
    delta = radius * float(hs[0]) / BIN_FACTOR
    bins, z0 = _binned_translates(obs, 2.0 * radius * float(hs[-1]), delta)
    prefactor = a / obs.scaling_n

    if pair_cache is None:
        pair_cache = {}
    norm_table = np.empty((n_h, n_h))
    pair_curves = {} if keep_curves else None
    for i in range(n_h):
        for j in range(i, n_h):
            key = (float(hs[i]), float(hs[j]), delta)
            table = pair_cache.get(key)
            if table is None:
                d_samples, d_half = _sample_scaled_deriv(kernel, float(hs[i]), delta)
                v_samples, v_half = _sample_scaled_value(kernel, float(hs[j]), delta)
                table = (fftconvolve(d_samples, v_samples) * delta, d_half + v_half)
                pair_cache[key] = table
            g_samples, g_half = table
            curve = prefactor * _conv_readoff(bins, z0, delta, g_samples, g_half, x)
            norm_table[i, j] = _trapz_l2(curve - single_curves[j], x)
            norm_table[j, i] = _trapz_l2(curve - single_curves[i], x)
            if keep_curves:
                pair_curves[(i, j)] = curve
    return CriterionTables(
        bandwidths=hs,
        eval_grid=x,
        norm_table=norm_table,
        n_plus=obs.n_plus,
        scaling_n=obs.scaling_n,
        single_curves=single_curves if keep_curves else None,
        pair_curves=pair_curves,
    )


def _resolve_tables(obs, kernel, grid, m, tables):
    if tables is not None:
        return tables
    return compute_criterion_tables(obs, kernel, grid, m=m)


def _grid_index(grid: BandwidthGrid, h: float) -> int:
    matches = np.nonzero(np.isclose(grid.bandwidths, h, rtol=1e-12, atol=0.0))[0]
    if matches.size != 1:
        raise ValueError(f"bandwidth {h!r} is not a grid point")
    return int(matches[0])


def criterion_A(
    obs: ObservationSet,
    kernel: KernelSpec,
    grid: BandwidthGrid,
    h: float,
    c: float,
    m: int | None = None,
    tables: CriterionTables | None = None,
) -> float:
    """Bias proxy ``A(h)``: worst penalized comparison against the grid.

    Pass precomputed ``tables`` when evaluating several bandwidths; building
    them is the expensive step and they are shared by every ``h``.
    """
    tables = _resolve_tables(obs, kernel, grid, m, tables)
    i = _grid_index(grid, h)
    gaps = tables.norm_table[i] - c * tables.penalty_base
    return float(max(np.max(gaps), 0.0))


@dataclass(eq=False)
class SelectionResult:
    """Chosen bandwidth plus the full per-bandwidth criterion diagnostics.

    ``eta_used`` is the fixed multiplier in fixed-eta mode and the per-
    bandwidth minimizing multiplier (an array) in adaptive mode.
    ``degenerate`` flags an empty observation set, where the criterion is
    identically zero and the largest bandwidth is returned by convention.
    """

    chosen_h: float
    chosen_index: int
    bandwidths: np.ndarray
    a_values: np.ndarray
    penalty_values: np.ndarray
    total_values: np.ndarray
    eta_used: float | np.ndarray
    gamma_used: float | None
    degenerate: bool
    n_plus: int


def _finish_selection(tables, a_values, penalty_values, eta_used, gamma_used):
    totals = a_values + penalty_values
    degenerate = tables.n_plus == 0
    if degenerate:
        index = int(tables.bandwidths.size - 1)
    else:
        # argmin returns the first minimum: ties resolve to the smallest h.
        index = int(np.argmin(totals))
    return SelectionResult(
        chosen_h=float(tables.bandwidths[index]),
        chosen_index=index,
        bandwidths=tables.bandwidths,
        a_values=a_values,
        penalty_values=penalty_values,
        total_values=totals,
        eta_used=eta_used,
        gamma_used=gamma_used,
        degenerate=degenerate,
        n_plus=tables.n_plus,
    )


def select_fixed_eta(
    obs: ObservationSet,
    kernel: KernelSpec,
    grid: BandwidthGrid,
    eta: float = DEFAULT_ETA,
    m: int | None = None,
    tables: CriterionTables | None = None,
) -> SelectionResult:
    """Minimize ``A(h) + c(eta) sqrt(N) / (n h^{3/2})`` over the grid."""
    tables = _resolve_tables(obs, kernel, grid, m, tables)
    c = penalty_constant(eta, kernel, obs.noise_half_width, obs.window_end)
    penalties = c * tables.penalty_base
    a_values = np.maximum(tables.norm_table - penalties[None, :], 0.0).max(axis=1)
    if tables.n_plus > 0 and tables.bandwidths.size > 1:
        assert np.all(np.diff(penalties) < 0), "penalty must decrease in h"
    return _finish_selection(tables, a_values, penalties, float(eta), None)


def default_eta_grid(size: int = 21) -> np.ndarray:
    """Equispaced eta values in ``[-0.95, -0.4]``.

    -1 is excluded because the penalty constant vanishes there.  The upper
    end stays below the point where the inner penalty dominates every
    comparison: for eta much above -0.4 the bias proxy is identically zero
    at benchmark sample sizes, the minimum over eta erases the criterion's
    information, and the selector collapses to the largest bandwidth.
    """
    return np.linspace(-0.95, -0.4, size)


def select_adaptive_gamma(
    obs: ObservationSet,
    kernel: KernelSpec,
    grid: BandwidthGrid,
    eta_grid=None,
    gamma: float = DEFAULT_GAMMA,
    m: int | None = None,
    tables: CriterionTables | None = None,
) -> SelectionResult:
    """Minimize over eta per bandwidth, then over the grid.

    For each ``h`` the inner minimum of ``A_eta(h) + gamma c(eta) sqrt(N) /
    (n h^{3/2})`` over the eta grid is taken; the outer argmin picks the
    bandwidth.  Both minimizers are recorded.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    etas = default_eta_grid() if eta_grid is None else np.asarray(eta_grid, dtype=float)
    if etas.size == 0 or np.any(etas <= -1.0) or np.any(etas >= 1.0):
        raise ValueError("eta grid must lie inside (-1, 1)")
    tables = _resolve_tables(obs, kernel, grid, m, tables)
    n_h = tables.bandwidths.size
    best_total = np.full(n_h, np.inf)
    best_a = np.zeros(n_h)
    best_penalty = np.zeros(n_h)
    best_eta = np.full(n_h, etas[0])
    for eta in etas:
        c = penalty_constant(float(eta), kernel, obs.noise_half_width, obs.window_end)
        penalties = gamma * c * tables.penalty_base
        a_values = np.maximum(
            tables.norm_table - c * tables.penalty_base[None, :], 0.0
        ).max(axis=1)
        totals = a_values + penalties
        better = totals < best_total
        best_total[better] = totals[better]
        best_a[better] = a_values[better]
        best_penalty[better] = penalties[better]
        best_eta[better] = eta
    return _finish_selection(tables, best_a, best_penalty, best_eta, float(gamma))


# ---------------------------------------------------------------------------
# Oracle


@dataclass(eq=False)
class OracleResult:
    """Risk-minimizing fixed bandwidth over simulated replicates."""

    h_star: float
    index: int
    bandwidths: np.ndarray
    mean_risks: np.ndarray
    risk_matrix: np.ndarray


def oracle_bandwidth(
    model: IntensityModel,
    n: int,
    a: float,
    kernel: KernelSpec,
    grid: BandwidthGrid,
    replicates: int,
    seed,
    m: int | None = None,
) -> OracleResult:
    """Mean squared risk of every grid bandwidth over fresh replicates.

    Needs the true density, so this is a benchmark reference, not an
    estimator.  Returns the argmin bandwidth and the full risk table.
    """
    if replicates < 1:
        raise ValueError("need at least one replicate")
    x = _eval_grid(model.window_end, m)
    truth = np.asarray(model.density_fn(x), dtype=float)
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    seeds = seed.spawn(replicates)
    risk_matrix = np.empty((replicates, grid.bandwidths.size))
    for r in range(replicates):
        obs = simulate_observation(model, n, a, np.random.default_rng(seeds[r]))
        _, curves = estimate_tilde_matrix(obs, kernel, grid.bandwidths, m=m)
        diff = curves - truth[None, :]
        risk_matrix[r] = np.trapezoid(diff * diff, x, axis=1)
    mean_risks = risk_matrix.mean(axis=0)
    index = int(np.argmin(mean_risks))
    return OracleResult(
        h_star=float(grid.bandwidths[index]),
        index=index,
        bandwidths=grid.bandwidths,
        mean_risks=mean_risks,
        risk_matrix=risk_matrix,
    )
