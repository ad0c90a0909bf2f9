"""Intensity estimation for Poisson point processes observed through
uniform jitter, with data-driven bandwidth selection."""

from .estimator import (
    BandwidthTooLargeError,
    CurveMeta,
    EstimateCurve,
    direct_kernel_estimate,
    double_smooth,
    estimate_check,
    estimate_hat,
    estimate_tilde,
    smooth_truth,
)
from .intensity import (
    SCENARIO_NAMES,
    IntensityModel,
    beta_scenario,
    custom_model,
    laplace_scenario,
    sample_points,
    scenario,
)
from .kernels import KernelSpec, compute_norms, epanechnikov, higher_order_kernel
from .metrics import (
    RiskReport,
    Scenario,
    l2_distance,
    l2_norm_T,
    paper_suite_scenarios,
    rate_slope_check,
    run_benchmark,
    variance_check,
)
from .selection import (
    BandwidthGrid,
    SelectionResult,
    criterion_A,
    default_grid,
    oracle_bandwidth,
    penalty_constant,
    select_adaptive_gamma,
    select_fixed_eta,
    theory_grid,
)
from .simulate import ObservationSet, corrupt, simulate_observation

__version__ = "0.1.0"
