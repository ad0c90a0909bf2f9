"""Tests for bandwidth grids, the comparison criterion, and the selectors."""

import math

import numpy as np
import pytest

from poisson_deconv import (
    ObservationSet,
    criterion_A,
    default_grid,
    double_smooth,
    oracle_bandwidth,
    penalty_constant,
    select_adaptive_gamma,
    select_fixed_eta,
    simulate_observation,
    theory_grid,
)
from poisson_deconv.estimator import estimate_tilde_matrix
from poisson_deconv.selection import (
    BandwidthGrid,
    GridRule,
    compute_criterion_tables,
    default_eta_grid,
)


class TestDefaultGrid:
    def test_endpoints_and_shape(self, epan):
        grid = default_grid(1000, 0.1, 1.0, epan)
        # cube-root oracle for the minimum
        h_min = math.pow(0.1 * 1.0 / 1000, 1.0 / 3.0)
        assert grid.bandwidths[0] == pytest.approx(h_min, rel=1e-12)
        assert grid.bandwidths[0] == pytest.approx(0.046416, abs=1e-6)
        assert grid.bandwidths[-1] == pytest.approx(0.1, rel=1e-12)
        assert len(grid) == 30
        assert np.all(np.diff(grid.bandwidths) > 0)

    def test_max_is_a_over_support(self, epan):
        grid = default_grid(1000, 0.05, 1.0, epan)
        assert grid.bandwidths[-1] == pytest.approx(0.05, rel=1e-12)

    def test_degenerate_when_min_exceeds_max(self, epan):
        # (a T / n)^(1/3) >= a/A collapses the grid to a single point
        grid = default_grid(2, 0.05, 1.0, epan)
        assert len(grid) == 1
        assert grid.bandwidths[0] == pytest.approx(0.05)
        assert grid.min_rule.kind == "degenerate"

    def test_all_satisfy_window_constraint(self, epan):
        grid = default_grid(500, 0.05, 1.0, epan)
        assert np.all(grid.bandwidths * epan.support_radius <= 0.05 * (1 + 1e-12))


class TestTheoryGrid:
    def test_reciprocal_integers(self):
        # ceil(ln 1000) = 7, floor(1 * 1000^(1/3)) = 10
        grid = theory_grid(1000, 1.0)
        np.testing.assert_allclose(
            grid.bandwidths, [1 / 10, 1 / 9, 1 / 8, 1 / 7], rtol=1e-15
        )
        recips = 1.0 / grid.bandwidths
        np.testing.assert_allclose(recips, np.round(recips), atol=1e-9)

    def test_empty_range_rejected(self):
        with pytest.raises(ValueError, match="delta"):
            theory_grid(10, 0.1)

    def test_window_filter(self, epan):
        grid = theory_grid(1000, 1.0, a=0.12, kernel=epan)
        assert np.all(grid.bandwidths <= 0.12)
        np.testing.assert_allclose(grid.bandwidths, [1 / 10, 1 / 9], rtol=1e-15)


class TestGridValidation:
    def test_rejects_unsorted(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            BandwidthGrid(np.array([0.2, 0.1]), GridRule("simulation", 0.1))

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            BandwidthGrid(np.array([0.1, 0.1]), GridRule("simulation", 0.1))


class TestPenaltyConstant:
    def test_reference_value(self, epan):
        # factor-by-factor oracle: 0.4 * 2 * sqrt(1.5) * sqrt(0.05/2)
        expected = 0.4 * 2.0 * math.sqrt(1.5) * math.sqrt(0.05 * 1.0 / 2.0)
        got = penalty_constant(-0.6, epan, 0.05, 1.0)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(0.154919, abs=1e-6)

    def test_algebraic_simplification(self, epan):
        # eta=0 and a*T = 2 leave exactly 2 ||K'||_2
        got = penalty_constant(0.0, epan, 2.0, 1.0)
        assert got == pytest.approx(2.0 * epan.norm_kprime_l2, rel=1e-12)

    def test_eta_lower_bound(self, epan):
        with pytest.raises(ValueError, match="exceed -1"):
            penalty_constant(-1.0, epan, 0.05, 1.0)


@pytest.fixture(scope="module")
def selection_setup(unisym):
    from poisson_deconv import epanechnikov

    epan = epanechnikov()
    obs = simulate_observation(unisym, 1000, 0.05, 21)
    grid = default_grid(1000, 0.05, 1.0, epan)
    tables = compute_criterion_tables(obs, epan, grid, keep_curves=True)
    return epan, obs, grid, tables


class TestCriterionA:
    def test_zero_observations(self, epan):
        obs = ObservationSet(np.empty(0), 100, 0.05, 1.0)
        grid = default_grid(100, 0.05, 1.0, epan)
        tables = compute_criterion_tables(obs, epan, grid)
        for h in grid.bandwidths:
            assert criterion_A(obs, epan, grid, h, 0.15, tables=tables) == 0.0

    def test_nonnegative(self, selection_setup):
        epan, obs, grid, tables = selection_setup
        c = penalty_constant(-0.6, epan, 0.05, 1.0)
        values = [
            criterion_A(obs, epan, grid, h, c, tables=tables) for h in grid.bandwidths
        ]
        assert min(values) >= 0.0

    def test_huge_penalty_zeroes_criterion(self, selection_setup):
        epan, obs, grid, tables = selection_setup
        for h in grid.bandwidths[::7]:
            assert criterion_A(obs, epan, grid, h, 1e6, tables=tables) == 0.0

    def test_h_must_be_on_grid(self, selection_setup):
        epan, obs, grid, tables = selection_setup
        with pytest.raises(ValueError, match="grid point"):
            criterion_A(obs, epan, grid, 0.0449, 0.15, tables=tables)


class TestEngineAgainstExactCurves:
    def test_pair_curves_match_double_smooth(self, selection_setup):
        epan, obs, grid, tables = selection_setup
        hs = grid.bandwidths
        for i, j in [(0, 0), (0, 29), (7, 21), (29, 29)]:
            exact = double_smooth(obs, epan, hs[i], hs[j], m=512).values
            engine = tables.pair_curves[(i, j)]
            scale = max(1.0, float(np.max(np.abs(exact))))
            assert np.max(np.abs(engine - exact)) <= 0.05 * scale
            l2 = np.sqrt(np.trapezoid((engine - exact) ** 2, tables.eval_grid))
            assert l2 <= 0.03

    def test_single_curves_are_exact(self, selection_setup):
        epan, obs, grid, tables = selection_setup
        _, exact = estimate_tilde_matrix(obs, epan, grid.bandwidths, m=512)
        np.testing.assert_array_equal(tables.single_curves, exact)


class TestSelectFixedEta:
    def test_zero_observations_degenerate(self, epan):
        obs = ObservationSet(np.empty(0), 100, 0.05, 1.0)
        grid = default_grid(100, 0.05, 1.0, epan)
        result = select_fixed_eta(obs, epan, grid)
        assert result.degenerate
        assert result.chosen_h == grid.bandwidths[-1]
        assert np.all(result.total_values == 0.0)

    def test_huge_penalty_selects_largest(self, selection_setup):
        # with an enormous eta the comparison term vanishes and the
        # criterion is the decreasing penalty alone
        epan, obs, grid, tables = selection_setup
        result = select_fixed_eta(obs, epan, grid, eta=1e6, tables=tables)
        assert result.chosen_h == grid.bandwidths[-1]
        assert np.all(result.a_values == 0.0)

    def test_chosen_minimizes_totals(self, selection_setup):
        epan, obs, grid, tables = selection_setup
        result = select_fixed_eta(obs, epan, grid, tables=tables)
        assert result.chosen_h in grid.bandwidths
        assert result.total_values[result.chosen_index] == result.total_values.min()
        # ties (if any) resolve to the smallest bandwidth
        ties = np.nonzero(result.total_values == result.total_values.min())[0]
        assert result.chosen_index == ties[0]

    def test_penalty_strictly_decreasing(self, selection_setup):
        epan, obs, grid, tables = selection_setup
        result = select_fixed_eta(obs, epan, grid, tables=tables)
        assert np.all(np.diff(result.penalty_values) < 0)


class TestSelectAdaptiveGamma:
    def test_single_eta_gamma_one_reduces_to_fixed(self, selection_setup):
        epan, obs, grid, tables = selection_setup
        fixed = select_fixed_eta(obs, epan, grid, eta=-0.6, tables=tables)
        adaptive = select_adaptive_gamma(
            obs, epan, grid, eta_grid=[-0.6], gamma=1.0, tables=tables
        )
        assert adaptive.chosen_h == fixed.chosen_h
        np.testing.assert_allclose(adaptive.total_values, fixed.total_values)

    def test_gamma_zero_dominates_fixed_selectors(self, selection_setup):
        epan, obs, grid, tables = selection_setup
        etas = default_eta_grid()
        adaptive = select_adaptive_gamma(
            obs, epan, grid, eta_grid=etas, gamma=0.0, tables=tables
        )
        best = adaptive.total_values[adaptive.chosen_index]
        for eta in etas:
            fixed = select_fixed_eta(obs, epan, grid, eta=eta, tables=tables)
            assert best <= fixed.a_values.min() + 1e-12

    def test_eta_monotonicity(self, selection_setup):
        # at fixed h, the comparison term is nonincreasing in eta and the
        # penalty is increasing in eta
        epan, obs, grid, tables = selection_setup
        etas = default_eta_grid()
        previous = None
        for eta in etas:
            result = select_fixed_eta(obs, epan, grid, eta=eta, tables=tables)
            if previous is not None:
                assert np.all(result.a_values <= previous.a_values + 1e-12)
                assert np.all(result.penalty_values >= previous.penalty_values)
            previous = result

    def test_zero_observations_degenerate(self, epan):
        obs = ObservationSet(np.empty(0), 100, 0.05, 1.0)
        grid = default_grid(100, 0.05, 1.0, epan)
        result = select_adaptive_gamma(obs, epan, grid)
        assert result.degenerate
        assert result.chosen_h == grid.bandwidths[-1]

    def test_eta_grid_validation(self, selection_setup):
        epan, obs, grid, tables = selection_setup
        with pytest.raises(ValueError, match="inside"):
            select_adaptive_gamma(obs, epan, grid, eta_grid=[-1.0, 0.0], tables=tables)
        with pytest.raises(ValueError, match="nonnegative"):
            select_adaptive_gamma(obs, epan, grid, gamma=-0.1, tables=tables)

    def test_records_minimizing_eta_per_bandwidth(self, selection_setup):
        epan, obs, grid, tables = selection_setup
        result = select_adaptive_gamma(obs, epan, grid, tables=tables)
        assert isinstance(result.eta_used, np.ndarray)
        assert result.eta_used.shape == grid.bandwidths.shape
        assert result.gamma_used == 0.01


class TestBiasProxyVanishesAtSmallBandwidth:
    def test_a_at_grid_minimum_typically_zero(self, epan, unisym):
        # the bias proxy at the smallest bandwidth is zero on most smooth
        # data sets, and never more than a sliver of the penalty there
        c = penalty_constant(-0.6, epan, 0.05, 1.0)
        grid = default_grid(1000, 0.05, 1.0, epan)
        h_min = grid.bandwidths[0]
        penalty_at_min = c * np.sqrt(1000) / (1000 * h_min**1.5)
        values = []
        for seed in range(10):
            obs = simulate_observation(unisym, 1000, 0.05, seed)
            tables = compute_criterion_tables(obs, epan, grid)
            values.append(criterion_A(obs, epan, grid, h_min, c, tables=tables))
        assert sum(v == 0.0 for v in values) >= 8
        assert max(values) <= 0.05 * penalty_at_min


class TestOracleBandwidth:
    def test_risk_table_properties(self, epan, unisym):
        grid = default_grid(1000, 0.05, 1.0, epan)
        result = oracle_bandwidth(unisym, 1000, 0.05, epan, grid, replicates=8, seed=5)
        # the mean risk table is the mean of per-replicate risks, and the
        # reported optimum is its argmin
        np.testing.assert_allclose(
            result.mean_risks, result.risk_matrix.mean(axis=0), rtol=1e-12
        )
        recomputed = np.array(
            [math.fsum(result.risk_matrix[:, i]) / 8 for i in range(len(grid))]
        )
        np.testing.assert_allclose(result.mean_risks, recomputed, rtol=1e-12)
        assert result.mean_risks[result.index] == result.mean_risks.min()
        assert result.h_star == grid.bandwidths[result.index]

    def test_stability_across_seed_batches(self, epan, unisym):
        # the selected grid index is stable across disjoint seed batches in
        # at least 8 of 10 repetitions
        grid = default_grid(1000, 0.05, 1.0, epan)
        agreements = 0
        for rep in range(10):
            one = oracle_bandwidth(unisym, 1000, 0.05, epan, grid, 30, seed=(rep, 0))
            two = oracle_bandwidth(unisym, 1000, 0.05, epan, grid, 30, seed=(rep, 1))
            agreements += one.index == two.index
        assert agreements >= 8
