"""Tests for the uniform-noise corruption step."""

import numpy as np
import pytest
from scipy import stats

from poisson_deconv import ObservationSet, corrupt, simulate_observation


class TestCorrupt:
    def test_empty_input(self):
        assert corrupt([], 0.05, 1).size == 0

    def test_uniform_moments(self):
        # moment oracle: mean 0, variance a^2 / 3
        a = 0.05
        noise = corrupt(np.zeros(1_000_000), a, 9)
        se_mean = (a / np.sqrt(3)) / np.sqrt(noise.size)
        assert abs(noise.mean()) <= 3 * se_mean
        assert abs(noise.var() - a**2 / 3) <= 0.02 * a**2 / 3

    def test_bounded_and_paired(self):
        rng = np.random.default_rng(2)
        x = rng.uniform(0, 1, 10_000)
        y = corrupt(x, 0.1, 3)
        assert y.shape == x.shape
        assert np.max(np.abs(y - x)) <= 0.1

    def test_nonpositive_a(self):
        with pytest.raises(ValueError):
            corrupt([0.5], 0.0, 1)


class TestSimulateObservation:
    def test_deterministic(self, unisym):
        a = simulate_observation(unisym, 500, 0.05, 7)
        b = simulate_observation(unisym, 500, 0.05, 7)
        np.testing.assert_array_equal(a.points, b.points)
        assert a.scaling_n == 500
        assert a.noise_half_width == 0.05
        assert a.window_end == 1.0

    def test_count_mean(self, unisym):
        rng = np.random.default_rng(31)
        counts = [simulate_observation(unisym, 1000, 0.05, rng).n_plus for _ in range(2000)]
        sigma = np.sqrt(1000.0 / len(counts))
        assert abs(np.mean(counts) - 1000.0) <= 3 * sigma

    def test_histogram_matches_smeared_density(self, unisym):
        # The noisy density is f_Y(x) = (F(x+a) - F(x-a)) / (2a); bin counts of
        # one large draw must match its integral bin by bin within 4 sigma.
        a = 0.05
        obs = simulate_observation(unisym, 1_000_000, a, 17)
        edges = np.linspace(-a, 1 + a, 513)
        counts, _ = np.histogram(obs.points, bins=edges)
        fine = np.linspace(edges[0], edges[-1], 512 * 33)
        f_y = (unisym.cdf_fn(fine + a) - unisym.cdf_fn(fine - a)) / (2 * a)
        cdf_y = np.concatenate([[0.0], np.cumsum((f_y[1:] + f_y[:-1]) / 2 * np.diff(fine))])
        bin_prob = np.interp(edges[1:], fine, cdf_y) - np.interp(edges[:-1], fine, cdf_y)
        n_total = obs.n_plus
        expected = n_total * bin_prob
        sigma = np.sqrt(n_total * bin_prob * (1 - bin_prob)) + 1e-12
        assert np.max(np.abs(counts - expected) / sigma) <= 4.0

    def test_disjoint_interval_counts_are_poisson(self, unisym):
        # Counts in disjoint intervals across seeds: pooled dispersion
        # chi-square against the Poisson means, p > 0.001.
        a, n, seeds = 0.05, 500, 20
        edges = np.linspace(0.0, 1.0, 6)
        fine = np.linspace(0, 1, 4001)
        f_y = (unisym.cdf_fn(fine + a) - unisym.cdf_fn(fine - a)) / (2 * a)
        cdf_y = np.concatenate([[0.0], np.cumsum((f_y[1:] + f_y[:-1]) / 2 * np.diff(fine))])
        lam = n * (np.interp(edges[1:], fine, cdf_y) - np.interp(edges[:-1], fine, cdf_y))
        stat = 0.0
        for seed in range(seeds):
            obs = simulate_observation(unisym, n, a, seed)
            counts, _ = np.histogram(obs.points, bins=edges)
            stat += np.sum((counts - lam) ** 2 / lam)
        p = stats.chi2.sf(stat, df=seeds * len(lam))
        assert p > 0.001


class TestObservationSet:
    def test_validation(self):
        with pytest.raises(ValueError):
            ObservationSet(np.array([[0.1]]), 1, 0.05, 1.0)
        with pytest.raises(ValueError):
            ObservationSet(np.array([0.1]), 0, 0.05, 1.0)
        with pytest.raises(ValueError):
            ObservationSet(np.array([0.1]), 1, -0.05, 1.0)
        with pytest.raises(ValueError):
            ObservationSet(np.array([np.nan]), 1, 0.05, 1.0)

    def test_n_plus(self):
        obs = ObservationSet(np.array([0.1, 0.4]), 2, 0.05, 1.0)
        assert obs.n_plus == 2
