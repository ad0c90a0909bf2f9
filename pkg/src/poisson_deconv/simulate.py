"""Corruption of clean point patterns by additive uniform jitter."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .intensity import IntensityModel, sample_points

__all__ = ["ObservationSet", "corrupt", "simulate_observation"]


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """Noisy occurrences together with the constants the estimator needs.

    ``points`` are the observed positions; ``scaling_n`` is the number of
    aggregated unit processes; ``noise_half_width`` is the (known) half-width
    of the uniform jitter; ``window_end`` bounds the estimation window
    ``[0, window_end]``.
    """

    points: np.ndarray
    scaling_n: int
    noise_half_width: float
    window_end: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1:
            raise ValueError("points must be a one-dimensional array")
        if pts.size and not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)
        if self.scaling_n < 1:
            raise ValueError("scaling_n must be at least 1")
        if not self.noise_half_width > 0:
            raise ValueError("noise_half_width must be positive")
        if not self.window_end > 0:
            raise ValueError("window_end must be positive")

    @property
    def n_plus(self) -> int:
        return int(self.points.size)


def corrupt(clean_points, a: float, rng) -> np.ndarray:
    """Add independent uniform jitter on ``[-a, a]`` to each point.

    Output order matches input order, so tests can pair ``Y_i`` with ``X_i``.
    """
    if not a > 0:
        raise ValueError("noise half-width a must be positive")
    pts = np.asarray(clean_points, dtype=float)
    gen = np.random.default_rng(rng)
    return pts + gen.uniform(-a, a, size=pts.size)


def simulate_observation(model: IntensityModel, n: int, a: float, rng) -> ObservationSet:
    """Sample the clean process and corrupt it; records ``(n, a, T)``."""
    gen = np.random.default_rng(rng)
    clean = sample_points(model, n, gen)
    noisy = corrupt(clean, a, gen) if clean.size else clean
    return ObservationSet(
        points=noisy,
        scaling_n=int(n),
        noise_half_width=float(a),
        window_end=model.window_end,
    )
