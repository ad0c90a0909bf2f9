"""Tests for the HTTP service against direct library calls."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from poisson_deconv import (
    ObservationSet,
    default_grid,
    estimate_tilde,
    select_adaptive_gamma,
    simulate_observation,
)
from poisson_deconv.service.app import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


@pytest.fixture(scope="module")
def sim_payload(client):
    resp = client.post(
        "/simulate", json={"scenario": "beta-unisym", "n": 300, "a": 0.05, "seed": 5}
    )
    assert resp.status_code == 200
    return resp.json()


class TestHealth:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert body["version"]


class TestSimulate:
    def test_matches_library(self, sim_payload, unisym):
        obs = simulate_observation(unisym, 300, 0.05, 5)
        np.testing.assert_array_equal(np.asarray(sim_payload["points"]), obs.points)
        assert sim_payload["n_plus"] == obs.n_plus
        assert sim_payload["t"] == 1.0

    def test_unknown_scenario_is_400(self, client):
        resp = client.post(
            "/simulate", json={"scenario": "nope", "n": 10, "a": 0.05, "seed": 1}
        )
        assert resp.status_code == 400
        assert "valid scenarios" in resp.json()["detail"]

    def test_validation_error_is_422(self, client):
        resp = client.post("/simulate", json={"scenario": "laplace", "n": 10, "a": 0.05})
        assert resp.status_code == 422


class TestEstimate:
    def test_fixed_bandwidth_matches_library(self, client, sim_payload, epan):
        resp = client.post(
            "/estimate",
            json={"points": sim_payload["points"], "n": 300, "a": 0.05, "t": 1.0, "h": 0.04},
        )
        assert resp.status_code == 200
        body = resp.json()
        obs = ObservationSet(np.asarray(sim_payload["points"]), 300, 0.05, 1.0)
        curve = estimate_tilde(obs, epan, 0.04)
        np.testing.assert_array_equal(np.asarray(body["curve"]["values"]), curve.values)
        assert body["curve"]["bandwidth"] == 0.04
        assert body["selection"] is None

    def test_tuned_matches_library_selection(self, client, sim_payload, epan):
        resp = client.post(
            "/estimate",
            json={
                "points": sim_payload["points"], "n": 300, "a": 0.05, "t": 1.0,
                "tune": "adaptive-gamma", "gamma": 0.01,
            },
        )
        assert resp.status_code == 200
        body = resp.json()
        obs = ObservationSet(np.asarray(sim_payload["points"]), 300, 0.05, 1.0)
        grid = default_grid(300, 0.05, 1.0, epan)
        expected = select_adaptive_gamma(obs, epan, grid, gamma=0.01)
        assert body["selection"]["chosen_h"] == expected.chosen_h
        curve = estimate_tilde(obs, epan, expected.chosen_h)
        np.testing.assert_array_equal(np.asarray(body["curve"]["values"]), curve.values)

    def test_bandwidth_too_large_is_400(self, client, sim_payload):
        resp = client.post(
            "/estimate",
            json={"points": sim_payload["points"], "n": 300, "a": 0.05, "t": 1.0, "h": 0.2},
        )
        assert resp.status_code == 400
        assert "a/A" in resp.json()["detail"]

    def test_requires_h_or_tune(self, client, sim_payload):
        resp = client.post(
            "/estimate",
            json={"points": sim_payload["points"], "n": 300, "a": 0.05, "t": 1.0},
        )
        assert resp.status_code == 400

    def test_clip_nonnegative(self, client, sim_payload):
        resp = client.post(
            "/estimate",
            json={
                "points": sim_payload["points"], "n": 300, "a": 0.05, "t": 1.0,
                "h": 0.04, "clip_nonnegative": True,
            },
        )
        assert min(resp.json()["curve"]["values"]) >= 0.0


class TestSelect:
    def test_select_endpoint(self, client, sim_payload):
        resp = client.post(
            "/select",
            json={
                "points": sim_payload["points"], "n": 300, "a": 0.05, "t": 1.0,
                "mode": "fixed-eta", "eta": -0.6,
            },
        )
        assert resp.status_code == 200
        sel = resp.json()["selection"]
        assert sel["chosen_h"] in sel["bandwidths"]
        totals = np.asarray(sel["total_values"])
        assert totals.min() == totals[sel["bandwidths"].index(sel["chosen_h"])]


class TestBenchmark:
    def test_small_run(self, client):
        resp = client.post(
            "/benchmark",
            json={
                "scenarios": [{"label": "beta-unisym", "n": 500, "a": 0.05}],
                "replicates": 2, "seed": 8,
            },
        )
        assert resp.status_code == 200
        reports = resp.json()["reports"]
        assert len(reports) == 3
        assert {r["method"] for r in reports} == {"fixed-eta", "adaptive-gamma", "oracle"}

    def test_requires_scenarios(self, client):
        resp = client.post("/benchmark", json={"replicates": 2, "seed": 8})
        assert resp.status_code == 400


class TestDeconvolve:
    def test_synthetic_intervals(self, client):
        rng = np.random.default_rng(3)
        x = rng.uniform(0.2, 0.8, 200)
        y = x + rng.uniform(-0.05, 0.05, 200)
        intervals = [{"start": float(v - 0.05), "end": float(v + 0.05)} for v in y]
        resp = client.post(
            "/deconvolve", json={"intervals": intervals, "n": 200, "t": 1.0, "naive": True}
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["a_estimate"] == pytest.approx(0.05, rel=1e-9)
        assert body["n_used"] == 200
        assert np.all(np.isfinite(body["curve"]["values"]))
        assert body["naive_curve"] is not None
        assert body["naive_curve"]["variant"] == "direct"

    def test_defaults_for_n_and_t(self, client):
        intervals = [{"start": 0.0, "end": 1.0}, {"start": 2.0, "end": 4.0}]
        resp = client.post("/deconvolve", json={"intervals": intervals})
        assert resp.status_code == 200
        body = resp.json()
        assert body["n_used"] == 2
        assert body["t_used"] == 4.0
