import numpy as np
import pytest
from fastapi.testclient import TestClient

from epirates import GammaParams, KernelSmoother, TimeSeries
from epirates import gammadist
from epirates.service.app import app
from epirates.smoother import evaluate_grid


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


@pytest.fixture(scope="module")
def sim_payload(client):
    response = client.post("/simulate", json={
        "population": 1e5, "susceptible0": 9.9e4, "infected0": 1e3,
        "beta": 0.3, "mode": "distributed", "step": 0.1, "horizon": 60,
        "recovery_kernel": {"shape": 5, "scale": 3},
        "death_kernel": {"shape": 5, "scale": 2},
        "survival_probability": 0.97,
        "export": "daily",
    })
    assert response.status_code == 200
    return response.json()


class TestBasics:
    def test_health(self, client):
        doc = client.get("/health").json()
        assert doc["status"] == "ok"

    def test_defaults(self, client):
        doc = client.get("/defaults").json()
        assert doc["shape_step"] == 0.05
        assert doc["mode_window_days"] == [3.0, 40.0]


class TestSmooth:
    def test_matches_library(self, client):
        times = [0.0, 1.0, 2.0, 3.0]
        values = [5.0, 7.0, 4.0, 6.0]
        doc = client.post("/smooth", json={
            "series": {"times": times, "values": values},
            "grid": {"start": 0, "stop": 3, "step": 0.5},
        }).json()
        sm = KernelSmoother.from_series(
            TimeSeries(times=times, values=values, label="incidence"))
        expected = evaluate_grid(sm, np.arange(0, 3.01, 0.5))
        assert doc["values"] == pytest.approx(expected)
        assert doc["bandwidth"] == pytest.approx(sm.bandwidth)
        assert "resolved_config" in doc

    def test_bad_grid(self, client):
        response = client.post("/smooth", json={
            "series": {"times": [0.0], "values": [1.0]},
            "grid": {"start": 5, "stop": 0, "step": 0.5},
        })
        assert response.status_code == 400

    def test_invalid_series_rejected(self, client):
        response = client.post("/smooth", json={
            "series": {"times": [1.0, 0.0], "values": [1.0, 2.0]},
            "grid": {"start": 0, "stop": 1, "step": 0.5},
        })
        assert response.status_code == 400


class TestGammaSummary:
    def test_values(self, client):
        doc = client.post("/gamma/summary",
                          json={"shape": 4.7, "scale": 4.5}).json()
        assert doc["mean"] == pytest.approx(21.15)
        assert doc["mode"] == pytest.approx(16.65)
        assert doc["median"] == pytest.approx(19.64, abs=0.1)

    def test_pydantic_validation(self, client):
        response = client.post("/gamma/summary", json={"shape": -1, "scale": 1})
        assert response.status_code == 422


class TestSurvival:
    def test_ratio(self, client):
        doc = client.post("/survival", json={
            "cumulative_recoveries_end": 97, "cumulative_deaths_end": 3}).json()
        assert doc["survival_probability"] == pytest.approx(0.97)

    def test_no_closed_cases(self, client):
        response = client.post("/survival", json={
            "cumulative_recoveries_end": 0, "cumulative_deaths_end": 0})
        assert response.status_code == 400


class TestMetrics:
    def test_hit_from_r0(self, client):
        doc = client.post("/metrics", json={"r0": 18}).json()
        assert doc["hit"] == pytest.approx(0.9444, abs=5e-5)

    def test_full_integration(self, client):
        doc = client.post("/metrics", json={
            "recovery_shape": 2.0, "recovery_scale": 5.0,
            "death_shape": 2.0, "death_scale": 1.0,
            "survival_probability": 1.0,
            "beta": 0.1, "susceptible_initial": 1e6, "population": 1e6,
        }).json()
        assert doc["r0"] == pytest.approx(1.0, rel=1e-3)
        assert doc["hit"] == pytest.approx(0.0, abs=1e-3)

    def test_missing_inputs(self, client):
        response = client.post("/metrics", json={"recovery_shape": 2.0})
        assert response.status_code == 400

    def test_negative_r0(self, client):
        response = client.post("/metrics", json={"r0": -1})
        assert response.status_code == 400


class TestSimulate:
    def test_classical(self, client):
        doc = client.post("/simulate", json={
            "population": 1e5, "susceptible0": 9.9e4, "infected0": 1e3,
            "beta": 0.0, "mode": "classical", "recovery_rate": 0.1,
            "death_rate": 0.0, "step": 0.1, "horizon": 10,
        }).json()
        total = (np.array(doc["S"]) + np.array(doc["I"]) + np.array(doc["R"])
                 + np.array(doc["D"]))
        assert total == pytest.approx(1e5)
        assert doc["exported"] is None

    def test_distributed_with_export(self, sim_payload):
        assert set(sim_payload["exported"]) == {
            "incidence", "active", "new_recoveries", "new_deaths"}
        assert sim_payload["resolved_config"]["beta"] == 0.3

    def test_bad_mode(self, client):
        response = client.post("/simulate", json={
            "population": 1e5, "susceptible0": 9.9e4, "infected0": 1e3,
            "beta": 0.3, "mode": "quantum", "step": 0.1, "horizon": 10,
        })
        assert response.status_code == 400


class TestFit:
    def fit_request(self, sim_payload, **overrides):
        exported = sim_payload["exported"]
        payload = {
            "incidence": {"times": exported["incidence"]["times"],
                          "values": exported["incidence"]["values"],
                          "label": "incidence"},
            "observed": {"times": exported["new_recoveries"]["times"],
                         "values": exported["new_recoveries"]["values"],
                         "label": "new_recoveries"},
            "target": "recovery",
            "survival_probability": 0.97,
            "shape_max": 8, "scale_max": 6,
            "shape_step": 0.25, "scale_step": 0.25,
            "mode_lower": 5, "mode_upper": 25,
            "quadrature_step": 0.25,
        }
        payload.update(overrides)
        return payload

    def test_recovers_truth(self, client, sim_payload):
        doc = client.post("/fit", json=self.fit_request(sim_payload)).json()
        assert doc["optimal"] == {"shape": 5.0, "scale": 3.0}
        assert doc["summary"]["mean"] == pytest.approx(15.0)
        assert doc["resolved_config"]["quadrature_step"] == 0.25
        assert len(doc["predicted"]["values"]) == len(doc["observed"]["values"])

    def test_deterministic_across_calls(self, client, sim_payload):
        a = client.post("/fit", json=self.fit_request(sim_payload, workers=1))
        b = client.post("/fit", json=self.fit_request(sim_payload, workers=2))
        assert a.json() == b.json()

    def test_empty_feasible_region(self, client, sim_payload):
        response = client.post("/fit", json=self.fit_request(
            sim_payload, mode_lower=500, mode_upper=600))
        assert response.status_code == 400
        assert "mode window" in response.json()["detail"]

    def test_bad_survival_probability(self, client, sim_payload):
        response = client.post("/fit", json=self.fit_request(
            sim_payload, survival_probability=1.3))
        assert response.status_code == 400
        assert "survival_probability" in response.json()["detail"]


class TestBaselineCompare:
    def test_ordering(self, client, sim_payload):
        exported = sim_payload["exported"]
        doc = client.post("/baseline/compare", json={
            "fitted_shape": 5.0, "fitted_scale": 3.0,
            "target": "recovery", "survival_probability": 0.97,
            "survey_sample_size": 120,
            "incidence": {"times": exported["incidence"]["times"],
                          "values": exported["incidence"]["values"]},
            "observed": {"times": exported["new_recoveries"]["times"],
                         "values": exported["new_recoveries"]["values"],
                         "label": "new_recoveries"},
            "active": {"times": exported["active"]["times"],
                       "values": exported["active"]["values"],
                       "label": "active"},
        }).json()
        assert doc["ordering"][0] == "distributed"
        assert len(doc["baselines"]) == 3
        assert all(e["band"] for e in doc["baselines"])
        assert doc["n_common_times"] == 60
