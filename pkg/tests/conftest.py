import numpy as np
import pytest

from epirates import (
    GammaParams,
    SimConfig,
    TransmissionProfile,
    export_dataset,
    simulate_distributed,
)


@pytest.fixture(scope="session")
def small_sim_dataset():
    """A 60-day distributed epidemic exported daily; ground truth gamma(5, 3)."""
    cfg = SimConfig(
        population=1e5, susceptible0=9.9e4, infected0=1e3,
        transmission=TransmissionProfile.constant(0.3),
        mode="distributed",
        recovery_kernel=GammaParams(5.0, 3.0),
        death_kernel=GammaParams(5.0, 2.0),
        survival_probability=0.97,
        step=0.1, horizon=60.0,
    )
    state = simulate_distributed(cfg)
    return export_dataset(state, sampling="daily")


def write_series_csv(path, times, values):
    lines = ["t,value"] + [f"{t},{v}" for t, v in zip(times, values)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


@pytest.fixture
def make_manifest(tmp_path):
    """Write a manifest plus CSVs for the given label -> (times, values) map."""

    def _make(series: dict, window=None, time_unit="days"):
        import json

        mapping = {}
        for label, (times, values) in series.items():
            fname = f"{label}.csv"
            write_series_csv(tmp_path / fname, times, values)
            mapping[label] = fname
        doc = {"time_unit": time_unit, "series": mapping}
        if window is not None:
            doc["window"] = list(window)
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        return path

    return _make


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
