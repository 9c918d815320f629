"""FastAPI service exposing the estimation pipeline.

Endpoints are pure compute over the payload: smoothing, gamma summaries,
kernel fitting, baseline comparison, derived metrics and simulation.
Domain errors surface as HTTP 400 with a one-line detail.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import baseline as baseline_mod
from .. import defaults as defaults_mod
from .. import epimetrics, fitter, gammadist, simulator
from ..errors import DataValidationError, EpiratesError
from ..gammadist import GammaParams
from ..smoother import KernelSmoother, evaluate_grid
from ..timeseries import TimeSeries
from . import schemas

app = FastAPI(
    title="epirates",
    description="Time-since-infection dependent recovery and death "
                "distribution estimation from aggregate epidemic series",
    version="0.1.0",
)


@app.exception_handler(EpiratesError)
async def domain_error_handler(request: Request, exc: EpiratesError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


def _series(payload: schemas.SeriesPayload) -> TimeSeries:
    return TimeSeries(times=np.asarray(payload.times),
                      values=np.asarray(payload.values),
                      label=payload.label, time_unit=payload.time_unit)


def _resolve_fit_config(req: schemas.FitRequest, time_unit: str) -> fitter.FitConfig:
    d = defaults_mod.DEFAULTS
    lo, hi = defaults_mod.mode_window(time_unit)
    return fitter.FitConfig(
        survival_probability=req.survival_probability,
        shape_max=req.shape_max if req.shape_max is not None else d["shape_max"],
        scale_max=req.scale_max if req.scale_max is not None else d["scale_max"],
        shape_step=req.shape_step if req.shape_step is not None else d["shape_step"],
        scale_step=req.scale_step if req.scale_step is not None else d["scale_step"],
        mode_lower=req.mode_lower if req.mode_lower is not None else lo,
        mode_upper=req.mode_upper if req.mode_upper is not None else hi,
        quadrature_step=(req.quadrature_step if req.quadrature_step is not None
                         else defaults_mod.quadrature_step(time_unit)),
        target=req.target,
    )


@app.get("/health")
def health():
    return {"status": "ok", "version": app.version}


@app.get("/defaults")
def show_defaults():
    return defaults_mod.DEFAULTS


@app.post("/smooth", response_model=schemas.SmoothResponse)
def smooth(req: schemas.SmoothRequest):
    series = _series(req.series)
    sm = KernelSmoother.from_series(series, req.bandwidth_multiplier)
    if req.grid.stop < req.grid.start:
        raise DataValidationError("grid stop must not precede grid start")
    n = int(np.floor((req.grid.stop - req.grid.start) / req.grid.step + 1e-9))
    grid = req.grid.start + req.grid.step * np.arange(n + 1)
    values = evaluate_grid(sm, grid)
    return schemas.SmoothResponse(
        grid=grid.tolist(), values=values.tolist(), bandwidth=sm.bandwidth,
        resolved_config={
            "bandwidth_multiplier": req.bandwidth_multiplier,
            "bandwidth": sm.bandwidth,
            "n_observations": len(series),
            "grid": req.grid.model_dump(),
        },
    )


@app.post("/gamma/summary", response_model=schemas.GammaSummaryResponse)
def gamma_summary(req: schemas.GammaSummaryRequest):
    return schemas.GammaSummaryResponse(
        **gammadist.summary(GammaParams(req.shape, req.scale)))


@app.post("/survival", response_model=schemas.SurvivalResponse)
def survival(req: schemas.SurvivalRequest):
    p0 = epimetrics.estimate_survival_probability(
        req.cumulative_recoveries_end, req.cumulative_deaths_end)
    return schemas.SurvivalResponse(survival_probability=p0)


@app.post("/fit", response_model=schemas.FitResponse)
def fit_kernel(req: schemas.FitRequest):
    incidence = _series(req.incidence)
    observed = _series(req.observed)
    cfg = _resolve_fit_config(req, incidence.time_unit)
    sm = KernelSmoother.from_series(incidence, req.bandwidth_multiplier)
    result = fitter.fit(sm, observed, cfg, workers=req.workers)
    resolved = {
        "target": cfg.target,
        "survival_probability": cfg.survival_probability,
        "shape_max": cfg.shape_max, "scale_max": cfg.scale_max,
        "shape_step": cfg.shape_step, "scale_step": cfg.scale_step,
        "mode_lower": cfg.mode_lower, "mode_upper": cfg.mode_upper,
        "quadrature_step": cfg.quadrature_step,
        "bandwidth_multiplier": req.bandwidth_multiplier,
        "bandwidth": sm.bandwidth,
        "time_unit": incidence.time_unit,
    }
    return schemas.FitResponse(**fitter.fit_report(result, observed, resolved))


@app.post("/baseline/compare")
def baseline_compare(req: schemas.BaselineCompareRequest):
    if req.target not in ("recovery", "death"):
        raise DataValidationError(f"unknown target {req.target!r}")
    incidence = _series(req.incidence)
    observed = _series(req.observed)
    active = _series(req.active)
    gamma = GammaParams(req.fitted_shape, req.fitted_scale)
    dt = (req.quadrature_step if req.quadrature_step is not None
          else defaults_mod.quadrature_step(incidence.time_unit))
    sm = KernelSmoother.from_series(incidence, req.bandwidth_multiplier)
    predict = (fitter.predicted_new_recoveries if req.target == "recovery"
               else fitter.predicted_new_deaths)
    predicted = np.array([
        predict(sm, gamma, req.survival_probability, float(t), dt)
        for t in observed.times
    ])
    label = "new_recoveries" if req.target == "recovery" else "new_deaths"
    fit_result = fitter.FitResult(
        optimal=gamma,
        sse=fitter.sse(predicted, observed),
        predicted=TimeSeries(times=observed.times, values=predicted, label=label,
                             time_unit=observed.time_unit),
        cumulative_predicted=TimeSeries(
            times=observed.times,
            values=np.cumsum(predicted * np.diff(observed.times, prepend=0.0)),
            label="cumulative_recoveries" if req.target == "recovery"
            else "cumulative_deaths",
            time_unit=observed.time_unit),
        summary=gammadist.summary(gamma),
        surface_minima=[],
        target=req.target,
        survival_probability=req.survival_probability,
    )
    specs = [
        baseline_mod.BaselineSpec(
            tendency=t, target=req.target,
            survival_probability=req.survival_probability, gamma=gamma,
            survey_sample_size=req.survey_sample_size)
        for t in req.tendencies
    ]
    report = baseline_mod.compare(fit_result, specs, active, observed)
    report["resolved_config"] = {
        "fitted_shape": gamma.shape, "fitted_scale": gamma.scale,
        "target": req.target,
        "survival_probability": req.survival_probability,
        "tendencies": req.tendencies,
        "survey_sample_size": req.survey_sample_size,
        "quadrature_step": dt,
        "bandwidth_multiplier": req.bandwidth_multiplier,
    }
    return report


@app.post("/metrics", response_model=schemas.MetricsResponse)
def metrics(req: schemas.MetricsRequest):
    if req.r0 is not None:
        resolved = {"r0_source": "supplied", "r0": req.r0}
        return schemas.MetricsResponse(
            r0=req.r0, hit=epimetrics.herd_immunity_threshold(req.r0),
            resolved_config=resolved)
    required = (req.recovery_shape, req.recovery_scale, req.death_shape,
                req.death_scale, req.survival_probability,
                req.susceptible_initial, req.population)
    if any(v is None for v in required):
        raise DataValidationError(
            "metrics needs either r0 or recovery/death gammas plus "
            "survival_probability, susceptible_initial and population")
    if req.beta is not None:
        profile = epimetrics.TransmissionProfile.constant(req.beta)
    elif req.beta_table_eta is not None and req.beta_table_values is not None:
        profile = epimetrics.TransmissionProfile.tabulated(
            req.beta_table_eta, req.beta_table_values)
    else:
        raise DataValidationError("metrics needs beta or a beta table")
    ctx = epimetrics.EpiContext(
        susceptible_initial=req.susceptible_initial,
        population=req.population, latent_period=req.latent_period)
    dt = (req.quadrature_step if req.quadrature_step is not None
          else defaults_mod.DEFAULTS["r0_quadrature_step"])
    r0 = epimetrics.basic_reproduction_number(
        ctx, profile,
        GammaParams(req.recovery_shape, req.recovery_scale),
        GammaParams(req.death_shape, req.death_scale),
        req.survival_probability, dt)
    resolved = {
        "r0_source": "integrated",
        "recovery": {"shape": req.recovery_shape, "scale": req.recovery_scale},
        "death": {"shape": req.death_shape, "scale": req.death_scale},
        "survival_probability": req.survival_probability,
        "susceptible_initial": req.susceptible_initial,
        "population": req.population,
        "latent_period": req.latent_period,
        "quadrature_step": dt,
        "beta": req.beta,
    }
    return schemas.MetricsResponse(
        r0=r0, hit=epimetrics.herd_immunity_threshold(r0) if r0 > 0 else 0.0,
        resolved_config=resolved)


@app.post("/simulate", response_model=schemas.SimulateResponse)
def simulate(req: schemas.SimulateRequest):
    cfg = simulator.SimConfig(
        population=req.population, susceptible0=req.susceptible0,
        infected0=req.infected0,
        transmission=epimetrics.TransmissionProfile.constant(req.beta),
        mode=req.mode, step=req.step, horizon=req.horizon,
        recovery_rate=req.recovery_rate, death_rate=req.death_rate,
        recovery_kernel=(GammaParams(req.recovery_kernel.shape,
                                     req.recovery_kernel.scale)
                         if req.recovery_kernel else None),
        death_kernel=(GammaParams(req.death_kernel.shape, req.death_kernel.scale)
                      if req.death_kernel else None),
        survival_probability=req.survival_probability,
    )
    state = simulator.simulate(cfg)
    exported = None
    if req.export is not None:
        ds = simulator.export_dataset(state, sampling=req.export,
                                      noise_seed=req.noise_seed,
                                      noise_scale=req.noise_scale)
        exported = {
            name: schemas.SeriesOut(times=s.times.tolist(),
                                    values=s.values.tolist(), label=s.label)
            for name, s in ds.members()
        }
    resolved = req.model_dump()
    return schemas.SimulateResponse(
        grid=state.grid.tolist(), S=state.S.tolist(), I=state.I.tolist(),
        R=state.R.tolist(), D=state.D.tolist(), J=state.J.tolist(),
        R_new=state.R_new.tolist(), D_new=state.D_new.tolist(),
        exported=exported, resolved_config=resolved)
