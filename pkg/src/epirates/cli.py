"""Command-line client for the estimation service.

Every command builds a request payload from local files, sends it through
the HTTP API and writes the response to disk.  By default the service app
runs in-process; `--server URL` targets a running `epirates-serve`
instance instead.  Exit codes: 0 success, 1 runtime failure, 2 usage
error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import httpx

from .errors import EpiratesError
from .timeseries import EpiDataset, TimeSeries, load_manifest, restrict_window, write_manifest


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=3600.0)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # starlette warns about its test client
        from fastapi.testclient import TestClient
    from .service.app import app
    return TestClient(app, raise_server_exceptions=False)


def _series_payload(series: TimeSeries) -> dict:
    return {"times": series.times.tolist(), "values": series.values.tolist(),
            "label": series.label, "time_unit": series.time_unit}


def _post(client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise EpiratesError(f"{path}: {detail}")
    return response.json()


def _load_dataset(manifest_path: str) -> EpiDataset:
    ds = load_manifest(manifest_path)
    # re-base so the estimation window starts at 0
    return restrict_window(ds, ds.window[0], ds.window[1])


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) for x in row])


def _require(ds: EpiDataset, name: str) -> TimeSeries:
    series = getattr(ds, name)
    if series is None:
        raise EpiratesError(f"dataset is missing the {name!r} series")
    return series


def validate_config(args) -> list[str]:
    """Diagnostics for a parsed command line; empty iff the run can start.

    Each entry names the offending field, so callers can print them as
    one-line errors without running anything.
    """
    diags: list[str] = []
    for attr in ("manifest", "config", "fit_report", "death_report", "beta_table"):
        path = getattr(args, attr, None)
        if path is not None and not Path(path).is_file():
            diags.append(f"{attr}: file not found: {path}")
    p0 = getattr(args, "p0", None)
    if p0 is not None and not 0.0 <= p0 <= 1.0:
        diags.append(f"survival_probability out of [0, 1]: {p0}")
    window = getattr(args, "mode_window", None)
    if window is not None and window[0] >= window[1]:
        diags.append(f"mode_lower {window[0]} not below mode_upper {window[1]}")
    for attr in ("shape_max", "scale_max", "shape_step", "scale_step", "dt",
                 "bandwidth_multiplier"):
        value = getattr(args, attr, None)
        if value is not None and value <= 0:
            diags.append(f"{attr} must be positive: {value}")
    workers = getattr(args, "workers", None)
    if workers is not None and workers < 1:
        diags.append(f"workers must be at least 1: {workers}")
    noise = getattr(args, "noise_scale", None)
    if noise is not None and noise < 0:
        diags.append(f"noise_scale must be non-negative: {noise}")
    out = getattr(args, "out", None)
    if out is not None:
        try:
            Path(out).mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            diags.append(f"out: cannot create output directory: {exc}")
    return diags


def _resolve_p0(args, ds: EpiDataset, client) -> float:
    if args.p0 is not None:
        return args.p0
    if not args.estimate_p0:
        raise EpiratesError("supply --p0 or --estimate-p0")
    recov = _require(ds, "cumulative_recoveries")
    death = _require(ds, "cumulative_deaths")
    doc = _post(client, "/survival", {
        "cumulative_recoveries_end": float(recov.values[-1]),
        "cumulative_deaths_end": float(death.values[-1]),
    })
    return doc["survival_probability"]


def _fit_payload(args, ds: EpiDataset, observed: TimeSeries, target: str,
                 p0: float) -> dict:
    payload = {
        "incidence": _series_payload(ds.incidence),
        "observed": _series_payload(observed),
        "target": target,
        "survival_probability": p0,
        "bandwidth_multiplier": args.bandwidth_multiplier,
        "workers": args.workers,
    }
    for flag, key in (("shape_max", "shape_max"), ("scale_max", "scale_max"),
                      ("shape_step", "shape_step"), ("scale_step", "scale_step"),
                      ("dt", "quadrature_step")):
        value = getattr(args, flag)
        if value is not None:
            payload[key] = value
    if args.mode_window is not None:
        lo, hi = args.mode_window
        payload["mode_lower"] = lo
        payload["mode_upper"] = hi
    return payload


def cmd_smooth(args, client) -> int:
    ds = _load_dataset(args.manifest)
    start, stop, step = args.grid
    doc = _post(client, "/smooth", {
        "series": _series_payload(ds.incidence),
        "bandwidth_multiplier": args.bandwidth_multiplier,
        "grid": {"start": start, "stop": stop, "step": step},
    })
    out = Path(args.out)
    _write_csv(out / "smoothed.csv", ["t", "value"],
               zip(doc["grid"], doc["values"]))
    _write_json(out / "smooth.json", {
        "bandwidth": doc["bandwidth"],
        "resolved_config": doc["resolved_config"],
    })
    print(out / "smoothed.csv")
    return 0


def _cmd_fit(args, client, target: str) -> int:
    ds = _load_dataset(args.manifest)
    observed = _require(ds, "new_recoveries" if target == "recovery"
                        else "new_deaths")
    p0 = _resolve_p0(args, ds, client)
    doc = _post(client, "/fit", _fit_payload(args, ds, observed, target, p0))
    out = Path(args.out)
    _write_json(out / f"fit_{target}.json", doc)
    _write_csv(out / f"fit_{target}_curve.csv", ["t", "observed", "predicted"],
               zip(doc["observed"]["times"], doc["observed"]["values"],
                   doc["predicted"]["values"]))
    opt = doc["optimal"]
    print(json.dumps({"shape": opt["shape"], "scale": opt["scale"],
                      "sse": doc["sse"]}))
    return 0


def cmd_fit_recovery(args, client) -> int:
    return _cmd_fit(args, client, "recovery")


def cmd_fit_death(args, client) -> int:
    return _cmd_fit(args, client, "death")


def cmd_baseline_compare(args, client) -> int:
    ds = _load_dataset(args.manifest)
    if args.fit_report:
        report = json.loads(Path(args.fit_report).read_text(encoding="utf-8"))
        shape, scale = report["optimal"]["shape"], report["optimal"]["scale"]
        target = report["target"]
        p0 = report["survival_probability"]
    elif args.fitted_gamma:
        shape, scale = _parse_gamma(args.fitted_gamma)
        target = args.target
        if args.p0 is None:
            raise EpiratesError("--fitted-gamma needs --p0")
        p0 = args.p0
    else:
        raise EpiratesError("supply --fit-report or --fitted-gamma")
    observed = _require(ds, "new_recoveries" if target == "recovery"
                        else "new_deaths")
    active = _require(ds, "active")
    doc = _post(client, "/baseline/compare", {
        "fitted_shape": shape,
        "fitted_scale": scale,
        "target": target,
        "survival_probability": p0,
        "tendencies": args.tendencies.split(","),
        "survey_sample_size": args.sample_size,
        "incidence": _series_payload(ds.incidence),
        "observed": _series_payload(observed),
        "active": _series_payload(active),
        "bandwidth_multiplier": args.bandwidth_multiplier,
    })
    out = Path(args.out)
    _write_json(out / "baseline_comparison.json", doc)
    for entry in doc["baselines"]:
        rate = entry["rate"]
        _write_csv(out / f"baseline_{entry['tendency']}.csv", ["t", "value"],
                   zip(active.times, rate * active.values))
        if entry.get("band"):
            lo, hi = entry["band"]["rate_lower"], entry["band"]["rate_upper"]
            _write_csv(out / f"baseline_{entry['tendency']}_band.csv",
                       ["t", "lower", "upper"],
                       zip(active.times, lo * active.values, hi * active.values))
    print(json.dumps({"ordering": doc["ordering"]}))
    return 0


def _parse_gamma(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise EpiratesError(f"expected 'shape,scale', got {text!r}")
    return float(parts[0]), float(parts[1])


def cmd_metrics(args, client) -> int:
    payload: dict = {"latent_period": args.tau}
    if args.r0 is not None:
        payload["r0"] = args.r0
    else:
        if args.fit_report:
            report = json.loads(Path(args.fit_report).read_text(encoding="utf-8"))
            payload["recovery_shape"] = report["optimal"]["shape"]
            payload["recovery_scale"] = report["optimal"]["scale"]
            if args.p0 is None:
                payload["survival_probability"] = report["survival_probability"]
        elif args.recovery_gamma:
            shape, scale = _parse_gamma(args.recovery_gamma)
            payload["recovery_shape"] = shape
            payload["recovery_scale"] = scale
        if args.death_report:
            report = json.loads(Path(args.death_report).read_text(encoding="utf-8"))
            payload["death_shape"] = report["optimal"]["shape"]
            payload["death_scale"] = report["optimal"]["scale"]
        elif args.death_gamma:
            shape, scale = _parse_gamma(args.death_gamma)
            payload["death_shape"] = shape
            payload["death_scale"] = scale
        if args.p0 is not None:
            payload["survival_probability"] = args.p0
        payload["susceptible_initial"] = args.s0
        payload["population"] = args.population
        if args.beta is not None:
            payload["beta"] = args.beta
        elif args.beta_table:
            eta, values = [], []
            with open(args.beta_table, newline="", encoding="utf-8") as fh:
                reader = csv.reader(fh)
                header = next(reader)
                if [c.strip().lower() for c in header[:2]] != ["eta", "beta"]:
                    raise EpiratesError(
                        f"{args.beta_table}: expected header 'eta,beta'")
                for row in reader:
                    eta.append(float(row[0]))
                    values.append(float(row[1]))
            payload["beta_table_eta"] = eta
            payload["beta_table_values"] = values
        if args.dt is not None:
            payload["quadrature_step"] = args.dt
    doc = _post(client, "/metrics", payload)
    line = json.dumps({"r0": doc["r0"], "hit": doc["hit"]})
    print(line)
    if args.out:
        _write_json(Path(args.out) / "metrics.json", doc)
    return 0


def cmd_simulate(args, client) -> int:
    config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    payload = dict(config)
    if args.export:
        payload["export"] = args.export
        payload["noise_seed"] = args.seed
        payload["noise_scale"] = args.noise_scale
    doc = _post(client, "/simulate", payload)
    out = Path(args.out)
    _write_csv(out / "simulation.csv",
               ["t", "S", "I", "R", "D", "J", "R_new", "D_new"],
               zip(doc["grid"], doc["S"], doc["I"], doc["R"], doc["D"],
                   doc["J"], doc["R_new"], doc["D_new"]))
    _write_json(out / "simulation.json",
                {"resolved_config": doc["resolved_config"]})
    if doc.get("exported"):
        members = {}
        for name, series in doc["exported"].items():
            members[name] = TimeSeries(
                times=series["times"], values=series["values"],
                label=series["label"])
        horizon = doc["grid"][-1]
        ds = EpiDataset(incidence=members["incidence"], window=(0.0, horizon),
                        active=members.get("active"),
                        new_recoveries=members.get("new_recoveries"),
                        new_deaths=members.get("new_deaths"))
        manifest = write_manifest(ds, out, stem="exported")
        print(manifest)
    else:
        print(out / "simulation.csv")
    return 0


def cmd_gamma_summary(args, client) -> int:
    doc = _post(client, "/gamma/summary",
                {"shape": args.shape, "scale": args.scale})
    print(json.dumps(doc))
    return 0


def _add_fit_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p0", type=float, help="survival probability")
    parser.add_argument("--estimate-p0", action="store_true",
                        help="estimate p0 from cumulative recovery/death series")
    parser.add_argument("--shape-max", type=float, dest="shape_max")
    parser.add_argument("--scale-max", type=float, dest="scale_max")
    parser.add_argument("--shape-step", type=float, dest="shape_step")
    parser.add_argument("--scale-step", type=float, dest="scale_step")
    parser.add_argument("--mode-window", type=_window, dest="mode_window",
                        metavar="LO,HI", help="feasible range for (shape-1)*scale")
    parser.add_argument("--dt", type=float, help="convolution quadrature step")
    parser.add_argument("--bandwidth-multiplier", type=float, default=1.0)
    parser.add_argument("--workers", type=int)


def _window(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'LO,HI', got {text!r}")
    return float(parts[0]), float(parts[1])


def _grid_spec(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected 'START,STOP,STEP', got {text!r}")
    return tuple(float(p) for p in parts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epirates",
        description="Estimate time-since-infection dependent recovery and "
                    "death distributions from epidemic time series")
    parser.add_argument("--server", help="base URL of a running service "
                                         "(default: run in-process)")
    parser.add_argument("--show-defaults", action="store_true",
                        help="print the defaults table and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("smooth", help="kernel-smooth the incidence series")
    p.add_argument("--manifest", required=True)
    p.add_argument("--grid", type=_grid_spec, required=True,
                   metavar="START,STOP,STEP")
    p.add_argument("--bandwidth-multiplier", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_smooth)

    for name, func in (("fit-recovery", cmd_fit_recovery),
                       ("fit-death", cmd_fit_death)):
        p = sub.add_parser(name, help=f"{name.replace('-', ' ')} kernel")
        p.add_argument("--manifest", required=True)
        p.add_argument("--out", required=True)
        _add_fit_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("baseline-compare",
                       help="score constant-rate baselines against a fit")
    p.add_argument("--manifest", required=True)
    p.add_argument("--fit-report", help="fit report JSON to take the kernel from")
    p.add_argument("--fitted-gamma", metavar="SHAPE,SCALE",
                   help="fitted kernel given directly (needs --p0)")
    p.add_argument("--target", choices=["recovery", "death"], default="recovery")
    p.add_argument("--p0", type=float)
    p.add_argument("--tendencies", default="mean,median,mode")
    p.add_argument("--sample-size", type=int)
    p.add_argument("--bandwidth-multiplier", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline_compare)

    p = sub.add_parser("metrics",
                       help="reproduction number and herd-immunity threshold")
    p.add_argument("--r0", type=float, help="use a known R0 directly")
    p.add_argument("--fit-report", help="recovery fit report JSON")
    p.add_argument("--death-report", help="death fit report JSON")
    p.add_argument("--recovery-gamma", metavar="SHAPE,SCALE")
    p.add_argument("--death-gamma", metavar="SHAPE,SCALE")
    p.add_argument("--p0", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--beta-table", help="CSV with header eta,beta")
    p.add_argument("--s0", type=float, help="initial susceptibles")
    p.add_argument("--population", type=float)
    p.add_argument("--tau", type=float, default=0.0, help="latent period")
    p.add_argument("--dt", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("simulate", help="integrate an epidemic forward")
    p.add_argument("--config", required=True, help="simulation config JSON")
    p.add_argument("--export", choices=["daily", "weekly"],
                   help="also export a fit-ready dataset")
    p.add_argument("--seed", type=int, help="noise seed for the export")
    p.add_argument("--noise-scale", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gamma-summary",
                       help="central tendencies of a gamma density")
    p.add_argument("--shape", type=float, required=True)
    p.add_argument("--scale", type=float, required=True)
    p.set_defaults(func=cmd_gamma_summary)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.show_defaults:
        with _client(args.server) as client:
            print(json.dumps(client.get("/defaults").json(), indent=2))
        return 0
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 2
    diagnostics = validate_config(args)
    if diagnostics:
        for line in diagnostics:
            print(f"error: {line}", file=sys.stderr)
        return 1
    try:
        with _client(args.server) as client:
            return args.func(args, client)
    except (EpiratesError, OSError, ValueError, httpx.HTTPError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
