"""Time series containers, CSV ingestion and windowing.

All epidemiological inputs (new infections, active cases, new recoveries,
new deaths, cumulative counts) are irregular (time, value) observations on
a common window [0, T].  Series belonging to one dataset may sit on
different time grids; nothing here resamples or imputes.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

import numpy as np

from .errors import DataValidationError, EmptyWindowError, ParseError

SERIES_LABELS = (
    "incidence",
    "active",
    "new_recoveries",
    "new_deaths",
    "cumulative_recoveries",
    "cumulative_deaths",
)

TIME_UNITS = ("days", "weeks")


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)  # copy: never flip the caller's array read-only
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TimeSeries:
    """Ordered (time, value) observations for one epidemiological quantity.

    Times are strictly increasing, values non-negative.  The time unit
    (days or weeks) is metadata only; all numerics are unit-agnostic.
    """

    times: np.ndarray
    values: np.ndarray
    label: str = "incidence"
    time_unit: str = "days"

    def __post_init__(self):
        object.__setattr__(self, "times", _readonly(self.times))
        object.__setattr__(self, "values", _readonly(self.values))
        if self.label not in SERIES_LABELS:
            raise DataValidationError(f"unknown series label {self.label!r}")
        if self.time_unit not in TIME_UNITS:
            raise DataValidationError(f"unknown time unit {self.time_unit!r}")
        if self.times.ndim != 1 or self.values.ndim != 1:
            raise DataValidationError("times and values must be 1-dimensional")
        if len(self.times) != len(self.values):
            raise DataValidationError("times and values must have equal length")
        if len(self.times) < 1:
            raise DataValidationError("series must contain at least one observation")
        if not np.all(np.isfinite(self.times)) or not np.all(np.isfinite(self.values)):
            raise DataValidationError("times and values must be finite")
        if np.any(np.diff(self.times) <= 0):
            raise DataValidationError("times must be strictly increasing")
        if np.any(self.values < 0):
            raise DataValidationError("values must be non-negative")

    def __len__(self) -> int:
        return len(self.times)

    def with_label(self, label: str) -> "TimeSeries":
        return replace(self, label=label)


@dataclass(frozen=True)
class EpiDataset:
    """A bundle of series over one observation window.

    Only incidence is required.  Member series keep their own grids; the
    only constraint is that every stamp lies inside the window.
    """

    incidence: TimeSeries
    window: tuple[float, float]
    active: TimeSeries | None = None
    new_recoveries: TimeSeries | None = None
    new_deaths: TimeSeries | None = None
    cumulative_recoveries: TimeSeries | None = None
    cumulative_deaths: TimeSeries | None = None
    time_unit: str = "days"

    def __post_init__(self):
        t0, t1 = self.window
        if not t0 < t1:
            raise DataValidationError("window start must precede window end")
        for name, series in self.members():
            if series.times[0] < t0 - 1e-9 or series.times[-1] > t1 + 1e-9:
                raise DataValidationError(
                    f"series {name!r} has observations outside the window [{t0}, {t1}]"
                )

    def members(self):
        """Yield (name, series) for every populated member series."""
        for name in ("incidence", "active", "new_recoveries", "new_deaths",
                     "cumulative_recoveries", "cumulative_deaths"):
            series = getattr(self, name)
            if series is not None:
                yield name, series


def parse_csv(path, label: str = "incidence", time_unit: str = "days") -> TimeSeries:
    """Read a two-column "t,value" CSV into a validated TimeSeries.

    The t column holds either real numbers or ISO dates (YYYY-MM-DD);
    dates are converted to day offsets from the earliest date in the file.
    Parse failures report the offending 1-based line number.
    """
    path = Path(path)
    rows: list[tuple[object, float, int]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if [c.strip().lower() for c in header[:2]] != ["t", "value"]:
            raise ParseError(f"{path}: line 1: expected header 't,value'")
        lineno = 1
        for row in reader:
            lineno += 1
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2:
                raise ParseError(f"{path}: line {lineno}: malformed row {row!r}")
            t_raw, v_raw = row[0].strip(), row[1].strip()
            try:
                t: object = float(t_raw)
            except ValueError:
                try:
                    t = date.fromisoformat(t_raw)
                except ValueError:
                    raise ParseError(
                        f"{path}: line {lineno}: malformed time value {t_raw!r}"
                    ) from None
            try:
                v = float(v_raw)
            except ValueError:
                raise ParseError(
                    f"{path}: line {lineno}: malformed value {v_raw!r}"
                ) from None
            if v < 0:
                raise ParseError(f"{path}: line {lineno}: negative value {v}")
            rows.append((t, v, lineno))
    if not rows:
        raise ParseError(f"{path}: no data rows")

    kinds = {isinstance(t, date) for t, _, _ in rows}
    if len(kinds) > 1:
        raise ParseError(f"{path}: mixed date and numeric time stamps")
    if kinds == {True}:
        origin = min(t for t, _, _ in rows)
        times = [float((t - origin).days) for t, _, _ in rows]
    else:
        times = [float(t) for t, _, _ in rows]

    for i in range(1, len(times)):
        if times[i] <= times[i - 1]:
            raise ParseError(
                f"{path}: line {rows[i][2]}: non-monotone time {times[i]}"
            )

    return TimeSeries(
        times=np.array(times), values=np.array([v for _, v, _ in rows]),
        label=label, time_unit=time_unit,
    )


def write_csv(series: TimeSeries, path) -> None:
    """Serialize a series back to the "t,value" format (full float precision)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "value"])
        for t, v in zip(series.times, series.values):
            writer.writerow([repr(float(t)), repr(float(v))])


def restrict_window(ds: EpiDataset, t0: float, t1: float) -> EpiDataset:
    """Filter every member series to [t0, t1] and re-base times to start at 0.

    Optional series that end up empty are dropped; an empty incidence
    series is an error.
    """
    if not t0 < t1:
        raise DataValidationError("window start must precede window end")

    def cut(series: TimeSeries | None) -> TimeSeries | None:
        if series is None:
            return None
        keep = (series.times >= t0 - 1e-9) & (series.times <= t1 + 1e-9)
        if not np.any(keep):
            return None
        return TimeSeries(
            times=series.times[keep] - t0, values=series.values[keep],
            label=series.label, time_unit=series.time_unit,
        )

    incidence = cut(ds.incidence)
    if incidence is None:
        raise EmptyWindowError(
            f"window [{t0}, {t1}] leaves no incidence observations"
        )
    return EpiDataset(
        incidence=incidence,
        window=(0.0, t1 - t0),
        active=cut(ds.active),
        new_recoveries=cut(ds.new_recoveries),
        new_deaths=cut(ds.new_deaths),
        cumulative_recoveries=cut(ds.cumulative_recoveries),
        cumulative_deaths=cut(ds.cumulative_deaths),
        time_unit=ds.time_unit,
    )


def load_manifest(path) -> EpiDataset:
    """Load a dataset manifest: JSON mapping labels to CSV paths.

    Layout::

        {
          "time_unit": "days",
          "window": [0, 84],          # optional; inferred from the data
          "series": {"incidence": "cases.csv", "new_recoveries": "recov.csv"}
        }

    Relative CSV paths resolve against the manifest's directory.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from None
    if "series" not in doc or not isinstance(doc["series"], dict):
        raise ParseError(f"{path}: manifest must contain a 'series' mapping")
    if "incidence" not in doc["series"]:
        raise ParseError(f"{path}: manifest must declare an incidence series")
    time_unit = doc.get("time_unit", "days")
    for label in doc["series"]:
        if label not in SERIES_LABELS:
            raise ParseError(f"{path}: unknown series label {label!r}")

    loaded: dict[str, TimeSeries] = {}
    for label, rel in doc["series"].items():
        loaded[label] = parse_csv((path.parent / rel), label=label, time_unit=time_unit)

    if "window" in doc:
        w0, w1 = float(doc["window"][0]), float(doc["window"][1])
    else:
        w0 = min(s.times[0] for s in loaded.values())
        w1 = max(s.times[-1] for s in loaded.values())
    return EpiDataset(
        incidence=loaded["incidence"],
        window=(w0, w1),
        active=loaded.get("active"),
        new_recoveries=loaded.get("new_recoveries"),
        new_deaths=loaded.get("new_deaths"),
        cumulative_recoveries=loaded.get("cumulative_recoveries"),
        cumulative_deaths=loaded.get("cumulative_deaths"),
        time_unit=time_unit,
    )


def write_manifest(ds: EpiDataset, out_dir, stem: str = "dataset") -> Path:
    """Write a dataset as a manifest plus one CSV per member series."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    series_map = {}
    for name, series in ds.members():
        fname = f"{stem}_{name}.csv"
        write_csv(series, out_dir / fname)
        series_map[name] = fname
    manifest = {
        "time_unit": ds.time_unit,
        "window": [ds.window[0], ds.window[1]],
        "series": series_map,
    }
    manifest_path = out_dir / f"{stem}_manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest_path
