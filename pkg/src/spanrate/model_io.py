"""Loading and writing line models, conductor catalogs, forecasts and results.

File formats
------------
Conductor catalog (CSV)::

    name,diameter_m,r_low_ohm_per_km,t_low_c,r_high_ohm_per_km,t_high_c,absorptivity,emissivity

Line model (CSV, ``bearing_deg`` optional)::

    span_id,lat1,lon1,lat2,lon2,elevation_m,max_temp_c,conductor_name[,bearing_deg]

or a GeoJSON FeatureCollection of LineStrings whose properties carry the same
fields (endpoints come from the first and last coordinates).

Predictions (CSV)::

    span_id,timestamp,u_mean,u_std,v_mean,v_std,t_mean,t_std,lead_time_h

Timestamps are ISO-8601 UTC and must sit on the hour.
"""

import csv
import json
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np
import pandas as pd

from .exceptions import InputValidationError, InvalidInputError, SpanrateError
from .geometry import span_bearing
from .ratings import (
    LINE_COLUMNS,
    SPAN_COLUMNS,
    FixedWeather,
    Line,
    RunConfig,
    Span,
    WeatherPrediction,
    parse_variants,
)
from .thermal import Conductor

__all__ = [
    "RunConfig",
    "WeatherPrediction",
    "PredictionSet",
    "span_bearing",
    "load_conductor_catalog",
    "load_line_model",
    "write_line_model",
    "load_predictions",
    "write_predictions",
    "load_config",
    "write_config",
    "write_results",
    "read_line_results",
    "read_span_results",
]

CONDUCTOR_HEADER = [
    "name", "diameter_m", "r_low_ohm_per_km", "t_low_c",
    "r_high_ohm_per_km", "t_high_c", "absorptivity", "emissivity",
]
LINE_HEADER = [
    "span_id", "lat1", "lon1", "lat2", "lon2", "elevation_m", "max_temp_c", "conductor_name",
]
PREDICTION_HEADER = [
    "span_id", "timestamp", "u_mean", "u_std", "v_mean", "v_std", "t_mean", "t_std", "lead_time_h",
]
TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


# ----------------------------------------------------------------- conductors


def load_conductor_catalog(path=None):
    """Read a conductor catalog; ``None`` loads the bundled one.

    Returns a dict mapping conductor name to :class:`Conductor`.
    Resistances are given per km in the file and stored per metre.
    """
    if path is None:
        text = resources.files("spanrate").joinpath("data/conductors.csv").read_text()
        source = "<bundled conductors.csv>"
    else:
        text = Path(path).read_text()
        source = str(path)
    reader = csv.DictReader(text.splitlines())
    missing = [c for c in CONDUCTOR_HEADER if c not in (reader.fieldnames or [])]
    if missing:
        raise InputValidationError(f"{source}: missing column(s) {', '.join(missing)}",
                                   [(source, 1, "bad header")])
    catalog, problems = {}, []
    for lineno, row in enumerate(reader, start=2):
        try:
            c = Conductor(
                name=row["name"].strip(),
                diameter_m=float(row["diameter_m"]),
                r_ref_ohm_per_m=float(row["r_low_ohm_per_km"]) / 1000.0,
                t_ref_low_c=float(row["t_low_c"]),
                r_ref_high_ohm_per_m=float(row["r_high_ohm_per_km"]) / 1000.0,
                t_ref_high_c=float(row["t_high_c"]),
                absorptivity=float(row["absorptivity"]),
                emissivity=float(row["emissivity"]),
            )
        except (TypeError, ValueError, SpanrateError) as exc:
            problems.append((source, lineno, str(exc)))
            continue
        if c.name in catalog:
            problems.append((source, lineno, f"duplicate conductor {c.name!r}"))
            continue
        catalog[c.name] = c
    if problems:
        raise InputValidationError(f"{source}: invalid conductor catalog", problems)
    return catalog


def write_conductor_catalog(catalog, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CONDUCTOR_HEADER)
        for c in catalog.values():
            w.writerow([c.name, repr(c.diameter_m), repr(c.r_ref_ohm_per_m * 1000.0), repr(c.t_ref_low_c),
                        repr(c.r_ref_high_ohm_per_m * 1000.0), repr(c.t_ref_high_c),
                        repr(c.absorptivity), repr(c.emissivity)])


# ----------------------------------------------------------------- line model


def _span_from_record(rec, catalog):
    name = str(rec["conductor_name"]).strip()
    if name not in catalog:
        raise InvalidInputError(f"unknown conductor {name!r}")
    bearing = rec.get("bearing_deg")
    bearing = None if bearing in (None, "") else float(bearing)
    start = (float(rec["lat1"]), float(rec["lon1"]))
    end = (float(rec["lat2"]), float(rec["lon2"]))
    for lat, lon in (start, end):
        if not (-90 <= lat <= 90 and -180 <= lon <= 180):
            raise InvalidInputError("coordinates out of range")
    span_id = str(rec["span_id"]).strip()
    if not span_id:
        raise InvalidInputError("empty span_id")
    return Span(
        id=span_id,
        start=start,
        end=end,
        elevation_m=float(rec["elevation_m"]),
        max_temp_c=float(rec["max_temp_c"]),
        conductor=catalog[name],
        bearing_deg=bearing,
    )


def _geojson_records(path):
    data = json.loads(Path(path).read_text())
    feats = data.get("features") if isinstance(data, dict) else None
    if feats is None:
        raise InputValidationError(f"{path}: not a GeoJSON FeatureCollection", [(str(path), None, "no features")])
    for i, feat in enumerate(feats, start=1):
        geom = feat.get("geometry") or {}
        coords = geom.get("coordinates") or []
        if geom.get("type") != "LineString" or len(coords) < 2:
            yield i, None, "feature is not a LineString with two or more points"
            continue
        props = dict(feat.get("properties") or {})
        (lon1, lat1), (lon2, lat2) = coords[0][:2], coords[-1][:2]
        props.update(lat1=lat1, lon1=lon1, lat2=lat2, lon2=lon2)
        yield i, props, None


def load_line_model(path, conductors=None, line_id=None):
    """Load a line from CSV or GeoJSON.

    Bearings are derived from the endpoints when absent.  Every bad row is
    reported (with its line number, or feature index for GeoJSON) in a single
    :class:`InputValidationError`.
    """
    path = Path(path)
    catalog = conductors if conductors is not None else load_conductor_catalog()
    problems, spans, seen = [], [], {}
    if path.suffix.lower() in (".geojson", ".json"):
        rows = _geojson_records(path)
    else:
        rows = _csv_line_rows(path, problems)
    for lineno, rec, err in rows:
        if err:
            problems.append((str(path), lineno, err))
            continue
        try:
            span = _span_from_record(rec, catalog)
        except (KeyError, TypeError, ValueError, SpanrateError) as exc:
            msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
            problems.append((str(path), lineno, msg))
            continue
        if span.id in seen:
            problems.append((str(path), lineno, f"duplicate span id {span.id!r} (first at line {seen[span.id]})"))
            continue
        seen[span.id] = lineno
        spans.append(span)
    if problems:
        raise InputValidationError(f"{path}: invalid line model", problems)
    if not spans:
        raise InputValidationError(f"{path}: no spans", [(str(path), None, "empty line model")])
    return Line(line_id or path.stem, tuple(spans))


def _csv_line_rows(path, problems):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in LINE_HEADER if c not in (reader.fieldnames or [])]
        if missing:
            problems.append((str(path), 1, f"missing column(s) {', '.join(missing)}"))
            return
        for lineno, row in enumerate(reader, start=2):
            if None in row or any(row.get(c) in (None, "") for c in LINE_HEADER):
                yield lineno, None, "malformed row (wrong field count or empty value)"
                continue
            yield lineno, row, None


def write_line_model(line, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LINE_HEADER + ["bearing_deg"])
        for s in line.spans:
            w.writerow([s.id, repr(s.start[0]), repr(s.start[1]), repr(s.end[0]), repr(s.end[1]),
                        repr(s.elevation_m), repr(s.max_temp_c), s.conductor.name, repr(s.bearing_deg)])


# ----------------------------------------------------------------- predictions


@dataclass
class PredictionSet:
    """Validated forecasts.

    ``frame`` holds accepted rows (timestamps as naive UTC ``datetime64``),
    ``errors`` the rejected ones as ``(path, line, message)``, and ``gaps``
    maps hours to span ids that have no forecast (only when a line is given).
    """

    frame: pd.DataFrame
    errors: list = field(default_factory=list)
    gaps: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.frame)

    def get(self, span_id, timestamp):
        ts = pd.Timestamp(np.datetime64(str(timestamp).rstrip("Z"), "s"))
        row = self.frame[(self.frame["span_id"] == str(span_id)) & (self.frame["timestamp"] == ts)]
        if row.empty:
            raise KeyError((span_id, timestamp))
        r = row.iloc[0]
        return WeatherPrediction(
            span_id=r["span_id"], timestamp=np.datetime64(r["timestamp"], "s"),
            u_mean=r["u_mean"], u_std=r["u_std"], v_mean=r["v_mean"], v_std=r["v_std"],
            t_mean=r["t_mean"], t_std=r["t_std"], lead_time_h=r["lead_time_h"],
        )

    def series(self, span_id):
        return self.frame[self.frame["span_id"] == str(span_id)].sort_values("timestamp")


def load_predictions(path, line=None, strict=False):
    """Load a forecast CSV, rejecting bad rows individually.

    Parameters
    ----------
    path : path-like
    line : Line, optional
        Enables unknown-span checks and gap reporting.
    strict : bool
        Raise :class:`InputValidationError` if any row was rejected.
    """
    path = str(path)
    raw = pd.read_csv(path, dtype={"span_id": str}, keep_default_na=False, na_values=[""])
    missing = [c for c in PREDICTION_HEADER if c not in raw.columns]
    if missing:
        raise InputValidationError(f"{path}: missing column(s) {', '.join(missing)}",
                                   [(path, 1, "bad header")])
    raw["span_id"] = raw["span_id"].astype(str).str.strip()
    lineno = np.arange(len(raw)) + 2
    reasons = pd.Series("", index=raw.index, dtype=object)

    def reject(mask, msg):
        mask = mask & (reasons == "")
        reasons[mask] = msg

    nums = ["u_mean", "u_std", "v_mean", "v_std", "t_mean", "t_std", "lead_time_h"]
    for c in nums:
        conv = pd.to_numeric(raw[c], errors="coerce")
        reject(conv.isna() | ~np.isfinite(conv.fillna(0.0)), f"{c} is not a finite number")
        raw[c] = conv
    ts = pd.to_datetime(raw["timestamp"], utc=True, errors="coerce", format="ISO8601")
    reject(ts.isna(), "timestamp is not ISO-8601")
    ts = ts.dt.tz_localize(None)
    reject(ts.notna() & (ts != ts.dt.floor("h")), "timestamp not aligned to the hour")
    for c in ("u_std", "v_std", "t_std"):
        reject(raw[c] < 0, f"{c} is negative")
    if line is not None:
        known = {s.id for s in line.spans}
        reject(~raw["span_id"].isin(known), "unknown span id")
    raw["timestamp"] = ts.astype("datetime64[s]")
    dup = raw.duplicated(["span_id", "timestamp"], keep="first") & (reasons == "")
    reject(dup, "duplicate (span_id, timestamp)")

    bad = reasons != ""
    errors = [(path, int(n), f"{r}") for n, r in zip(lineno[bad.to_numpy()], reasons[bad])]
    frame = raw.loc[~bad, PREDICTION_HEADER].reset_index(drop=True)
    if strict and errors:
        raise InputValidationError(f"{path}: {len(errors)} invalid prediction row(s)", errors)

    gaps = {}
    if line is not None and len(frame):
        hours = pd.date_range(frame["timestamp"].min(), frame["timestamp"].max(), freq="h")
        have = frame.groupby("timestamp")["span_id"].agg(set)
        ids = [s.id for s in line.spans]
        for h in hours:
            got = have.get(h, set())
            miss = [i for i in ids if i not in got]
            if miss:
                gaps[np.datetime64(h, "s")] = miss
    return PredictionSet(frame, errors, gaps)


def write_predictions(frame, path):
    if isinstance(frame, PredictionSet):
        frame = frame.frame
    df = frame.loc[:, PREDICTION_HEADER].copy()
    df["timestamp"] = pd.to_datetime(df["timestamp"]).dt.strftime(TIMESTAMP_FORMAT)
    df.to_csv(path, index=False)


# ----------------------------------------------------------------- config


def _weather(block, default):
    if block is None:
        return default
    allowed = {f.name for f in fields(FixedWeather)}
    extra = set(block) - allowed
    if extra:
        raise InvalidInputError(f"unknown key(s) {sorted(extra)} in weather block")
    return FixedWeather(**{**asdict(default), **{k: float(v) for k, v in block.items()}})


def config_from_dict(data):
    data = dict(data or {})
    allowed = {f.name for f in fields(RunConfig)}
    extra = set(data) - allowed
    if extra:
        raise InvalidInputError(f"unknown config key(s): {', '.join(sorted(extra))}")
    base = RunConfig()
    kwargs = {}
    for key, val in data.items():
        if key in ("sr", "aar"):
            kwargs[key] = _weather(val, getattr(base, key))
        elif key == "variants":
            kwargs[key] = parse_variants(val)
        else:
            kwargs[key] = val
    return RunConfig(**kwargs)


def load_config(path=None):
    """Read a JSON run configuration; every key is optional."""
    if path is None:
        return RunConfig()
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputValidationError(f"{path}: invalid JSON", [(str(path), exc.lineno, exc.msg)]) from None
    try:
        return config_from_dict(data)
    except (TypeError, SpanrateError) as exc:
        raise InputValidationError(f"{path}: invalid config", [(str(path), None, str(exc))]) from None


def config_to_dict(cfg):
    d = asdict(cfg)
    d["variants"] = [str(v) for v in cfg.variants]
    return d


def write_config(cfg, path):
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n")


# ----------------------------------------------------------------- results


def _iso(series):
    return pd.to_datetime(series).dt.strftime(TIMESTAMP_FORMAT)


def write_results(result, out_dir, json_mirror=True):
    """Write span/line CSV (and JSON mirrors) into ``out_dir``; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    span = result.span_ratings.loc[:, SPAN_COLUMNS].copy()
    span["timestamp"] = _iso(span["timestamp"])
    line = result.line_ratings.loc[:, LINE_COLUMNS].copy()
    line["timestamp"] = _iso(line["timestamp"])
    paths = {"span_csv": out / "span_ratings.csv", "line_csv": out / "line_ratings.csv"}
    span.to_csv(paths["span_csv"], index=False, float_format="%.6f")
    line.to_csv(paths["line_csv"], index=False, float_format="%.6f")
    if json_mirror:
        paths["span_json"] = out / "span_ratings.json"
        paths["line_json"] = out / "line_ratings.json"
        _json_frame(span, paths["span_json"])
        _json_frame(line, paths["line_json"])
    gaps = sorted(result.gaps.items())
    paths["gaps_csv"] = out / "gaps.csv"
    with open(paths["gaps_csv"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "missing_span_ids"])
        for ts, ids in gaps:
            w.writerow([pd.Timestamp(ts).strftime(TIMESTAMP_FORMAT), ";".join(ids)])
    return paths


def _json_frame(df, path):
    # rounded like the CSV so both files carry identical numbers
    df.round(6).to_json(path, orient="records", double_precision=6)


def read_line_results(results_dir):
    path = Path(results_dir) / "line_ratings.csv"
    if not path.exists():
        raise InputValidationError(f"{path}: not found", [(str(path), None, "missing line results")])
    df = pd.read_csv(path, dtype={"limiting_span_id": str})
    missing = [c for c in LINE_COLUMNS if c not in df.columns]
    if missing:
        raise InputValidationError(f"{path}: missing column(s) {', '.join(missing)}", [(str(path), 1, "bad header")])
    return df


def read_span_results(results_dir):
    path = Path(results_dir) / "span_ratings.csv"
    if not path.exists():
        raise InputValidationError(f"{path}: not found", [(str(path), None, "missing span results")])
    return pd.read_csv(path, dtype={"span_id": str})

